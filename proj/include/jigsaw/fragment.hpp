#pragma once

#include "jigsaw/contour.hpp"

namespace jigsaw {

struct ContourOptions {
  double rdp_eps = 2.5;
  double rdp_color_tol = 60.0;
};

// One irregular image piece in its local frame (local coordinates = raster pixel
// coordinates). Immutable after construction.
class Fragment {
 public:
  Fragment(int id, Image raster, const ContourOptions& options = {});

  int id() const { return id_; }
  const Image& raster() const { return raster_; }
  const Contour& contour() const { return contour_; }
  const PolygonApprox& polygon() const { return polygon_; }
  const std::vector<Point2>& normals() const { return normals_; }
  const PointGrid& contour_grid() const { return grid_; }
  long area() const { return area_; }
  Point2 centroid() const { return centroid_; }
  // Radius of a disc about the centroid that contains every opaque pixel.
  double radius() const { return radius_; }
  double perimeter() const { return perimeter_; }
  bool opaque_at(const Point2& local) const;

 private:
  int id_;
  Image raster_;
  Contour contour_;
  PolygonApprox polygon_;
  std::vector<Point2> normals_;
  PointGrid grid_;
  long area_ = 0;
  Point2 centroid_;
  double radius_ = 0;
  double perimeter_ = 0;
};

}  // namespace jigsaw
