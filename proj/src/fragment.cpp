#include "jigsaw/fragment.hpp"

#include <cmath>

#include "jigsaw/errors.hpp"

namespace jigsaw {

Fragment::Fragment(int id, Image raster, const ContourOptions& options) : id_(id), raster_(std::move(raster)) {
  if (raster_.empty()) throw InvalidInput("fragment raster is empty");
  double sx = 0, sy = 0;
  for (int y = 0; y < raster_.height; ++y)
    for (int x = 0; x < raster_.width; ++x)
      if (raster_.at(x, y).a != 0) {
        ++area_;
        sx += x + 0.5;
        sy += y + 0.5;
      }
  if (area_ == 0) throw InvalidInput("fragment has no opaque pixels");
  centroid_ = {sx / area_, sy / area_};
  for (int y = 0; y < raster_.height; ++y)
    for (int x = 0; x < raster_.width; ++x)
      if (raster_.at(x, y).a != 0)
        radius_ = std::max(radius_, (Point2{x + 0.5, y + 0.5} - centroid_).norm() + M_SQRT1_2);

  contour_ = trace_contour(raster_);
  contour_.validate();
  polygon_ = rdp_simplify(contour_, options.rdp_eps, options.rdp_color_tol);
  normals_ = contour_normals(contour_, raster_);
  grid_ = PointGrid(contour_.points, 8.0);
  perimeter_ = static_cast<double>(contour_.size());
}

bool Fragment::opaque_at(const Point2& local) const {
  return raster_.opaque(static_cast<int>(std::floor(local.x)), static_cast<int>(std::floor(local.y)));
}

}  // namespace jigsaw
