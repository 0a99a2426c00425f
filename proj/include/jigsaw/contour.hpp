#pragma once

#include <vector>

#include "jigsaw/image.hpp"
#include "jigsaw/transform.hpp"

namespace jigsaw {

// Closed boundary curve of a fragment. Points sit on the crack between opaque and
// transparent pixels (pixel-edge midpoints), so two fragments that abut along a cut
// share identical boundary points. Orientation: positive shoelace area in the
// stored coordinates.
struct Contour {
  std::vector<Point2> points;
  std::vector<Color3> colors;

  std::size_t size() const { return points.size(); }
  // Throws InvalidInput when fewer than 3 points, sizes disagree, consecutive
  // duplicates exist, or the orientation is negative.
  void validate() const;
  double signed_area() const;
};

// Traces the outer boundary of the opaque region of `raster`. Colors come from the
// opaque pixel adjacent to each crack.
Contour trace_contour(const Image& raster);

// Unit outward normals: central difference over a (2*half_window+1)-point window,
// oriented away from the alpha mask.
std::vector<Point2> contour_normals(const Contour& contour, const Image& raster, int half_window = 3);

// A run of contour points [start, end). `end` may exceed the point count; indices are
// taken modulo the contour size. The chord runs from point start to point end.
struct Segment {
  int start = 0;
  int end = 0;
  Color3 mean;
};

struct PolygonApprox {
  std::vector<Segment> segments;
  int point_count = 0;

  Point2 chord_start(const Contour& c, const Segment& s) const { return c.points[s.start % point_count]; }
  Point2 chord_end(const Contour& c, const Segment& s) const { return c.points[s.end % point_count]; }
};

// Douglas-Peucker on a closed contour with a color-homogeneity refinement: a piece
// that fits the chord within `eps` but whose colors deviate from their mean by
// `color_tol` or more is split at the index that best separates its colors.
PolygonApprox rdp_simplify(const Contour& contour, double eps, double color_tol);

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b);
Color3 mean_color(const Contour& contour, int start, int end);
double max_color_deviation(const Contour& contour, int start, int end);

// Uniform bucket grid over a point set for radius-bounded nearest-neighbour queries.
class PointGrid {
 public:
  PointGrid() = default;
  PointGrid(const std::vector<Point2>& points, double cell_size);

  // Index of the nearest point within max_distance, or -1.
  int nearest(const Point2& q, double max_distance) const;

 private:
  std::vector<Point2> points_;
  double cell_ = 1.0;
  double min_x_ = 0, min_y_ = 0;
  int cols_ = 0, rows_ = 0;
  std::vector<int> cell_start_;
  std::vector<int> entries_;
};

}  // namespace jigsaw
