#include "jigsaw/contour.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "jigsaw/errors.hpp"

namespace jigsaw {
namespace {

struct Corner {
  int x, y;
  Corner operator+(const Corner& o) const { return {x + o.x, y + o.y}; }
  bool operator==(const Corner& o) const { return x == o.x && y == o.y; }
};

// Pixel whose interior touches the edge from c along d, on the side given by r.
Corner side_pixel(Corner c, Corner d, Corner r) {
  const Corner a = c + d, b = c + r, e = c + d + r;
  return {std::min({c.x, a.x, b.x, e.x}), std::min({c.y, a.y, b.y, e.y})};
}

Corner right_of(Corner d) { return {-d.y, d.x}; }
Corner left_of(Corner d) { return {d.y, -d.x}; }

}  // namespace

double Contour::signed_area() const {
  double a = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const auto& q = points[(i + 1) % points.size()];
    a += p.cross(q);
  }
  return 0.5 * a;
}

void Contour::validate() const {
  if (points.size() < 3) throw InvalidInput("contour needs at least 3 points");
  if (colors.size() != points.size()) throw InvalidInput("contour colors and points differ in length");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& q = points[(i + 1) % points.size()];
    if ((points[i] - q).squared_norm() == 0.0) throw InvalidInput("contour has consecutive duplicate points");
  }
  if (signed_area() <= 0) throw InvalidInput("contour orientation is not positive");
}

Contour trace_contour(const Image& raster) {
  Corner start{-1, -1};
  for (int y = 0; y < raster.height && start.x < 0; ++y)
    for (int x = 0; x < raster.width; ++x)
      if (raster.opaque(x, y)) {
        start = {x, y};
        break;
      }
  if (start.x < 0) throw InvalidInput("raster has no opaque pixels");

  // Walk the cracks with the opaque region on the right-hand side.
  Contour out;
  const Corner start_dir{1, 0};
  Corner c = start, d = start_dir;
  const std::size_t limit = 4 * raster.pixels.size() + 8;
  do {
    const Corner in = side_pixel(c, d, right_of(d));
    out.points.push_back({c.x + 0.5 * d.x, c.y + 0.5 * d.y});
    out.colors.push_back(to_color(raster.at(in.x, in.y)));
    c = c + d;
    const Corner fl = side_pixel(c, d, left_of(d));
    const Corner fr = side_pixel(c, d, right_of(d));
    if (raster.opaque(fl.x, fl.y))
      d = left_of(d);
    else if (!raster.opaque(fr.x, fr.y))
      d = right_of(d);
    if (out.points.size() > limit) throw InvalidInput("contour trace did not close");
  } while (!(c == start && d == start_dir));
  return out;
}

std::vector<Point2> contour_normals(const Contour& contour, const Image& raster, int half_window) {
  const int n = static_cast<int>(contour.size());
  std::vector<Point2> normals(n);
  auto pixel_opaque = [&](const Point2& q) {
    return raster.opaque(static_cast<int>(std::floor(q.x)), static_cast<int>(std::floor(q.y)));
  };
  for (int i = 0; i < n; ++i) {
    const Point2 t = contour.points[(i + half_window) % n] - contour.points[((i - half_window) % n + n) % n];
    const double len = t.norm();
    Point2 nrm = len > 0 ? Point2{t.y / len, -t.x / len} : Point2{0, 0};
    // Opaque side should be behind the normal.
    const Point2& p = contour.points[i];
    if (pixel_opaque(p + nrm * 0.6) && !pixel_opaque(p - nrm * 0.6)) nrm = nrm * -1.0;
    normals[i] = nrm;
  }
  return normals;
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double l2 = ab.squared_norm();
  if (l2 == 0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / l2, 0.0, 1.0);
  return (p - (a + ab * t)).norm();
}

Color3 mean_color(const Contour& contour, int start, int end) {
  const int n = static_cast<int>(contour.size());
  Color3 m;
  if (end <= start) return m;
  for (int i = start; i < end; ++i) {
    const auto& c = contour.colors[i % n];
    m.r += c.r;
    m.g += c.g;
    m.b += c.b;
  }
  const double k = end - start;
  return {m.r / k, m.g / k, m.b / k};
}

double max_color_deviation(const Contour& contour, int start, int end) {
  const int n = static_cast<int>(contour.size());
  const Color3 m = mean_color(contour, start, end);
  double worst = 0;
  for (int i = start; i < end; ++i) worst = std::max(worst, color_distance(contour.colors[i % n], m));
  return worst;
}

PolygonApprox rdp_simplify(const Contour& contour, double eps, double color_tol) {
  contour.validate();
  const int n = static_cast<int>(contour.size());
  const auto& pts = contour.points;

  // per-channel prefix sums over two laps so a split cost is O(1)
  std::vector<std::array<double, 6>> prefix(2 * n + 1, std::array<double, 6>{});
  for (int i = 0; i < 2 * n; ++i) {
    const auto& c = contour.colors[i % n];
    const double v[3] = {c.r, c.g, c.b};
    for (int ch = 0; ch < 3; ++ch) {
      prefix[i + 1][ch] = prefix[i][ch] + v[ch];
      prefix[i + 1][3 + ch] = prefix[i][3 + ch] + v[ch] * v[ch];
    }
  }
  auto sse = [&](int lo, int hi) {
    const double k = hi - lo;
    double total = 0;
    for (int ch = 0; ch < 3; ++ch) {
      const double sum = prefix[hi][ch] - prefix[lo][ch];
      total += (prefix[hi][3 + ch] - prefix[lo][3 + ch]) - sum * sum / k;
    }
    return total;
  };

  Point2 centroid;
  for (const auto& p : pts) centroid = centroid + p;
  centroid = centroid * (1.0 / n);
  int a = 0;
  for (int i = 1; i < n; ++i)
    if ((pts[i] - centroid).squared_norm() > (pts[a] - centroid).squared_norm()) a = i;
  int b = a;
  for (int i = 0; i < n; ++i)
    if ((pts[i] - pts[a]).squared_norm() > (pts[b] - pts[a]).squared_norm()) b = i;
  if (b == a) throw InvalidInput("degenerate contour");
  if (b < a) b += n;

  PolygonApprox out;
  out.point_count = n;
  // explicit stack of [s, e) pieces; processed so segments come out in contour order
  std::vector<std::pair<int, int>> stack{{b, a + n}, {a, b}};
  while (!stack.empty()) {
    const auto [s, e] = stack.back();
    stack.pop_back();
    const Point2& ps = pts[s % n];
    const Point2& pe = pts[e % n];
    double dmax = -1;
    int imax = -1;
    for (int i = s + 1; i < e; ++i) {
      const double dist = point_segment_distance(pts[i % n], ps, pe);
      if (dist > dmax) {
        dmax = dist;
        imax = i;
      }
    }
    if (imax >= 0 && dmax > eps) {
      stack.push_back({imax, e});
      stack.push_back({s, imax});
      continue;
    }
    if (e - s >= 2 && max_color_deviation(contour, s, e) >= color_tol) {
      int best = s + 1;
      double best_cost = std::numeric_limits<double>::infinity();
      for (int m = s + 1; m < e; ++m) {
        const double cost = sse(s, m) + sse(m, e);
        if (cost < best_cost) {
          best_cost = cost;
          best = m;
        }
      }
      stack.push_back({best, e});
      stack.push_back({s, best});
      continue;
    }
    out.segments.push_back({s % n, s % n + (e - s), mean_color(contour, s, e)});
  }
  return out;
}

PointGrid::PointGrid(const std::vector<Point2>& points, double cell_size) : points_(points), cell_(cell_size) {
  if (points_.empty()) return;
  double max_x = points_[0].x, max_y = points_[0].y;
  min_x_ = max_x;
  min_y_ = max_y;
  for (const auto& p : points_) {
    min_x_ = std::min(min_x_, p.x);
    min_y_ = std::min(min_y_, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  cols_ = static_cast<int>((max_x - min_x_) / cell_) + 1;
  rows_ = static_cast<int>((max_y - min_y_) / cell_) + 1;
  cell_start_.assign(static_cast<std::size_t>(cols_) * rows_ + 1, 0);
  std::vector<int> cell_of(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const int cx = static_cast<int>((points_[i].x - min_x_) / cell_);
    const int cy = static_cast<int>((points_[i].y - min_y_) / cell_);
    cell_of[i] = cy * cols_ + cx;
    ++cell_start_[cell_of[i] + 1];
  }
  for (std::size_t c = 1; c < cell_start_.size(); ++c) cell_start_[c] += cell_start_[c - 1];
  entries_.resize(points_.size());
  std::vector<int> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < points_.size(); ++i) entries_[fill[cell_of[i]]++] = static_cast<int>(i);
}

int PointGrid::nearest(const Point2& q, double max_distance) const {
  if (points_.empty()) return -1;
  const int x0 = static_cast<int>(std::floor((q.x - max_distance - min_x_) / cell_));
  const int x1 = static_cast<int>(std::floor((q.x + max_distance - min_x_) / cell_));
  const int y0 = static_cast<int>(std::floor((q.y - max_distance - min_y_) / cell_));
  const int y1 = static_cast<int>(std::floor((q.y + max_distance - min_y_) / cell_));
  if (x1 < 0 || y1 < 0 || x0 >= cols_ || y0 >= rows_) return -1;
  int best = -1;
  double best_d2 = max_distance * max_distance;
  for (int cy = std::max(y0, 0); cy <= std::min(y1, rows_ - 1); ++cy)
    for (int cx = std::max(x0, 0); cx <= std::min(x1, cols_ - 1); ++cx) {
      const int cell = cy * cols_ + cx;
      for (int e = cell_start_[cell]; e < cell_start_[cell + 1]; ++e) {
        const int idx = entries_[e];
        const double d2 = (points_[idx] - q).squared_norm();
        if (d2 < best_d2 || (d2 == best_d2 && (best < 0 || idx < best))) {
          best_d2 = d2;
          best = idx;
        }
      }
    }
  return best;
}

}  // namespace jigsaw
