#include "jigsaw/raster.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace jigsaw {
namespace {

struct Box {
  long x0, y0, x1, y1;  // canvas pixels, inclusive
  bool empty() const { return x1 < x0 || y1 < y0; }
};

Box canvas_box(const Placement& p, double scale) {
  const Image& r = p.fragment->raster();
  double lo_x = 1e300, lo_y = 1e300, hi_x = -1e300, hi_y = -1e300;
  for (const Point2 corner : {Point2{0, 0}, Point2{double(r.width), 0}, Point2{0, double(r.height)},
                              Point2{double(r.width), double(r.height)}}) {
    const Point2 w = p.pose.apply(corner);
    lo_x = std::min(lo_x, w.x);
    lo_y = std::min(lo_y, w.y);
    hi_x = std::max(hi_x, w.x);
    hi_y = std::max(hi_y, w.y);
  }
  return {static_cast<long>(std::floor(lo_x * scale)), static_cast<long>(std::floor(lo_y * scale)),
          static_cast<long>(std::floor(hi_x * scale)), static_cast<long>(std::floor(hi_y * scale))};
}

Box intersect(const Box& a, const Box& b) {
  return {std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1), std::min(a.y1, b.y1)};
}

// Calls fn(u, v) for every canvas pixel in `box` whose sample point falls on an
// opaque pixel of the placed fragment. The sample is the first source-pixel centre
// inside the canvas cell; cell centres would sit on pixel corners at scale 0.5 and
// turn sub-pixel pose noise into a seam-long overlap.
template <typename Fn>
void for_each_covered(const Placement& p, const Box& box, double scale, Fn&& fn) {
  const RigidTransform2D inv = p.pose.inverse();
  const Fragment& f = *p.fragment;
  for (long v = box.y0; v <= box.y1; ++v) {
    const double wy = v / scale + 0.5;
    for (long u = box.x0; u <= box.x1; ++u) {
      const Point2 local = inv.apply({u / scale + 0.5, wy});
      if (f.opaque_at(local)) fn(u, v);
    }
  }
}

bool discs_apart(const Placement& a, const Placement& b) {
  const Point2 ca = a.pose.apply(a.fragment->centroid());
  const Point2 cb = b.pose.apply(b.fragment->centroid());
  return (ca - cb).norm() > a.fragment->radius() + b.fragment->radius() + 2.0;
}

}  // namespace

long rasterize_and_overlap(std::span<const Placement> placements, double canvas_scale) {
  if (placements.size() < 2) return 0;
  std::vector<Box> boxes;
  Box all = canvas_box(placements[0], canvas_scale);
  for (const auto& p : placements) {
    boxes.push_back(canvas_box(p, canvas_scale));
    all = {std::min(all.x0, boxes.back().x0), std::min(all.y0, boxes.back().y0), std::max(all.x1, boxes.back().x1),
           std::max(all.y1, boxes.back().y1)};
  }
  const long w = all.x1 - all.x0 + 1, h = all.y1 - all.y0 + 1;
  long overlap = 0;
  if (w * h <= (1L << 26)) {
    std::vector<std::uint8_t> count(static_cast<std::size_t>(w * h), 0);
    for (std::size_t i = 0; i < placements.size(); ++i)
      for_each_covered(placements[i], boxes[i], canvas_scale, [&](long u, long v) {
        auto& c = count[static_cast<std::size_t>((v - all.y0) * w + (u - all.x0))];
        if (c == 1) ++overlap;
        if (c < 2) ++c;
      });
  } else {
    std::unordered_map<long long, std::uint8_t> count;
    for (std::size_t i = 0; i < placements.size(); ++i)
      for_each_covered(placements[i], boxes[i], canvas_scale, [&](long u, long v) {
        auto& c = count[(static_cast<long long>(v) << 32) ^ static_cast<long long>(u & 0xffffffffL)];
        if (c == 1) ++overlap;
        if (c < 2) ++c;
      });
  }
  return overlap;
}

double pair_overlap_area(const Placement& a, const Placement& b, double canvas_scale) {
  if (discs_apart(a, b)) return 0.0;
  const Box box = intersect(canvas_box(a, canvas_scale), canvas_box(b, canvas_scale));
  if (box.empty()) return 0.0;
  const long w = box.x1 - box.x0 + 1;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(w * (box.y1 - box.y0 + 1)), 0);
  for_each_covered(a, box, canvas_scale, [&](long u, long v) { mask[(v - box.y0) * w + (u - box.x0)] = 1; });
  long n = 0;
  for_each_covered(b, box, canvas_scale, [&](long u, long v) { n += mask[(v - box.y0) * w + (u - box.x0)]; });
  return static_cast<double>(n) / (canvas_scale * canvas_scale);
}

double seam_tolerance(long area_a, long area_b) {
  return std::max(0.002 * static_cast<double>(std::min(area_a, area_b)), 30.0);
}

double assembly_tolerance(long area_a, long area_b) {
  return std::max(seam_tolerance(area_a, area_b), 0.02 * static_cast<double>(std::min(area_a, area_b)));
}

bool pair_intersects(const Placement& a, const Placement& b, double canvas_scale) {
  return pair_overlap_area(a, b, canvas_scale) > seam_tolerance(a.fragment->area(), b.fragment->area());
}

bool group_intersects(std::span<const Placement> fixed, std::span<const Placement> added, double canvas_scale) {
  for (std::size_t i = 0; i < added.size(); ++i) {
    for (const auto& f : fixed)
      if (pair_intersects(added[i], f, canvas_scale)) return true;
    for (std::size_t j = i + 1; j < added.size(); ++j)
      if (pair_intersects(added[i], added[j], canvas_scale)) return true;
  }
  return false;
}

}  // namespace jigsaw
