#include "jigsaw/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace jigsaw {

Image render_assembly(std::span<const Fragment> fragments, const Poses& poses, bool seams) {
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  for (std::size_t v = 0; v < fragments.size() && v < poses.size(); ++v) {
    if (!poses[v]) continue;
    const auto& r = fragments[v].raster();
    for (const Point2 c : {Point2{0, 0}, Point2{double(r.width), 0}, Point2{0, double(r.height)},
                           Point2{double(r.width), double(r.height)}}) {
      const Point2 p = poses[v]->apply(c);
      x0 = std::min(x0, p.x), y0 = std::min(y0, p.y), x1 = std::max(x1, p.x), y1 = std::max(y1, p.y);
    }
  }
  if (!(x1 > x0)) return {};
  const int ox = static_cast<int>(std::floor(x0)), oy = static_cast<int>(std::floor(y0));
  Image out(static_cast<int>(std::ceil(x1)) - ox, static_cast<int>(std::ceil(y1)) - oy);

  std::vector<RigidTransform2D> inv(fragments.size());
  for (std::size_t v = 0; v < fragments.size() && v < poses.size(); ++v)
    if (poses[v]) inv[v] = poses[v]->inverse();
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      const Point2 p{ox + x + 0.5, oy + y + 0.5};
      for (std::size_t v = 0; v < fragments.size() && v < poses.size(); ++v) {
        if (!poses[v]) continue;
        const Point2 q = inv[v].apply(p);
        const int qx = static_cast<int>(std::floor(q.x)), qy = static_cast<int>(std::floor(q.y));
        if (fragments[v].raster().opaque(qx, qy)) {
          out.at(x, y) = fragments[v].raster().at(qx, qy);
          break;
        }
      }
    }
  if (seams)
    for (std::size_t v = 0; v < fragments.size() && v < poses.size(); ++v) {
      if (!poses[v]) continue;
      for (const auto& c : fragments[v].contour().points) {
        const Point2 p = poses[v]->apply(c);
        const int x = static_cast<int>(std::floor(p.x)) - ox, y = static_cast<int>(std::floor(p.y)) - oy;
        if (out.contains(x, y)) out.at(x, y) = {0, 0, 0, 255};
      }
    }
  return out;
}

}  // namespace jigsaw
