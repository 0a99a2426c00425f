#include <algorithm>
#include <cmath>

#include "jigsaw/compatibility.hpp"
#include "jigsaw/errors.hpp"

namespace jigsaw {
namespace {

constexpr int kNear = 3;    // canvas px: masks this close form the seam
constexpr int kRoiPad = 8;  // canvas px
constexpr double kContactDistance = 3.0;

// Chebyshev dilation of a binary grid by r: a box filter done as two 1-D passes
// over prefix counts.
std::vector<std::uint8_t> dilate(const std::vector<std::uint8_t>& m, int w, int h, int r) {
  std::vector<std::uint8_t> tmp(m.size(), 0), out(m.size(), 0);
  std::vector<int> pre(static_cast<std::size_t>(std::max(w, h)) + 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) pre[x + 1] = pre[x] + m[y * w + x];
    for (int x = 0; x < w; ++x) tmp[y * w + x] = pre[std::min(w, x + r + 1)] - pre[std::max(0, x - r)] > 0;
  }
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) pre[y + 1] = pre[y] + tmp[y * w + x];
    for (int y = 0; y < h; ++y) out[y * w + x] = pre[std::min(h, y + r + 1)] - pre[std::max(0, y - r)] > 0;
  }
  return out;
}

void contact_stats(const Fragment& a, const Fragment& b, const RigidTransform2D& t, StitchSample& s) {
  const RigidTransform2D inv = t.inverse();
  int contact = 0;
  double opposition = 0;
  for (std::size_t i = 0; i < a.contour().size(); ++i) {
    const int jb = b.contour_grid().nearest(inv.apply(a.contour().points[i]), kContactDistance);
    if (jb < 0) continue;
    ++contact;
    opposition -= a.normals()[i].dot(t.rotate(b.normals()[jb]));
  }
  int contact_b = 0;
  for (const auto& p : b.contour().points)
    if (a.contour_grid().nearest(t.apply(p), kContactDistance) >= 0) ++contact_b;
  s.contact_a = contact / a.perimeter();
  s.contact_b = contact_b / b.perimeter();
  s.normal_opposition = contact > 0 ? opposition / contact : -1.0;
}

double color_gap(const Rgba& x, const Rgba& y) { return color_distance(to_color(x), to_color(y)); }

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0;
  const auto k = static_cast<std::size_t>(q * (v.size() - 1));
  std::nth_element(v.begin(), v.begin() + static_cast<long>(k), v.end());
  return v[k];
}

}  // namespace

StitchSample stitch_render(const Fragment& a, const Fragment& b, const RigidTransform2D& t) {
  if (!t.is_finite()) throw InvalidInput("stitch transform is not finite");
  const Point2 cb = t.apply(b.centroid());
  if ((cb - a.centroid()).norm() > a.radius() + b.radius() + 2 * kNear)
    throw NoSeam("fragments are disjoint under the transform");

  double x0 = 0, y0 = 0, x1 = a.raster().width, y1 = a.raster().height;
  const double bw = b.raster().width, bh = b.raster().height;
  for (const Point2 c : {Point2{0, 0}, Point2{bw, 0}, Point2{0, bh}, Point2{bw, bh}}) {
    const Point2 p = t.apply(c);
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  StitchSample s;
  s.scale = kStitchCanvas / std::max(x1 - x0, y1 - y0);
  const int w = std::max(1, static_cast<int>(std::ceil((x1 - x0) * s.scale)));
  const int h = std::max(1, static_cast<int>(std::ceil((y1 - y0) * s.scale)));
  s.image = Image(w, h);
  s.layer_a = Image(w, h);
  s.layer_b = Image(w, h);
  const RigidTransform2D inv = t.inverse();
  std::vector<std::uint8_t> ma(static_cast<std::size_t>(w) * h, 0), mb(ma.size(), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Point2 p{x0 + (x + 0.5) / s.scale, y0 + (y + 0.5) / s.scale};
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (a.opaque_at(p)) {
        s.layer_a.pixels[idx] = a.raster().at(static_cast<int>(std::floor(p.x)), static_cast<int>(std::floor(p.y)));
        ma[idx] = 1;
      }
      const Point2 q = inv.apply(p);
      if (b.opaque_at(q)) {
        s.layer_b.pixels[idx] = b.raster().at(static_cast<int>(std::floor(q.x)), static_cast<int>(std::floor(q.y)));
        mb[idx] = 1;
      }
      const Rgba& pa = s.layer_a.pixels[idx];
      const Rgba& pb = s.layer_b.pixels[idx];
      if (ma[idx] && mb[idx])
        s.image.pixels[idx] = {static_cast<std::uint8_t>((pa.r + pb.r) / 2), static_cast<std::uint8_t>((pa.g + pb.g) / 2),
                               static_cast<std::uint8_t>((pa.b + pb.b) / 2), 255};
      else
        s.image.pixels[idx] = ma[idx] ? pa : pb;
    }

  const auto da = dilate(ma, w, h, kNear), db = dilate(mb, w, h, kNear);
  int rx0 = w, ry0 = h, rx1 = -1, ry1 = -1;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if ((ma[idx] && db[idx]) || (mb[idx] && da[idx])) {
        rx0 = std::min(rx0, x);
        ry0 = std::min(ry0, y);
        rx1 = std::max(rx1, x);
        ry1 = std::max(ry1, y);
      }
    }
  if (rx1 < 0) throw NoSeam("no seam between the fragments");
  rx0 = std::max(0, rx0 - kRoiPad);
  ry0 = std::max(0, ry0 - kRoiPad);
  rx1 = std::min(w - 1, rx1 + kRoiPad);
  ry1 = std::min(h - 1, ry1 + kRoiPad);
  s.roi = {double(rx0), double(ry0), double(rx1 - rx0 + 1), double(ry1 - ry0 + 1)};
  contact_stats(a, b, t, s);
  return s;
}

std::vector<std::string> feature_names() {
  return {"gap_fraction",      "overlap_fraction", "color_diff_mean",  "color_diff_median", "color_diff_p90",
          "window_mean_diff",  "gradient_break",   "texture_level",    "normalized_diff",   "contact_min",
          "contact_max",       "normal_opposition", "pair_coverage"};
}

FeatureVector extract_roi_features(const StitchSample& s) {
  const int W = s.image.width;
  const int x0 = static_cast<int>(s.roi.x), y0 = static_cast<int>(s.roi.y);
  const int w = static_cast<int>(s.roi.w), h = static_cast<int>(s.roi.h);
  std::vector<std::uint8_t> ma(static_cast<std::size_t>(w) * h), mb(ma.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      ma[y * w + x] = s.layer_a.pixels[static_cast<std::size_t>(y + y0) * W + x + x0].a != 0;
      mb[y * w + x] = s.layer_b.pixels[static_cast<std::size_t>(y + y0) * W + x + x0].a != 0;
    }
  const auto da = dilate(ma, w, h, kNear), db = dilate(mb, w, h, kNear);
  auto A = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && ma[y * w + x] && !mb[y * w + x]; };
  auto B = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && mb[y * w + x] && !ma[y * w + x]; };
  auto ca = [&](int x, int y) -> const Rgba& { return s.layer_a.pixels[static_cast<std::size_t>(y + y0) * W + x + x0]; };
  auto cb = [&](int x, int y) -> const Rgba& { return s.layer_b.pixels[static_cast<std::size_t>(y + y0) * W + x + x0]; };

  long band = 0, gap = 0, both = 0, a_edge = 0;
  double sum_a[3] = {0, 0, 0}, sum_b[3] = {0, 0, 0};
  long n_a = 0, n_b = 0;
  std::vector<double> diffs;
  double grad_err = 0, texture = 0;
  long grad_n = 0, tex_n = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (!(da[idx] && db[idx])) continue;
      ++band;
      if (!ma[idx] && !mb[idx]) ++gap;
      if (ma[idx] && mb[idx]) ++both;
      if (A(x, y)) {
        const Rgba& c = ca(x, y);
        sum_a[0] += c.r, sum_a[1] += c.g, sum_a[2] += c.b;
        ++n_a;
      }
      if (B(x, y)) {
        const Rgba& c = cb(x, y);
        sum_b[0] += c.r, sum_b[1] += c.g, sum_b[2] += c.b;
        ++n_b;
      }
      if (!A(x, y)) continue;
      if (A(x + 1, y) && A(x - 1, y) && A(x, y + 1) && A(x, y - 1)) continue;
      ++a_edge;
      // nearest b-only pixel in growing square rings
      int bx = 0, by = 0;
      bool found = false;
      for (int r = 1; r <= kNear && !found; ++r)
        for (int dy = -r; dy <= r && !found; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            if (std::max(std::abs(dx), std::abs(dy)) != r || !B(x + dx, y + dy)) continue;
            bx = dx, by = dy;
            found = true;
            break;
          }
      if (!found) continue;
      const int sx = (bx > 0) - (bx < 0), sy = (by > 0) - (by < 0);
      const Rgba& pa = ca(x, y);
      const Rgba& pb = cb(x + bx, y + by);
      diffs.push_back(color_gap(pa, pb));
      if (A(x - sx, y - sy)) {
        const Rgba& pa2 = ca(x - sx, y - sy);
        const Color3 pred{2.0 * pa.r - pa2.r, 2.0 * pa.g - pa2.g, 2.0 * pa.b - pa2.b};
        grad_err += color_distance(pred, to_color(pb));
        ++grad_n;
        texture += color_gap(pa, pa2);
        ++tex_n;
      }
      if (B(x + bx + sx, y + by + sy)) {
        const Rgba& pb2 = cb(x + bx + sx, y + by + sy);
        const Color3 pred{2.0 * pb.r - pb2.r, 2.0 * pb.g - pb2.g, 2.0 * pb.b - pb2.b};
        grad_err += color_distance(pred, to_color(pa));
        ++grad_n;
        texture += color_gap(pb, pb2);
        ++tex_n;
      }
    }

  const double band_d = std::max<long>(band, 1);
  double mean_diff = 0;
  for (double d : diffs) mean_diff += d;
  mean_diff = diffs.empty() ? 255.0 : mean_diff / diffs.size();
  double window = 255.0;
  if (n_a > 0 && n_b > 0) {
    const Color3 ma3{sum_a[0] / n_a, sum_a[1] / n_a, sum_a[2] / n_a};
    const Color3 mb3{sum_b[0] / n_b, sum_b[1] / n_b, sum_b[2] / n_b};
    window = color_distance(ma3, mb3);
  }
  const double tex = tex_n > 0 ? texture / tex_n : 0.0;
  return {gap / band_d,
          both / band_d,
          mean_diff,
          diffs.empty() ? 255.0 : quantile(diffs, 0.5),
          diffs.empty() ? 255.0 : quantile(diffs, 0.9),
          window,
          grad_n > 0 ? grad_err / grad_n : 255.0,
          tex,
          mean_diff / (tex + 4.0),
          std::min(s.contact_a, s.contact_b),
          std::max(s.contact_a, s.contact_b),
          s.normal_opposition,
          a_edge > 0 ? static_cast<double>(diffs.size()) / a_edge : 0.0};
}

}  // namespace jigsaw
