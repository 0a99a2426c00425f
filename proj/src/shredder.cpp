#include "jigsaw/shredder.hpp"

#include <cmath>
#include <cstdint>
#include <deque>
#include <string>

#include "jigsaw/errors.hpp"
#include "jigsaw/random.hpp"

namespace jigsaw {
namespace {

constexpr double kKnotSpacing = 40.0;
constexpr int kMaxRetries = 50;

// A cut is the graph of a piecewise-linear function: y(x) for horizontal cuts,
// x(y) for vertical ones. That makes "which side" a single comparison.
struct Cut {
  bool horizontal = true;
  double first = 0;  // abscissa of knots[0]
  std::vector<double> knots;

  bool side(double x, double y) const {
    const double t = horizontal ? x : y;
    const double u = (t - first) / kKnotSpacing;
    const auto last = static_cast<double>(knots.size() - 1);
    const double uc = std::clamp(u, 0.0, last - 1e-9);
    const auto i = static_cast<std::size_t>(uc);
    const double f = uc - static_cast<double>(i);
    const double v = knots[i] * (1 - f) + knots[i + 1] * f;
    return (horizontal ? y : x) > v;
  }
};

Cut draw_cut(Rng& rng, int m, int total, int width, int height, const ShredParams& p) {
  Cut c;
  c.horizontal = m % 2 == 0;
  const int count = c.horizontal ? (total + 1) / 2 : total / 2;
  const int k = m / 2;
  const double across = c.horizontal ? height : width;
  const double along = c.horizontal ? width : height;
  const double spacing = across / (count + 1);
  const double pos = spacing * (k + 1) + rng.uniform(-0.3, 0.3) * spacing;
  const double slope = std::tan(rng.uniform(-p.orientation_jitter, p.orientation_jitter));
  c.first = -kKnotSpacing;
  for (double t = c.first; t <= along + 2 * kKnotSpacing; t += kKnotSpacing) {
    double v = pos + slope * (t - along / 2);
    if (p.perturbation_amplitude > 0) v += rng.uniform(-p.perturbation_amplitude, p.perturbation_amplitude);
    c.knots.push_back(v);
  }
  return c;
}

struct Labelling {
  std::vector<int> label;  // -1 for transparent source pixels
  std::vector<long> areas;
};

Labelling label_pieces(const Image& image, const std::vector<Cut>& cuts) {
  const int w = image.width, h = image.height;
  std::vector<std::uint64_t> code(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::uint64_t c = 0;
      for (std::size_t i = 0; i < cuts.size(); ++i)
        if (cuts[i].side(x + 0.5, y + 0.5)) c |= std::uint64_t{1} << i;
      code[static_cast<std::size_t>(y) * w + x] = c;
    }
  Labelling out;
  out.label.assign(code.size(), -1);
  std::deque<int> queue;
  for (int start = 0; start < w * h; ++start) {
    if (out.label[start] >= 0 || image.pixels[start].a == 0) continue;
    const int id = static_cast<int>(out.areas.size());
    out.areas.push_back(0);
    out.label[start] = id;
    queue.push_back(start);
    while (!queue.empty()) {
      const int cur = queue.front();
      queue.pop_front();
      ++out.areas[id];
      const int cx = cur % w, cy = cur / w;
      const int nb[4][2] = {{cx + 1, cy}, {cx - 1, cy}, {cx, cy + 1}, {cx, cy - 1}};
      for (const auto& n : nb) {
        if (!image.contains(n[0], n[1])) continue;
        const int idx = n[1] * w + n[0];
        if (out.label[idx] >= 0 || image.pixels[idx].a == 0 || code[idx] != code[cur]) continue;
        out.label[idx] = id;
        queue.push_back(idx);
      }
    }
  }
  return out;
}

bool all_large(const Labelling& l) {
  for (long a : l.areas)
    if (a < kMinFragmentArea) return false;
  return true;
}

PuzzleBundle build_bundle(const Image& image, const Labelling& lab, const ShredParams& params, std::uint64_t seed) {
  const int n = static_cast<int>(lab.areas.size());
  std::vector<int> x0(n, image.width), y0(n, image.height), x1(n, -1), y1(n, -1);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const int id = lab.label[static_cast<std::size_t>(y) * image.width + x];
      if (id < 0) continue;
      x0[id] = std::min(x0[id], x);
      y0[id] = std::min(y0[id], y);
      x1[id] = std::max(x1[id], x);
      y1[id] = std::max(y1[id], y);
    }
  std::vector<Image> rasters;
  for (int id = 0; id < n; ++id) rasters.emplace_back(x1[id] - x0[id] + 3, y1[id] - y0[id] + 3);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const int id = lab.label[static_cast<std::size_t>(y) * image.width + x];
      if (id >= 0) rasters[id].at(x - x0[id] + 1, y - y0[id] + 1) = image.at(x, y);
    }

  PuzzleBundle b;
  b.source_width = image.width;
  b.source_height = image.height;
  b.seed = seed;
  b.params = params;
  for (int id = 0; id < n; ++id) {
    b.fragments.emplace_back(id, std::move(rasters[id]));
    b.groundtruth.push_back(RigidTransform2D::translation(x0[id] - 1, y0[id] - 1));
  }
  return b;
}

}  // namespace

PuzzleBundle shred(const Image& image, const ShredParams& params, std::uint64_t seed) {
  if (image.empty() || image.opaque_count() == 0) throw InvalidInput("cannot shred an empty image");
  if (params.num_cuts < 1) throw ParameterError("num_cuts must be at least 1");
  if (params.num_cuts > 64) throw ParameterError("at most 64 cuts are supported");
  if (params.orientation_jitter < 0 || params.perturbation_amplitude < 0)
    throw ParameterError("shred parameters must be non-negative");

  Rng rng(seed);
  std::vector<Cut> cuts;
  Labelling lab;
  for (int m = 0; m < params.num_cuts; ++m) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxRetries && !placed; ++attempt) {
      cuts.push_back(draw_cut(rng, m, params.num_cuts, image.width, image.height, params));
      lab = label_pieces(image, cuts);
      placed = all_large(lab);
      if (!placed) cuts.pop_back();
    }
    if (!placed)
      throw ParameterError("cut " + std::to_string(m) + " leaves a fragment below " +
                           std::to_string(kMinFragmentArea) + " px after " + std::to_string(kMaxRetries) +
                           " retries");
  }
  return build_bundle(image, lab, params, seed);
}

PuzzleBundle shred_to_count(const Image& image, int pieces, const ShredParams& params, std::uint64_t seed) {
  if (pieces < 2) throw ParameterError("piece count must be at least 2");
  if (static_cast<long>(pieces) * kMinFragmentArea > image.opaque_count())
    throw ParameterError("image too small for " + std::to_string(pieces) + " pieces");
  ShredParams p = params;
  // c cuts split into ceil(c/2) horizontal and floor(c/2) vertical give at most
  // (ceil(c/2)+1)(floor(c/2)+1) pieces when same-direction cuts do not cross.
  int first = 1;
  while (((first + 1) / 2 + 1) * (first / 2 + 1) < pieces) ++first;
  for (int cuts = first; cuts <= 64; ++cuts) {
    p.num_cuts = cuts;
    bool undershoot = false;
    for (int attempt = 0; attempt < 20; ++attempt) {
      try {
        PuzzleBundle b = shred(image, p, derive_seed(seed, static_cast<std::uint64_t>(cuts * 1000 + attempt)));
        if (static_cast<int>(b.size()) == pieces) {
          b.seed = seed;
          return b;
        }
        undershoot = undershoot || static_cast<int>(b.size()) < pieces;
      } catch (const ParameterError&) {
      }
    }
    if (!undershoot && cuts > first) break;
  }
  throw ParameterError("could not reach " + std::to_string(pieces) + " pieces");
}

CoverageReport check_coverage(const PuzzleBundle& bundle, const Image& source) {
  std::vector<int> hits(source.pixels.size(), 0);
  CoverageReport r;
  for (std::size_t id = 0; id < bundle.size(); ++id) {
    const Image& ras = bundle.fragments[id].raster();
    for (int y = 0; y < ras.height; ++y)
      for (int x = 0; x < ras.width; ++x) {
        if (ras.at(x, y).a == 0) continue;
        const Point2 s = bundle.groundtruth[id].apply({x + 0.5, y + 0.5});
        const int sx = static_cast<int>(std::floor(s.x)), sy = static_cast<int>(std::floor(s.y));
        if (!source.contains(sx, sy)) {
          ++r.color_mismatches;
          continue;
        }
        ++hits[static_cast<std::size_t>(sy) * source.width + sx];
        if (!(source.at(sx, sy) == ras.at(x, y))) ++r.color_mismatches;
      }
  }
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (source.pixels[i].a == 0) continue;
    if (hits[i] == 0) ++r.uncovered;
    if (hits[i] > 1) ++r.multiply_covered;
  }
  return r;
}

}  // namespace jigsaw
