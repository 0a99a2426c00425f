#include "jigsaw/pairwise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jigsaw/errors.hpp"
#include "jigsaw/parallel.hpp"
#include "jigsaw/raster.hpp"

namespace jigsaw {
namespace {

constexpr double kFineRadius = 2.0;

struct Seed {
  RigidTransform2D t;
  double quick = 0;
};

bool near_duplicate(const RigidTransform2D& x, const RigidTransform2D& y, const Point2& pivot, double angle,
                    double distance) {
  const auto d = pose_difference(x, y, pivot);
  return d.angle <= angle && d.distance <= distance;
}

// Cheap overlap proxy used to rank coarse seeds before ICP.
double quick_score(const Fragment& a, const Fragment& b, const RigidTransform2D& t, double tol) {
  const auto& pts = b.contour().points;
  int n = 0;
  for (std::size_t i = 0; i < pts.size(); i += 3)
    if (a.contour_grid().nearest(t.apply(pts[i]), tol) >= 0) ++n;
  return n;
}

// Closest point to q on the two contour edges incident to point ia.
Point2 closest_on_contour(const std::vector<Point2>& pts, int ia, const Point2& q) {
  const int n = static_cast<int>(pts.size());
  const Point2& p = pts[ia];
  Point2 best = p;
  double best_d = (q - p).squared_norm();
  for (const int nb : {(ia + n - 1) % n, (ia + 1) % n}) {
    const Point2 e = pts[nb] - p;
    const double t = std::clamp((q - p).dot(e) / e.squared_norm(), 0.0, 1.0);
    const Point2 c = p + e * t;
    const double d = (q - c).squared_norm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

struct Bounds {
  double x0, y0, x1, y1;
  bool contains(const Point2& p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
};

Bounds contour_bounds(const Contour& c, double pad) {
  Bounds b{1e300, 1e300, -1e300, -1e300};
  for (const auto& p : c.points) {
    b.x0 = std::min(b.x0, p.x);
    b.y0 = std::min(b.y0, p.y);
    b.x1 = std::max(b.x1, p.x);
    b.y1 = std::max(b.y1, p.y);
  }
  return {b.x0 - pad, b.y0 - pad, b.x1 + pad, b.y1 + pad};
}

}  // namespace

std::vector<RigidTransform2D> match_segments(const Fragment& a, const Fragment& b, const PairwiseConfig& cfg) {
  std::vector<RigidTransform2D> out;
  const auto& pa = a.polygon();
  const auto& pb = b.polygon();
  for (const auto& sa : pa.segments) {
    const Point2 a0 = pa.chord_start(a.contour(), sa), a1 = pa.chord_end(a.contour(), sa);
    const double la = (a1 - a0).norm();
    if (la < cfg.min_segment_length) continue;
    for (const auto& sb : pb.segments) {
      const Point2 b0 = pb.chord_start(b.contour(), sb), b1 = pb.chord_end(b.contour(), sb);
      const double lb = (b1 - b0).norm();
      if (lb < cfg.min_segment_length) continue;
      if (std::abs(la - lb) / std::max(la, lb) >= cfg.length_ratio_tol) continue;
      if (color_distance(sa.mean, sb.mean) >= cfg.segment_color_tol) continue;
      // b runs b1 -> b0 along the seam while a runs a0 -> a1.
      const Point2 da = a1 - a0, db = b0 - b1;
      const double theta = std::atan2(db.cross(da), db.dot(da));
      const RigidTransform2D rot = RigidTransform2D::rotation(theta);
      const Point2 t = (a0 + a1) * 0.5 - rot.apply((b0 + b1) * 0.5);
      out.emplace_back(theta, t.x, t.y);
    }
  }
  return out;
}

IcpResult icp_refine(const Fragment& a, const Fragment& b, const RigidTransform2D& init, const PairwiseConfig& cfg) {
  if (!init.is_finite()) throw InvalidInput("icp initial transform is not finite");
  const auto& bp = b.contour().points;
  const auto& ap = a.contour().points;
  const Bounds box = contour_bounds(a.contour(), cfg.icp_max_distance);

  IcpResult res;
  res.transform = init;
  double prev = std::numeric_limits<double>::infinity();
  std::vector<Point2> src, dst;
  // Once converged at the full radius, tighten it so far-off pairs near the ends of
  // the seam stop pulling the estimate.
  double radius = cfg.icp_max_distance;
  for (int it = 0; it < cfg.icp_max_iterations; ++it) {
    const RigidTransform2D inv = res.transform.inverse();
    src.clear();
    dst.clear();
    for (std::size_t jb = 0; jb < bp.size(); ++jb) {
      const Point2 q = res.transform.apply(bp[jb]);
      if (!box.contains(q)) continue;
      const int ia = a.contour_grid().nearest(q, radius);
      if (ia < 0) continue;
      if (b.contour_grid().nearest(inv.apply(ap[ia]), radius) != static_cast<int>(jb)) continue;
      src.push_back(q);
      dst.push_back(closest_on_contour(ap, ia, q));
    }
    if (static_cast<int>(src.size()) < cfg.icp_min_correspondences) {
      if (it == 0) throw NoOverlap("too few contour correspondences");
      if (radius <= kFineRadius) break;
      radius = kFineRadius;
      prev = std::numeric_limits<double>::infinity();
      continue;
    }
    Point2 cs, cd;
    for (std::size_t k = 0; k < src.size(); ++k) {
      cs = cs + src[k];
      cd = cd + dst[k];
    }
    cs = cs * (1.0 / src.size());
    cd = cd * (1.0 / src.size());
    double sc = 0, sd = 0;
    for (std::size_t k = 0; k < src.size(); ++k) {
      const Point2 u = src[k] - cs, v = dst[k] - cd;
      sc += u.cross(v);
      sd += u.dot(v);
    }
    const RigidTransform2D rot = RigidTransform2D::rotation(std::atan2(sc, sd));
    const Point2 shift = cd - rot.apply(cs);
    const RigidTransform2D delta(rot.theta(), shift.x, shift.y);
    double sq = 0;
    for (std::size_t k = 0; k < src.size(); ++k) sq += (delta.apply(src[k]) - dst[k]).squared_norm();
    const double rms = std::sqrt(sq / src.size());

    res.transform = delta * res.transform;
    res.rms = rms;
    res.iterations = it + 1;
    res.correspondences = static_cast<int>(src.size());
    if (prev - rms < cfg.icp_min_improvement) {
      if (radius <= kFineRadius) break;
      radius = kFineRadius;
      prev = std::numeric_limits<double>::infinity();
      continue;
    }
    prev = rms;
  }
  return res;
}

PixelScore matched_pixel_score(const Fragment& a, const Fragment& b, const RigidTransform2D& t,
                               const PairwiseConfig& cfg) {
  if (!t.is_finite()) throw InvalidInput("score transform is not finite");
  const RigidTransform2D inv = t.inverse();
  const auto& ac = a.contour();
  const auto& bc = b.contour();
  PixelScore s;
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (std::size_t ia = 0; ia < ac.size(); ++ia) {
    const int jb = b.contour_grid().nearest(inv.apply(ac.points[ia]), cfg.score_distance);
    if (jb < 0) continue;
    if (color_distance(ac.colors[ia], bc.colors[jb]) >= cfg.score_color_tol) continue;
    if (a.normals()[ia].dot(t.rotate(b.normals()[jb])) >= cfg.score_normal_dot) continue;
    s.score += 1;
    const Point2& p = ac.points[ia];
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  if (s.score > 0) s.roi = {x0, y0, std::max(x1 - x0, 1.0), std::max(y1 - y0, 1.0)};
  return s;
}

std::vector<AlignmentCandidate> extract_pair(const Fragment& a, const Fragment& b, const PairwiseConfig& cfg) {
  const Point2 pivot = b.centroid();
  std::vector<Seed> seeds;
  for (const auto& t : match_segments(a, b, cfg)) seeds.push_back({t, quick_score(a, b, t, cfg.score_distance)});
  std::stable_sort(seeds.begin(), seeds.end(), [](const Seed& x, const Seed& y) { return x.quick > y.quick; });
  std::vector<Seed> kept;
  for (const auto& s : seeds) {
    if (static_cast<int>(kept.size()) >= cfg.max_seeds) break;
    bool dup = false;
    for (const auto& k : kept) dup = dup || near_duplicate(s.t, k.t, pivot, deg_to_rad(0.5), 1.0);
    if (!dup) kept.push_back(s);
  }

  std::vector<AlignmentCandidate> found;
  for (const auto& s : kept) {
    IcpResult icp;
    try {
      icp = icp_refine(a, b, s.t, cfg);
    } catch (const NoOverlap&) {
      continue;
    }
    const PixelScore ps = matched_pixel_score(a, b, icp.transform, cfg);
    if (ps.score < cfg.min_raw_score) continue;
    if (pair_intersects({&a, RigidTransform2D::identity()}, {&b, icp.transform})) continue;
    AlignmentCandidate c;
    c.i = a.id();
    c.j = b.id();
    c.transform = icp.transform;
    c.raw_score = ps.score;
    c.roi = ps.roi;
    found.push_back(c);
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const AlignmentCandidate& x, const AlignmentCandidate& y) { return x.raw_score > y.raw_score; });
  std::vector<AlignmentCandidate> out;
  for (const auto& c : found) {
    if (static_cast<int>(out.size()) >= cfg.k_max) break;
    bool dup = false;
    for (const auto& o : out)
      dup = dup || near_duplicate(c.transform, o.transform, pivot, cfg.dedup_angle, cfg.dedup_distance);
    if (dup) continue;
    out.push_back(c);
    out.back().k = static_cast<int>(out.size()) - 1;
  }
  return out;
}

std::vector<AlignmentCandidate> extract_candidates(const PuzzleBundle& bundle, const PairwiseConfig& cfg) {
  std::vector<std::pair<int, int>> pairs;
  const int n = static_cast<int>(bundle.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::vector<std::vector<AlignmentCandidate>> per_pair(pairs.size());
  parallel_for(pairs.size(), cfg.workers, [&](std::size_t p) {
    per_pair[p] = extract_pair(bundle.fragments[pairs[p].first], bundle.fragments[pairs[p].second], cfg);
  });
  std::vector<AlignmentCandidate> out;
  for (auto& v : per_pair) out.insert(out.end(), v.begin(), v.end());
  return out;
}

bool matches_groundtruth(const PuzzleBundle& bundle, int i, int j, const RigidTransform2D& t, double angle_tol,
                         double distance_tol) {
  const auto d = pose_difference(t, bundle.relative_pose(i, j), bundle.fragments[j].centroid());
  return d.angle <= angle_tol && d.distance <= distance_tol;
}

}  // namespace jigsaw
