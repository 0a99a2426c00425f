#include "jigsaw/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "jigsaw/errors.hpp"

namespace jigsaw {

std::vector<int> largest_component(int vertex_count, const std::vector<AlignmentCandidate>& selected) {
  std::vector<std::vector<int>> adj(vertex_count);
  for (const auto& c : selected) {
    adj[c.i].push_back(c.j);
    adj[c.j].push_back(c.i);
  }
  std::vector<char> seen(vertex_count, 0);
  std::vector<int> best;
  for (int s = 0; s < vertex_count; ++s) {
    if (seen[s]) continue;
    std::vector<int> comp{s};
    seen[s] = 1;
    for (std::size_t k = 0; k < comp.size(); ++k)
      for (int v : adj[comp[k]])
        if (!seen[v]) {
          seen[v] = 1;
          comp.push_back(v);
        }
    if (comp.size() > best.size()) best = comp;
  }
  std::sort(best.begin(), best.end());
  return best;
}

EvalReport score_assembly(const std::vector<RigidTransform2D>& truth, const std::vector<Point2>& pivots,
                          const Poses& result, const std::vector<AlignmentCandidate>& selected,
                          const MetricThresholds& th) {
  const int n = static_cast<int>(truth.size());
  if (static_cast<int>(result.size()) != n || static_cast<int>(pivots.size()) != n)
    throw InvalidInput("result and groundtruth cover different fragment ids");
  for (const auto& c : selected)
    if (c.i < 0 || c.j < 0 || c.i >= n || c.j >= n) throw InvalidInput("selected edge refers to an unknown fragment");

  EvalReport r;
  if (n == 0) return r;
  const auto comp = largest_component(n, selected);
  r.lcr = static_cast<double>(comp.size()) / n;

  auto errors_under = [&](const RigidTransform2D& gauge) {
    std::vector<PoseError> errs(n);
    for (int v = 0; v < n; ++v) {
      if (!result[v]) {
        errs[v] = {180.0, std::numeric_limits<double>::infinity(), false};
        continue;
      }
      const auto d = pose_difference(gauge * *result[v], truth[v], pivots[v]);
      errs[v] = {rad_to_deg(d.angle), d.distance, d.angle <= th.pcr_angle && d.distance <= th.pcr_distance};
    }
    return errs;
  };
  double best_median = std::numeric_limits<double>::infinity();
  for (int v : comp) {
    if (!result[v]) continue;
    const auto errs = errors_under(truth[v] * result[v]->inverse());
    std::vector<double> d;
    for (int u : comp) d.push_back(errs[u].distance_px);
    std::nth_element(d.begin(), d.begin() + static_cast<long>(d.size() / 2), d.end());
    if (d[d.size() / 2] < best_median) {
      best_median = d[d.size() / 2];
      r.errors = errs;
      r.gauge_fragment = v;
    }
  }
  if (r.errors.empty()) r.errors = errors_under(RigidTransform2D::identity());
  r.pcr = static_cast<double>(std::count_if(r.errors.begin(), r.errors.end(), [](const PoseError& e) {
            return e.correct;
          })) / n;

  if (!selected.empty()) {
    int good = 0;
    for (const auto& c : selected) {
      const auto d = pose_difference(c.transform, truth[c.i].inverse() * truth[c.j], pivots[c.j]);
      good += d.angle <= th.acr_angle && d.distance <= th.acr_distance;
    }
    r.acr = static_cast<double>(good) / selected.size();
  }
  return r;
}

EvalReport score_assembly(const PuzzleBundle& bundle, const Poses& result,
                          const std::vector<AlignmentCandidate>& selected, const MetricThresholds& th) {
  std::vector<Point2> pivots;
  for (const auto& f : bundle.fragments) pivots.push_back(f.centroid());
  return score_assembly(bundle.groundtruth, pivots, result, selected, th);
}

DetectorStats score_detector(const PuzzleBundle& bundle, const std::vector<AlignmentCandidate>& candidates,
                             double threshold) {
  DetectorStats s;
  for (const auto& c : candidates) {
    const bool positive = c.gamma >= threshold;
    const bool truth = matches_groundtruth(bundle, c.i, c.j, c.transform);
    if (positive && truth) ++s.tp;
    else if (positive) ++s.fp;
    else if (truth) ++s.fn;
    else ++s.tn;
  }
  s.precision = s.tp + s.fp > 0 ? static_cast<double>(s.tp) / (s.tp + s.fp) : 0.0;
  s.recall = s.tp + s.fn > 0 ? static_cast<double>(s.tp) / (s.tp + s.fn) : 0.0;
  return s;
}

std::vector<PrPoint> pr_curve(const PuzzleBundle& bundle, const std::vector<AlignmentCandidate>& candidates,
                              const std::vector<double>& thresholds) {
  std::vector<PrPoint> out;
  for (double t : thresholds) {
    const auto s = score_detector(bundle, candidates, t);
    out.push_back({t, s.precision, s.recall});
  }
  return out;
}

std::vector<std::pair<int, int>> groundtruth_adjacency(const PuzzleBundle& bundle, int min_shared) {
  // crack points sit on half-integer coordinates, so doubling makes them exact keys
  std::vector<std::set<std::pair<long, long>>> pts(bundle.size());
  for (std::size_t i = 0; i < bundle.size(); ++i)
    for (const auto& p : bundle.fragments[i].contour().points) {
      const Point2 q = bundle.groundtruth[i].apply(p);
      pts[i].insert({std::lround(2 * q.x), std::lround(2 * q.y)});
    }
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < bundle.size(); ++i)
    for (std::size_t j = i + 1; j < bundle.size(); ++j) {
      int shared = 0;
      for (const auto& p : pts[j]) shared += static_cast<int>(pts[i].count(p));
      if (shared >= min_shared) out.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  return out;
}

}  // namespace jigsaw
