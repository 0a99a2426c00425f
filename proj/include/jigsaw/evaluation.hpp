#pragma once

#include <utility>
#include <vector>

#include "jigsaw/composition.hpp"

namespace jigsaw {

struct PoseError {
  double angle_deg = 0;
  double distance_px = 0;
  bool correct = false;
};

struct DetectorStats {
  long tp = 0, tn = 0, fp = 0, fn = 0;
  double precision = 0;  // 0 when nothing is predicted positive
  double recall = 0;     // 0 when there are no positives
};

struct EvalReport {
  double pcr = 0, acr = 0, lcr = 0;
  std::vector<PoseError> errors;  // per fragment, after gauge alignment
  int gauge_fragment = -1;        // fragment whose pose fixed the gauge
  bool has_detector = false;
  DetectorStats detector;
  double wall_time = 0;  // seconds
};

struct MetricThresholds {
  double pcr_angle = deg_to_rad(5.0);
  double pcr_distance = 100.0;
  double acr_angle = deg_to_rad(5.0);
  double acr_distance = 10.0;
};

// Result poses are brought into the groundtruth frame by the candidate rigid motion
// (one per fragment of the largest selected component) with the smallest median
// centroid error. Fragments without a pose count as incorrect.
EvalReport score_assembly(const std::vector<RigidTransform2D>& truth, const std::vector<Point2>& pivots,
                          const Poses& result, const std::vector<AlignmentCandidate>& selected,
                          const MetricThresholds& th = {});
EvalReport score_assembly(const PuzzleBundle& bundle, const Poses& result,
                          const std::vector<AlignmentCandidate>& selected, const MetricThresholds& th = {});

// gamma >= threshold counts as positive; truth is the 5 deg / 10 px agreement.
DetectorStats score_detector(const PuzzleBundle& bundle, const std::vector<AlignmentCandidate>& candidates,
                             double threshold);

struct PrPoint {
  double threshold = 0;
  double precision = 0;
  double recall = 0;
};
std::vector<PrPoint> pr_curve(const PuzzleBundle& bundle, const std::vector<AlignmentCandidate>& candidates,
                              const std::vector<double>& thresholds);

// Unordered fragment pairs (i < j) whose boundaries share at least `min_shared`
// crack points when placed at groundtruth.
std::vector<std::pair<int, int>> groundtruth_adjacency(const PuzzleBundle& bundle, int min_shared = 20);

// Largest connected component of the selected edges, in fragments.
std::vector<int> largest_component(int vertex_count, const std::vector<AlignmentCandidate>& selected);

}  // namespace jigsaw
