#pragma once

#include <vector>

#include "jigsaw/shredder.hpp"

namespace jigsaw {

struct Box2 {
  double x = 0, y = 0, w = 0, h = 0;
};

// Edge e_{i,j,k}: `transform` is the pose of fragment j in fragment i's frame (it
// maps j-local points to i-local points). roi is in i's frame.
struct AlignmentCandidate {
  int i = 0;
  int j = 0;
  int k = 0;
  RigidTransform2D transform;
  double raw_score = 0;
  double gamma = 0;
  Box2 roi;
};

struct PairwiseConfig {
  double min_segment_length = 8.0;
  double length_ratio_tol = 0.25;
  double segment_color_tol = 40.0;
  int max_seeds = 30;

  double icp_max_distance = 15.0;
  double icp_min_improvement = 1e-3;
  int icp_max_iterations = 50;
  int icp_min_correspondences = 8;

  double score_distance = 3.0;
  double score_color_tol = 40.0;
  double score_normal_dot = -0.5;
  double min_raw_score = 12.0;

  double dedup_angle = deg_to_rad(3.0);
  double dedup_distance = 5.0;
  int k_max = 10;

  int workers = 0;
};

// Coarse poses of b in a's frame, one per compatible segment pair. Each maps b's
// segment, traversed backwards, onto a's segment with chord midpoints aligned.
std::vector<RigidTransform2D> match_segments(const Fragment& a, const Fragment& b, const PairwiseConfig& cfg = {});

struct IcpResult {
  RigidTransform2D transform;
  double rms = 0;
  int iterations = 0;
  int correspondences = 0;
};

// Point-to-point ICP of b's contour onto a's contour using mutually nearest pairs.
// Throws NoOverlap when the initial pose yields too few correspondences.
IcpResult icp_refine(const Fragment& a, const Fragment& b, const RigidTransform2D& init, const PairwiseConfig& cfg = {});

struct PixelScore {
  double score = 0;
  Box2 roi;  // bounding box of the matched boundary points of a
};

// Counts boundary points of a whose nearest boundary point of b (placed by t) is
// close, similar in color and has an opposing normal.
PixelScore matched_pixel_score(const Fragment& a, const Fragment& b, const RigidTransform2D& t,
                               const PairwiseConfig& cfg = {});

// Candidates for one ordered pair, before k is assigned.
std::vector<AlignmentCandidate> extract_pair(const Fragment& a, const Fragment& b, const PairwiseConfig& cfg = {});

// All pairs i < j. Output sorted by (i, j, k); k ranks raw_score descending.
std::vector<AlignmentCandidate> extract_candidates(const PuzzleBundle& bundle, const PairwiseConfig& cfg = {});

// Whether t agrees with the groundtruth pose of j in i's frame, measured at j's centroid.
bool matches_groundtruth(const PuzzleBundle& bundle, int i, int j, const RigidTransform2D& t,
                         double angle_tol = deg_to_rad(5.0), double distance_tol = 10.0);

}  // namespace jigsaw
