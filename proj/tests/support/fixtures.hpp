// Hand-built graphs over square tiles cut from a synthetic image.
#pragma once

#include <map>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "jigsaw/pairwise.hpp"

namespace fixture {

struct Tiles {
  std::vector<jigsaw::Fragment> fragments;
  std::vector<jigsaw::RigidTransform2D> truth;  // fragment-local to image coordinates
  int tile = 100;

  jigsaw::RigidTransform2D relative(int i, int j) const { return truth[i].inverse() * truth[j]; }
  std::vector<jigsaw::Point2> pivots() const;
};

// Fragment id -> (column, row). Ids must be 0..n-1. Each raster carries a 1-px
// transparent margin, so groundtruth is a translation by (col*tile - 1, row*tile - 1).
Tiles make_tiles(const std::map<int, std::pair<int, int>>& cells, int tile, std::uint64_t seed);

jigsaw::AlignmentCandidate edge(int i, int j, int k, const jigsaw::RigidTransform2D& t, double gamma);
// Candidate placing j where groundtruth puts it relative to i.
jigsaw::AlignmentCandidate exact(const Tiles& t, int i, int j, int k, double gamma);

struct ConflictingLoops {
  Tiles tiles;
  std::vector<jigsaw::AlignmentCandidate> edges;
  std::set<std::tuple<int, int, int>> false_edges;
};

// Grid cells (col, row):
//   4 6 7 0
//   9 8 5
//   1 2 3
// 13 exact edges with gamma 0.8 and a false loop 5 -> 8 -> 9 -> 5 (gamma 0.95) that
// puts 5 in 6's cell.
ConflictingLoops conflicting_loops();

}  // namespace fixture
