#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "jigsaw/fragment.hpp"
#include "jigsaw/transform.hpp"

namespace jigsaw {

struct ShredParams {
  int num_cuts = 4;
  double orientation_jitter = deg_to_rad(8.0);  // radians
  double perturbation_amplitude = 6.0;          // pixels
};

inline constexpr long kMinFragmentArea = 400;

struct PuzzleBundle {
  std::vector<Fragment> fragments;
  // groundtruth[id] maps fragment-local coordinates to source-image coordinates
  std::vector<RigidTransform2D> groundtruth;
  int source_width = 0;
  int source_height = 0;
  std::uint64_t seed = 0;
  ShredParams params;

  std::size_t size() const { return fragments.size(); }
  // Relative pose of j in i's frame: maps j-local points into i-local points.
  RigidTransform2D relative_pose(int i, int j) const { return groundtruth[i].inverse() * groundtruth[j]; }
  double source_diagonal() const { return std::hypot(double(source_width), double(source_height)); }
};

// Cuts `image` with params.num_cuts perturbed polylines. Throws ParameterError when
// the cuts cannot be placed without producing a piece below kMinFragmentArea.
PuzzleBundle shred(const Image& image, const ShredParams& params, std::uint64_t seed);

// Adds cuts one at a time until exactly `pieces` fragments exist. params.num_cuts is
// ignored on input and reports the number of cuts used.
PuzzleBundle shred_to_count(const Image& image, int pieces, const ShredParams& params, std::uint64_t seed);

// Source pixels that belong to no fragment (always 0 for the zero-width cuts used
// here) and pixels where fragments overlap under groundtruth.
struct CoverageReport {
  long uncovered = 0;
  long multiply_covered = 0;
  long color_mismatches = 0;
};
CoverageReport check_coverage(const PuzzleBundle& bundle, const Image& source);

// Directory layout: manifest.json plus fragment_<id>.png. read_bundle throws
// FormatError on a missing manifest or file, checksum mismatch or id problems.
void write_bundle(const PuzzleBundle& bundle, const std::filesystem::path& dir);
PuzzleBundle read_bundle(const std::filesystem::path& dir);

}  // namespace jigsaw
