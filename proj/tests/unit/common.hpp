// Shared bundles for the unit tests, built once per process.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "jigsaw/compatibility.hpp"
#include "jigsaw/pairwise.hpp"
#include "jigsaw/shredder.hpp"
#include "jigsaw/synthetic.hpp"

namespace testing {

inline const jigsaw::PuzzleBundle& nine_piece() {
  static const auto b = jigsaw::shred_to_count(jigsaw::synthetic_image(600, 600, 2024), 9, {}, 2024);
  return b;
}

inline const std::vector<jigsaw::AlignmentCandidate>& nine_piece_candidates() {
  static const auto c = jigsaw::extract_candidates(nine_piece());
  return c;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("jigsaw_unit_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
