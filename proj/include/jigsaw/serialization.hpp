#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "jigsaw/compatibility.hpp"
#include "jigsaw/composition.hpp"
#include "jigsaw/evaluation.hpp"

namespace jigsaw {

// One JSON object per line: {i, j, k, T[9], pose[theta, tx, ty], raw_score, gamma, roi[x, y, w, h]}.
void write_candidates(const std::filesystem::path& path, const std::vector<AlignmentCandidate>& candidates);
std::vector<AlignmentCandidate> read_candidates(const std::filesystem::path& path);

// Tree ensembles only. The feature schema version is checked on load.
std::string model_to_json(const BoostEnsemble& e);
BoostEnsemble model_from_json(const std::string& text, const std::string& origin = "<model>");
void write_model(const std::filesystem::path& path, const BoostEnsemble& e);
BoostEnsemble read_model(const std::filesystem::path& path);

struct AssemblyRecord {
  std::string solver;
  std::uint64_t seed = 0;
  int anchor = -1;
  double objective = 0;
  std::vector<AlignmentCandidate> selected;
  Poses poses;
  std::vector<std::string> notes;
};

AssemblyRecord make_record(const AssemblyGraph& g, const Assembly& a, std::uint64_t seed);
// Deterministic content only; wall-clock timings belong in a sidecar.
std::string assembly_to_json(const AssemblyRecord& r);
AssemblyRecord assembly_from_json(const std::string& text, const std::string& origin = "<assembly>");
void write_assembly(const std::filesystem::path& path, const AssemblyRecord& r);
AssemblyRecord read_assembly(const std::filesystem::path& path);

// wall_time is left out so reports stay byte-identical across runs.
std::string report_to_json(const EvalReport& r);
std::string format_report_table(const EvalReport& r);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace jigsaw
