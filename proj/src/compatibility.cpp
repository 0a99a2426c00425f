#include "jigsaw/compatibility.hpp"

#include <optional>

#include "jigsaw/errors.hpp"
#include "jigsaw/parallel.hpp"
#include "jigsaw/random.hpp"

namespace jigsaw {

void EnsembleScorer::score(const PuzzleBundle& bundle, std::vector<AlignmentCandidate>& candidates) const {
  parallel_for(candidates.size(), workers_, [&](std::size_t c) {
    auto& cand = candidates[c];
    try {
      const StitchSample s = stitch_render(bundle.fragments[cand.i], bundle.fragments[cand.j], cand.transform);
      cand.gamma = ensemble_predict(ensemble_, extract_roi_features(s));
    } catch (const NoSeam&) {
      cand.gamma = 0.0;
    }
  });
}

void OracleScorer::score(const PuzzleBundle& bundle, std::vector<AlignmentCandidate>& candidates) const {
  Rng rng(seed_);
  for (auto& c : candidates) {
    bool good = matches_groundtruth(bundle, c.i, c.j, c.transform);
    if (rng.bernoulli(noise_)) good = !good;
    c.gamma = good ? 0.9 : 0.1;
  }
}

std::vector<AlignmentCandidate> filter_candidates(std::vector<AlignmentCandidate> candidates, double threshold) {
  std::erase_if(candidates, [&](const AlignmentCandidate& c) { return c.gamma < threshold; });
  return candidates;
}

std::vector<TrainingSample> make_training_samples(const PuzzleBundle& bundle,
                                                  const std::vector<AlignmentCandidate>& candidates, int workers) {
  std::vector<std::optional<TrainingSample>> slots(candidates.size());
  parallel_for(candidates.size(), workers, [&](std::size_t k) {
    const auto& c = candidates[k];
    try {
      const StitchSample s = stitch_render(bundle.fragments[c.i], bundle.fragments[c.j], c.transform);
      slots[k] = TrainingSample{extract_roi_features(s), matches_groundtruth(bundle, c.i, c.j, c.transform) ? 1 : 0};
    } catch (const NoSeam&) {
    }
  });
  std::vector<TrainingSample> out;
  for (auto& s : slots)
    if (s) out.push_back(std::move(*s));
  return out;
}

}  // namespace jigsaw
