#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "jigsaw/pairwise.hpp"

namespace jigsaw {

inline constexpr int kStitchCanvas = 320;
inline constexpr int kFeatureSchemaVersion = 1;

// Two fragments rendered in a's frame under a candidate transform. layer_a and
// layer_b keep each fragment separately (alpha = mask); image is the composite.
struct StitchSample {
  Image image;
  Image layer_a;
  Image layer_b;
  Box2 roi;  // canvas pixels
  double scale = 1;
  // Contour statistics at full resolution: fraction of each perimeter in contact
  // with the other fragment, and mean opposition (-dot) of contact normals.
  double contact_a = 0;
  double contact_b = 0;
  double normal_opposition = 0;
  int label = -1;
  double weight = 1;
};

// Throws NoSeam when the fragments do not come within 3 canvas pixels.
StitchSample stitch_render(const Fragment& a, const Fragment& b, const RigidTransform2D& t);

using FeatureVector = std::vector<double>;

std::vector<std::string> feature_names();
FeatureVector extract_roi_features(const StitchSample& s);

struct TrainingSample {
  FeatureVector x;
  int label = 0;  // 0 or 1
};

// Positives replicated 20 times, then the whole set downsampled to half.
std::vector<TrainingSample> rebalance(const std::vector<TrainingSample>& samples, std::uint64_t seed);

class Learner {
 public:
  virtual ~Learner() = default;
  // weights are non-negative and need not be normalised
  virtual void train(const std::vector<TrainingSample>& samples, const std::vector<double>& weights) = 0;
  // probability-like output in [0, 1]
  virtual double predict(const FeatureVector& x) const = 0;
};

using LearnerFactory = std::function<std::unique_ptr<Learner>()>;

// Depth-limited tree grown by weighted entropy; leaves hold the weighted positive
// fraction. This is the weighted cross-entropy minimiser over the leaf partition.
class DecisionTree : public Learner {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0;
    int left = -1, right = -1;  // x[feature] < threshold goes left
    double value = 0.5;
  };

  explicit DecisionTree(int max_depth = 2, int min_leaf = 5) : max_depth_(max_depth), min_leaf_(min_leaf) {}
  void train(const std::vector<TrainingSample>& samples, const std::vector<double>& weights) override;
  double predict(const FeatureVector& x) const override;

  const std::vector<Node>& nodes() const { return nodes_; }
  void set_nodes(std::vector<Node> nodes) { nodes_ = std::move(nodes); }
  int max_depth() const { return max_depth_; }

 private:
  int grow(const std::vector<TrainingSample>& samples, const std::vector<double>& w, std::vector<int> idx, int depth);

  int max_depth_;
  int min_leaf_;
  std::vector<Node> nodes_;
};

LearnerFactory tree_factory(int max_depth = 2);

// alpha = 0.5 ln((1 - E) / E), E clamped to [1e-6, 1 - 1e-6].
double learner_alpha(double weighted_error);
// G in {-1, +1} from a probability and threshold p (closed at p).
inline int discretize(double y_hat, double p = 0.5) { return y_hat >= p ? 1 : -1; }
// w * exp(-y * alpha * g) with y, g in {-1, +1}.
inline double updated_weight(double w, int y, double alpha, int g) { return w * std::exp(-y * alpha * g); }
void normalize_weights(std::vector<double>& w);

struct BoostEnsemble {
  std::vector<std::shared_ptr<const Learner>> learners;
  std::vector<double> alphas;
  std::vector<double> errors;  // E_k per round, before clamping
  double p = 0.5;
  std::vector<std::string> warnings;

  double margin(const FeatureVector& x) const;
};

BoostEnsemble boost_train(const std::vector<TrainingSample>& samples, int K, const LearnerFactory& factory);

// gamma = logistic(sum_k alpha_k G_k(x))
double ensemble_predict(const BoostEnsemble& e, const FeatureVector& x);

// Fills gamma for every candidate of a bundle.
class CandidateScorer {
 public:
  virtual ~CandidateScorer() = default;
  virtual void score(const PuzzleBundle& bundle, std::vector<AlignmentCandidate>& candidates) const = 0;
};

class EnsembleScorer : public CandidateScorer {
 public:
  explicit EnsembleScorer(BoostEnsemble e, int workers = 0) : ensemble_(std::move(e)), workers_(workers) {}
  void score(const PuzzleBundle& bundle, std::vector<AlignmentCandidate>& candidates) const override;

 private:
  BoostEnsemble ensemble_;
  int workers_;
};

// 0.9 for candidates that agree with groundtruth (5 deg / 10 px), else 0.1; each
// label flipped with probability `noise`, drawn in candidate order.
class OracleScorer : public CandidateScorer {
 public:
  OracleScorer(double noise, std::uint64_t seed) : noise_(noise), seed_(seed) {}
  void score(const PuzzleBundle& bundle, std::vector<AlignmentCandidate>& candidates) const override;

 private:
  double noise_;
  std::uint64_t seed_;
};

// Drops candidates with gamma < threshold.
std::vector<AlignmentCandidate> filter_candidates(std::vector<AlignmentCandidate> candidates, double threshold);

// Renders and featurizes every candidate; labels from groundtruth. Candidates
// without a seam are skipped.
std::vector<TrainingSample> make_training_samples(const PuzzleBundle& bundle,
                                                  const std::vector<AlignmentCandidate>& candidates, int workers = 0);

}  // namespace jigsaw
