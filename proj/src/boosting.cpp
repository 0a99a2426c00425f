#include <algorithm>
#include <cmath>
#include <numeric>

#include "jigsaw/compatibility.hpp"
#include "jigsaw/errors.hpp"
#include "jigsaw/random.hpp"

namespace jigsaw {
namespace {

constexpr int kOversample = 20;
constexpr double kErrorClamp = 1e-6;

double binary_entropy(double p) {
  if (p <= 0 || p >= 1) return 0;
  return -(p * std::log(p) + (1 - p) * std::log(1 - p));
}

}  // namespace

int DecisionTree::grow(const std::vector<TrainingSample>& samples, const std::vector<double>& w, std::vector<int> idx,
                       int depth) {
  double total = 0, pos = 0;
  for (int i : idx) {
    total += w[i];
    if (samples[i].label == 1) pos += w[i];
  }
  const int me = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  nodes_[me].value = total > 0 ? pos / total : 0.5;
  if (depth >= max_depth_ || static_cast<int>(idx.size()) < 2 * min_leaf_ || pos <= 0 || pos >= total) return me;

  const double parent = total * binary_entropy(pos / total);
  double best_cost = parent - 1e-12 * std::max(total, 1.0);
  int best_feature = -1;
  double best_threshold = 0;
  const std::size_t dims = samples[idx[0]].x.size();
  std::vector<int> order = idx;
  for (std::size_t f = 0; f < dims; ++f) {
    std::stable_sort(order.begin(), order.end(),
                     [&](int p, int q) { return samples[p].x[f] < samples[q].x[f]; });
    double wl = 0, pl = 0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      const int i = order[k];
      wl += w[i];
      if (samples[i].label == 1) pl += w[i];
      const double here = samples[i].x[f], next = samples[order[k + 1]].x[f];
      if (here == next) continue;
      const auto nl = static_cast<int>(k + 1), nr = static_cast<int>(order.size()) - nl;
      if (nl < min_leaf_ || nr < min_leaf_) continue;
      const double wr = total - wl, pr = pos - pl;
      const double cost = (wl > 0 ? wl * binary_entropy(pl / wl) : 0) + (wr > 0 ? wr * binary_entropy(pr / wr) : 0);
      if (cost < best_cost) {
        best_cost = cost;
        best_feature = static_cast<int>(f);
        best_threshold = 0.5 * (here + next);
      }
    }
  }
  if (best_feature < 0) return me;

  std::vector<int> left, right;
  for (int i : idx) (samples[i].x[best_feature] < best_threshold ? left : right).push_back(i);
  nodes_[me].feature = best_feature;
  nodes_[me].threshold = best_threshold;
  const int l = grow(samples, w, std::move(left), depth + 1);
  const int r = grow(samples, w, std::move(right), depth + 1);
  nodes_[me].left = l;
  nodes_[me].right = r;
  return me;
}

void DecisionTree::train(const std::vector<TrainingSample>& samples, const std::vector<double>& weights) {
  if (samples.empty()) throw InvalidInput("cannot train on an empty sample set");
  if (weights.size() != samples.size()) throw InvalidInput("one weight per sample is required");
  nodes_.clear();
  std::vector<int> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  grow(samples, weights, std::move(idx), 0);
}

double DecisionTree::predict(const FeatureVector& x) const {
  if (nodes_.empty()) return 0.5;
  int n = 0;
  while (nodes_[n].feature >= 0) n = x[nodes_[n].feature] < nodes_[n].threshold ? nodes_[n].left : nodes_[n].right;
  return nodes_[n].value;
}

LearnerFactory tree_factory(int max_depth) {
  return [max_depth] { return std::make_unique<DecisionTree>(max_depth); };
}

double learner_alpha(double weighted_error) {
  const double e = std::clamp(weighted_error, kErrorClamp, 1.0 - kErrorClamp);
  return 0.5 * std::log((1.0 - e) / e);
}

void normalize_weights(std::vector<double>& w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (total <= 0) throw InvalidInput("weights sum to zero");
  for (double& x : w) x /= total;
}

double BoostEnsemble::margin(const FeatureVector& x) const {
  double m = 0;
  for (std::size_t k = 0; k < learners.size(); ++k) m += alphas[k] * discretize(learners[k]->predict(x), p);
  return m;
}

BoostEnsemble boost_train(const std::vector<TrainingSample>& samples, int K, const LearnerFactory& factory) {
  if (K < 1) throw ParameterError("need at least one learner");
  if (samples.empty()) throw InvalidInput("cannot boost on an empty sample set");
  const std::size_t n = samples.size();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  BoostEnsemble e;
  for (int k = 0; k < K; ++k) {
    std::shared_ptr<Learner> g = factory();
    g->train(samples, w);
    std::vector<int> G(n);
    double err = 0, total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      G[i] = discretize(g->predict(samples[i].x), e.p);
      total += w[i];
      if (G[i] != 2 * samples[i].label - 1) err += w[i];
    }
    err /= total;
    const double alpha = learner_alpha(err);
    if (err >= 0.5)
      e.warnings.push_back("learner " + std::to_string(k) + " has weighted error " + std::to_string(err) +
                           " >= 0.5; alpha " + std::to_string(alpha));
    for (std::size_t i = 0; i < n; ++i) w[i] = updated_weight(w[i], 2 * samples[i].label - 1, alpha, G[i]);
    normalize_weights(w);
    e.learners.push_back(std::move(g));
    e.alphas.push_back(alpha);
    e.errors.push_back(err);
  }
  return e;
}

double ensemble_predict(const BoostEnsemble& e, const FeatureVector& x) { return 1.0 / (1.0 + std::exp(-e.margin(x))); }

std::vector<TrainingSample> rebalance(const std::vector<TrainingSample>& samples, std::uint64_t seed) {
  std::vector<TrainingSample> grown;
  for (const auto& s : samples) {
    const int copies = s.label == 1 ? kOversample : 1;
    for (int c = 0; c < copies; ++c) grown.push_back(s);
  }
  if (grown.size() == samples.size()) throw ImbalanceError("no positive samples to oversample");
  Rng rng(seed);
  rng.shuffle(grown);
  grown.resize(grown.size() / 2);
  return grown;
}

}  // namespace jigsaw
