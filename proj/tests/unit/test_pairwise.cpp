#include <doctest.h>

#include <numbers>
#include <set>
#include <tuple>

#include "common.hpp"
#include "jigsaw/errors.hpp"
#include "jigsaw/random.hpp"
#include "oracles.hpp"

using namespace jigsaw;

namespace {

bool near(const RigidTransform2D& t, const RigidTransform2D& truth, const Point2& pivot, double deg, double px) {
  const auto d = pose_difference(t, truth, pivot);
  return d.angle <= deg_to_rad(deg) && d.distance <= px;
}

// Contour points of a lying within 0.75 px of some contour point of b placed by t.
long shared_seam(const Fragment& a, const Fragment& b, const RigidTransform2D& t) {
  std::vector<Point2> moved;
  for (const auto& p : b.contour().points) moved.push_back(t.apply(p));
  long n = 0;
  for (const auto& p : a.contour().points)
    for (const auto& q : moved)
      if ((p - q).norm() <= 0.75) {
        ++n;
        break;
      }
  return n;
}

Image solid(int n, Rgba c) {
  Image r(n + 2, n + 2);
  for (int y = 1; y <= n; ++y)
    for (int x = 1; x <= n; ++x) r.at(x, y) = c;
  return r;
}

}  // namespace

TEST_CASE("match_segments: a straight cut yields a pose near groundtruth") {
  ShredParams p;
  p.num_cuts = 1;
  p.perturbation_amplitude = 0;
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    const auto b = shred(synthetic_image(400, 400, seed), p, seed);
    REQUIRE(b.size() == 2);
    const auto coarse = match_segments(b.fragments[0], b.fragments[1]);
    const auto truth = b.relative_pose(0, 1);
    bool found = false;
    for (const auto& t : coarse) found = found || near(t, truth, b.fragments[1].centroid(), 2.0, 4.0);
    CHECK(found);
  }
}

TEST_CASE("match_segments: identical uniform squares and incompatible colors") {
  const Fragment a(0, solid(40, {90, 90, 90, 255})), b(1, solid(40, {90, 90, 90, 255}));
  CHECK(match_segments(a, b).size() >= 16);
  const Fragment red(2, solid(40, {250, 0, 0, 255})), blue(3, solid(40, {0, 0, 250, 255}));
  CHECK(match_segments(red, blue).empty());
}

TEST_CASE("icp_refine: converges from a perturbed start and keeps an exact one") {
  const auto& b = testing::nine_piece();
  const auto adjacency = oracle::label_adjacency(b);
  REQUIRE(!adjacency.empty());
  Rng rng(4);
  int checked = 0, within = 0;
  for (auto [i, j] : adjacency) {
    const auto& fa = b.fragments[i];
    const auto& fb = b.fragments[j];
    const auto truth = b.relative_pose(i, j);
    const auto exact = icp_refine(fa, fb, truth);
    CHECK(near(exact.transform, truth, fb.centroid(), 0.05, 0.1));
    CHECK(exact.rms <= 1.0);

    const double sign = rng.bernoulli(0.5) ? 1 : -1;
    const double a = rng.uniform(0, 2 * std::numbers::pi);
    const Point2 c = fb.centroid();
    // 3 degrees about j's centroid, then 5 px
    const auto kick = RigidTransform2D::translation(5 * std::cos(a), 5 * std::sin(a)) *
                      RigidTransform2D::translation(c.x, c.y) * RigidTransform2D::rotation(sign * deg_to_rad(3)) *
                      RigidTransform2D::translation(-c.x, -c.y);
    const auto init = truth * kick;
    const auto refined = icp_refine(fa, fb, init);
    // boundary-only ICP lands on the seam but may slide along it; only the
    // rotation and the residual are well determined
    const auto d = pose_difference(refined.transform, truth, c);
    CHECK(refined.rms <= 1.5);
    CHECK(rad_to_deg(d.angle) < 3.0);
    within += rad_to_deg(d.angle) <= 1.0;
    ++checked;
  }
  CHECK(checked == static_cast<int>(adjacency.size()));
  CHECK(within >= 0.9 * checked);
  const auto far = b.relative_pose(0, 1) * RigidTransform2D::translation(500, 0);
  CHECK_THROWS_AS(icp_refine(b.fragments[0], b.fragments[1], far), NoOverlap);
}

TEST_CASE("matched_pixel_score: adjacent pieces at groundtruth versus random poses") {
  const auto& b = testing::nine_piece();
  const auto adjacency = oracle::label_adjacency(b);
  for (auto [i, j] : adjacency) {
    const auto t = b.relative_pose(i, j);
    const long seam = shared_seam(b.fragments[i], b.fragments[j], t);
    CHECK(matched_pixel_score(b.fragments[i], b.fragments[j], t).score >= 0.7 * seam);
  }
  const std::set<std::pair<int, int>> adj(adjacency.begin(), adjacency.end());
  Rng rng(12);
  int trials = 0, low = 0;
  while (trials < 300) {
    const int i = static_cast<int>(rng.index(b.size())), j = static_cast<int>(rng.index(b.size()));
    if (i == j || adj.count({std::min(i, j), std::max(i, j)})) continue;
    const RigidTransform2D t(rng.uniform(-std::numbers::pi, std::numbers::pi), rng.uniform(-300, 300),
                             rng.uniform(-300, 300));
    const double lim = 0.1 * std::min(b.fragments[i].contour().size(), b.fragments[j].contour().size());
    low += matched_pixel_score(b.fragments[i], b.fragments[j], t).score < lim;
    ++trials;
  }
  CHECK(low >= 0.99 * trials);
}

TEST_CASE("extract_candidates: recall, imbalance and determinism") {
  const auto& b = testing::nine_piece();
  const auto& cands = testing::nine_piece_candidates();
  const auto adjacency = oracle::label_adjacency(b);
  int found = 0;
  for (auto [u, v] : adjacency) {
    bool any = false;
    for (const auto& c : cands)
      if (c.i == u && c.j == v) any = any || matches_groundtruth(b, u, v, c.transform);
    found += any;
  }
  CHECK(found >= 0.9 * adjacency.size());
  long correct = 0;
  for (const auto& c : cands) {
    CHECK(c.i < c.j);
    correct += matches_groundtruth(b, c.i, c.j, c.transform);
  }
  CHECK(correct > 0);
  CHECK(correct < static_cast<long>(cands.size()) - correct);
  // sorted by (i, j, k) with k ranking raw score
  for (std::size_t n = 1; n < cands.size(); ++n) {
    const auto& p = cands[n - 1];
    const auto& c = cands[n];
    CHECK(std::tie(p.i, p.j, p.k) < std::tie(c.i, c.j, c.k));
    if (p.i == c.i && p.j == c.j) {
      CHECK(c.k == p.k + 1);
      CHECK(p.raw_score >= c.raw_score);
    }
  }
  const auto again = extract_candidates(b);
  REQUIRE(again.size() == cands.size());
  for (std::size_t n = 0; n < cands.size(); ++n) {
    CHECK(again[n].transform.theta() == cands[n].transform.theta());
    CHECK(again[n].transform.tx() == cands[n].transform.tx());
    CHECK(again[n].raw_score == cands[n].raw_score);
  }
}
