#include <doctest.h>

#include <json.hpp>

#include "common.hpp"
#include "jigsaw/errors.hpp"
#include "jigsaw/evaluation.hpp"
#include "jigsaw/random.hpp"
#include "jigsaw/render.hpp"
#include "jigsaw/serialization.hpp"
#include "oracles.hpp"

using namespace jigsaw;
namespace fs = std::filesystem;

namespace {

Poses truth_poses(const PuzzleBundle& b) {
  Poses p;
  for (const auto& t : b.groundtruth) p.push_back(t);
  return p;
}

std::vector<AlignmentCandidate> truth_edges(const PuzzleBundle& b) {
  std::vector<AlignmentCandidate> out;
  for (auto [i, j] : oracle::label_adjacency(b)) {
    AlignmentCandidate c;
    c.i = i;
    c.j = j;
    c.transform = b.relative_pose(i, j);
    out.push_back(c);
  }
  return out;
}

}  // namespace

TEST_CASE("score_assembly: exact, gauge-shifted and one displaced fragment") {
  const auto& b = testing::nine_piece();
  const auto edges = truth_edges(b);
  const auto exact = score_assembly(b, truth_poses(b), edges);
  CHECK(exact.pcr == 1.0);
  CHECK(exact.acr == 1.0);
  CHECK(exact.lcr == 1.0);

  Rng rng(1);
  for (int n = 0; n < 5; ++n) {
    const RigidTransform2D g(rng.uniform(-3, 3), rng.uniform(-1000, 1000), rng.uniform(-1000, 1000));
    Poses moved;
    for (const auto& t : b.groundtruth) moved.push_back(g * t);
    const auto r = score_assembly(b, moved, edges);
    CHECK(r.pcr == exact.pcr);
    CHECK(r.acr == exact.acr);
    CHECK(r.lcr == exact.lcr);
    for (std::size_t v = 0; v < b.size(); ++v) CHECK(r.errors[v].distance_px < 1e-6);
  }

  auto shifted = truth_poses(b);
  shifted[4] = RigidTransform2D::translation(150, 0) * *shifted[4];
  const auto r = score_assembly(b, shifted, edges);
  CHECK(r.pcr == doctest::Approx(8.0 / 9));
  CHECK(r.errors[4].distance_px == doctest::Approx(150.0));
  CHECK_FALSE(r.errors[4].correct);

  auto missing = truth_poses(b);
  missing[2].reset();
  CHECK(score_assembly(b, missing, edges).pcr == doctest::Approx(8.0 / 9));
  CHECK(score_assembly(b, truth_poses(b), {}).acr == 0.0);
  CHECK_THROWS_AS(score_assembly(b, Poses(3), edges), InvalidInput);
}

TEST_CASE("groundtruth adjacency agrees with the label-image oracle") {
  const auto& b = testing::nine_piece();
  CHECK(groundtruth_adjacency(b) == oracle::label_adjacency(b));
  std::vector<AlignmentCandidate> sel;
  for (auto [i, j] : groundtruth_adjacency(b)) {
    AlignmentCandidate c;
    c.i = i;
    c.j = j;
    sel.push_back(c);
  }
  CHECK(largest_component(9, sel).size() == 9);
  CHECK(largest_component(9, {}).size() == 1);
}

TEST_CASE("pr_curve is monotone in recall") {
  const auto& b = testing::nine_piece();
  auto c = testing::nine_piece_candidates();
  OracleScorer(0.05, 3).score(b, c);
  const auto curve = pr_curve(b, c, {0.0, 0.2, 0.5, 0.8, 1.0});
  REQUIRE(curve.size() == 5);
  for (std::size_t n = 1; n < curve.size(); ++n) CHECK(curve[n].recall <= curve[n - 1].recall);
  CHECK(curve.front().recall == 1.0);
}

TEST_CASE("serialization: candidates round trip and report bad lines") {
  const auto dir = testing::scratch_dir("serial");
  auto c = testing::nine_piece_candidates();
  OracleScorer(0.1, 2).score(testing::nine_piece(), c);
  write_candidates(dir / "c.jsonl", c);
  const auto back = read_candidates(dir / "c.jsonl");
  REQUIRE(back.size() == c.size());
  for (std::size_t n = 0; n < c.size(); ++n) {
    CHECK(back[n].i == c[n].i);
    CHECK(back[n].k == c[n].k);
    CHECK(back[n].transform.theta() == c[n].transform.theta());
    CHECK(back[n].transform.tx() == c[n].transform.tx());
    CHECK(back[n].gamma == c[n].gamma);
    CHECK(back[n].raw_score == c[n].raw_score);
    CHECK(back[n].roi.w == c[n].roi.w);
  }
  write_text(dir / "bad.jsonl", read_text(dir / "c.jsonl") + "{\"i\": 0, \"j\": \n");
  try {
    read_candidates(dir / "bad.jsonl");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line " + std::to_string(c.size() + 1)) != std::string::npos);
  }
  CHECK_THROWS_AS(read_candidates(dir / "absent.jsonl"), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("serialization: model round trip and schema checks") {
  std::vector<TrainingSample> s;
  Rng rng(6);
  const auto n_features = feature_names().size();
  for (int n = 0; n < 300; ++n) {
    FeatureVector x(n_features);
    for (auto& v : x) v = rng.uniform();
    s.push_back({x, x[0] + x[3] > 1.0 ? 1 : 0});
  }
  const auto e = boost_train(s, 4, tree_factory(2));
  const std::string text = model_to_json(e);
  const auto back = model_from_json(text);
  CHECK(model_to_json(back) == text);
  for (const auto& t : s) CHECK(ensemble_predict(back, t.x) == ensemble_predict(e, t.x));

  auto j = nlohmann::json::parse(text);
  j["schema_version"] = 99;
  CHECK_THROWS_AS(model_from_json(j.dump()), FormatError);
  j = nlohmann::json::parse(text);
  j["features"][0] = "something_else";
  CHECK_THROWS_AS(model_from_json(j.dump()), FormatError);
  CHECK_THROWS_AS(model_from_json("not json"), FormatError);
}

TEST_CASE("serialization: assembly and report round trips") {
  const auto& b = testing::nine_piece();
  auto c = testing::nine_piece_candidates();
  OracleScorer(0.0, 1).score(b, c);
  const AssemblyGraph g(b.fragments, c);
  SolverOptions opt;
  opt.tol = default_tolerance(b.source_diagonal());
  const auto a = compose_hlm(g, opt);
  const auto rec = make_record(g, a, 17);
  const std::string text = assembly_to_json(rec);
  const auto back = assembly_from_json(text);
  CHECK(assembly_to_json(back) == text);
  CHECK(back.solver == "hlm");
  CHECK(back.seed == 17);
  CHECK(back.selected.size() == a.selected.size());
  REQUIRE(back.poses.size() == b.size());
  for (std::size_t v = 0; v < b.size(); ++v) CHECK(back.poses[v]->tx() == a.poses[v]->tx());

  auto r = score_assembly(b, back.poses, back.selected);
  r.wall_time = 12.5;
  const auto report = nlohmann::json::parse(report_to_json(r));
  CHECK(report.at("pcr").get<double>() == 1.0);
  CHECK_FALSE(report.contains("wall_time_s"));
  CHECK(format_report_table(r).find("PCR") != std::string::npos);
  CHECK_THROWS_AS(assembly_from_json("{}"), FormatError);
}

TEST_CASE("render: groundtruth poses reproduce the source image") {
  const Image src = synthetic_image(300, 240, 31);
  const auto b = shred_to_count(src, 6, {}, 31);
  const Image out = render_assembly(b.fragments, truth_poses(b));
  CHECK(std::abs(out.width - src.width) <= 2);
  CHECK(std::abs(out.height - src.height) <= 2);
  // the canvas origin is the bounding box corner of the placed rasters; try small offsets
  long best = 0, total = 0;
  for (int dy = -3; dy <= 3; ++dy)
    for (int dx = -3; dx <= 3; ++dx) {
      long same = 0;
      total = 0;
      for (int y = 10; y < src.height - 10; ++y)
        for (int x = 10; x < src.width - 10; ++x) {
          if (!out.contains(x + dx, y + dy)) continue;
          const Rgba p = out.at(x + dx, y + dy), q = src.at(x, y);
          same += std::abs(p.r - q.r) + std::abs(p.g - q.g) + std::abs(p.b - q.b) <= 6;
          ++total;
        }
      best = std::max(best, same);
    }
  const long same = best;
  CHECK(same >= 0.97 * total);
  Poses partial = truth_poses(b);
  partial[0].reset();
  CHECK(render_assembly(b.fragments, partial).opaque_count() < out.opaque_count());
}
