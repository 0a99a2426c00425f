// jigsaw: shred -> match -> score -> assemble -> evaluate -> render
#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jigsaw/compatibility.hpp"
#include "jigsaw/composition.hpp"
#include "jigsaw/errors.hpp"
#include "jigsaw/evaluation.hpp"
#include "jigsaw/image.hpp"
#include "jigsaw/pairwise.hpp"
#include "jigsaw/render.hpp"
#include "jigsaw/serialization.hpp"
#include "jigsaw/shredder.hpp"
#include "jigsaw/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace jigsaw;

namespace {

json defaults() {
  const PairwiseConfig p;
  return json{{"seed", 0},
              {"pieces", 9},
              {"width", 600},
              {"height", 600},
              {"orientation_jitter_deg", 8.0},
              {"perturbation_amplitude", 6.0},
              {"pairwise",
               {{"min_segment_length", p.min_segment_length},
                {"length_ratio_tol", p.length_ratio_tol},
                {"segment_color_tol", p.segment_color_tol},
                {"max_seeds", p.max_seeds},
                {"icp_max_distance", p.icp_max_distance},
                {"icp_max_iterations", p.icp_max_iterations},
                {"score_distance", p.score_distance},
                {"score_color_tol", p.score_color_tol},
                {"min_raw_score", p.min_raw_score},
                {"k_max", p.k_max}}},
              {"scorer", "oracle"},
              {"noise", 0.0},
              {"model", ""},
              {"threshold", 0.0},
              {"learners", 5},
              {"solver", "hlm"},
              {"theta_m", 500},
              {"glc_steps_per_vertex", 50},
              {"angle_tol_deg", 3.0},
              {"translation_tol_frac", 0.015},
              {"refine", true},
              {"workers", 0}};
}

// Keys in `patch` must already exist in `base`; nested objects merge key by key.
void overlay(json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) throw ParameterError(where + " must be a JSON object");
  for (const auto& [k, v] : patch.items()) {
    if (!base.contains(k)) throw ParameterError("unknown config key '" + k + "' in " + where);
    if (base[k].is_object())
      overlay(base[k], v, where);
    else
      base[k] = v;
  }
}

PairwiseConfig pairwise_config(const json& c) {
  PairwiseConfig p;
  const json& j = c.at("pairwise");
  p.min_segment_length = j.at("min_segment_length");
  p.length_ratio_tol = j.at("length_ratio_tol");
  p.segment_color_tol = j.at("segment_color_tol");
  p.max_seeds = j.at("max_seeds");
  p.icp_max_distance = j.at("icp_max_distance");
  p.icp_max_iterations = j.at("icp_max_iterations");
  p.score_distance = j.at("score_distance");
  p.score_color_tol = j.at("score_color_tol");
  p.min_raw_score = j.at("min_raw_score");
  p.k_max = j.at("k_max");
  p.workers = c.at("workers");
  return p;
}

SolverOptions solver_options(const json& c, const PuzzleBundle& b) {
  SolverOptions o;
  o.tol = {deg_to_rad(c.at("angle_tol_deg").get<double>()),
           c.at("translation_tol_frac").get<double>() * b.source_diagonal()};
  o.seed = c.at("seed");
  o.theta_m = c.at("theta_m");
  o.glc_steps_per_vertex = c.at("glc_steps_per_vertex");
  o.refine = c.at("refine");
  return o;
}

fs::path or_default(const std::string& given, const fs::path& fallback) {
  return given.empty() ? fallback : fs::path(given);
}

void require_dir(const fs::path& p) {
  if (!fs::is_directory(p)) throw FormatError("not a bundle directory", p.string());
}

std::vector<AlignmentCandidate> load_candidates(const fs::path& p, const PuzzleBundle& b) {
  auto c = read_candidates(p);
  for (const auto& e : c)
    if (e.i < 0 || e.j < 0 || e.i >= static_cast<int>(b.size()) || e.j >= static_cast<int>(b.size()))
      throw FormatError("candidate refers to a fragment outside the bundle", p.string());
  return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Irregular-fragment jigsaw reassembly"};
  app.require_subcommand(1);
  app.fallthrough();

  // pipeline flags, usable after any subcommand
  std::string config_path;
  app.add_option("--config", config_path, "JSON config; flags override it");
  std::uint64_t seed = 0;
  int pieces = 9, theta_m = 500, workers = 0, learners = 5;
  std::string solver, scorer, out;
  double threshold = 0, noise = 0;
  auto* o_seed = app.add_option("--seed", seed, "Seed for every random choice");
  auto* o_pieces = app.add_option("--pieces", pieces, "Fragments per puzzle")->check(CLI::PositiveNumber);
  auto* o_solver = app.add_option("--solver", solver, "bf | glc | hlm")->check(CLI::IsMember({"bf", "glc", "hlm"}));
  auto* o_scorer = app.add_option("--scorer", scorer, "ensemble | oracle")->check(CLI::IsMember({"ensemble", "oracle"}));
  auto* o_threshold = app.add_option("--threshold", threshold, "Drop candidates with gamma below this");
  auto* o_theta = app.add_option("--theta-m", theta_m, "Merge attempts per HLM level")->check(CLI::PositiveNumber);
  auto* o_workers = app.add_option("--workers", workers, "Worker threads (0 = all cores)");
  auto* o_noise = app.add_option("--noise", noise, "Oracle label-flip probability")->check(CLI::Range(0.0, 1.0));
  auto* o_learners = app.add_option("--learners", learners, "Boosting rounds")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "Output path");

  std::string bundle_dir, candidates_path, model_path, assembly_path, image_path;
  std::vector<std::string> bundles;
  bool synthetic = false, seams = false;

  auto* shred = app.add_subcommand("shred", "Cut an image into a puzzle bundle");
  shred->add_option("--image", image_path, "Source PNG");
  shred->add_flag("--synthetic", synthetic, "Generate the source image from --seed");
  auto* match = app.add_subcommand("match", "Pairwise alignment candidates");
  match->add_option("--bundle", bundle_dir, "Bundle directory")->required();
  auto* train = app.add_subcommand("train", "Fit the boosted compatibility model");
  train->add_option("--bundles", bundles, "Bundle directories holding candidates.jsonl")->required();
  auto* score = app.add_subcommand("score", "Fill gamma for every candidate");
  score->add_option("--bundle", bundle_dir, "Bundle directory")->required();
  score->add_option("--candidates", candidates_path, "Default <bundle>/candidates.jsonl");
  score->add_option("--model", model_path, "Model JSON for --scorer ensemble");
  auto* assemble = app.add_subcommand("assemble", "Global composition");
  assemble->add_option("--bundle", bundle_dir, "Bundle directory")->required();
  assemble->add_option("--candidates", candidates_path, "Default <bundle>/scored.jsonl");
  auto* evaluate = app.add_subcommand("evaluate", "PCR / ACR / LCR report");
  evaluate->add_option("--bundle", bundle_dir, "Bundle directory")->required();
  evaluate->add_option("--assembly", assembly_path, "Assembly JSON")->required();
  evaluate->add_option("--candidates", candidates_path, "Scored candidates for detector statistics");
  auto* render = app.add_subcommand("render", "Composite fragments at solved poses");
  render->add_option("--bundle", bundle_dir, "Bundle directory")->required();
  render->add_option("--assembly", assembly_path, "Assembly JSON")->required();
  render->add_flag("--seams", seams, "Outline fragment boundaries");
  for (auto* s : {shred, match, train, score, assemble, evaluate, render}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  try {
    json cfg = defaults();
    if (!config_path.empty()) {
      json file;
      try {
        file = json::parse(read_text(config_path));
      } catch (const json::exception& e) {
        throw FormatError(std::string("bad config (") + e.what() + ")", config_path);
      }
      overlay(cfg, file, config_path);
    }
    if (o_seed->count()) cfg["seed"] = seed;
    if (o_pieces->count()) cfg["pieces"] = pieces;
    if (o_solver->count()) cfg["solver"] = solver;
    if (o_scorer->count()) cfg["scorer"] = scorer;
    if (o_threshold->count()) cfg["threshold"] = threshold;
    if (o_theta->count()) cfg["theta_m"] = theta_m;
    if (o_workers->count()) cfg["workers"] = workers;
    if (o_noise->count()) cfg["noise"] = noise;
    if (o_learners->count()) cfg["learners"] = learners;
    if (!model_path.empty()) cfg["model"] = model_path;

    const std::string command = app.get_subcommands().front()->get_name();
    std::cout << json{{"command", command}, {"config", cfg}}.dump() << "\n";
    const std::uint64_t s = cfg.at("seed");

    if (command == "shred") {
      if (out.empty()) throw ParameterError("shred needs --out <bundle dir>");
      if (synthetic == !image_path.empty()) throw ParameterError("give exactly one of --image and --synthetic");
      const Image src = synthetic ? synthetic_image(cfg.at("width"), cfg.at("height"), s) : read_png(image_path);
      ShredParams p;
      p.orientation_jitter = deg_to_rad(cfg.at("orientation_jitter_deg").get<double>());
      p.perturbation_amplitude = cfg.at("perturbation_amplitude");
      const auto b = shred_to_count(src, cfg.at("pieces"), p, s);
      write_bundle(b, out);
      write_png(src, fs::path(out) / "source.png");
      std::cout << "wrote " << b.size() << " fragments to " << out << "\n";
      return 0;
    }

    if (command != "train") require_dir(bundle_dir);

    if (command == "match") {
      const auto b = read_bundle(bundle_dir);
      const auto t0 = std::chrono::steady_clock::now();
      const auto cands = extract_candidates(b, pairwise_config(cfg));
      const fs::path dst = or_default(out, fs::path(bundle_dir) / "candidates.jsonl");
      write_candidates(dst, cands);
      std::cerr << "match: " << seconds_since(t0) << " s\n";
      std::cout << "wrote " << cands.size() << " candidates to " << dst.string() << "\n";
      return 0;
    }

    if (command == "train") {
      if (out.empty()) throw ParameterError("train needs --out <model.json>");
      std::vector<TrainingSample> samples;
      for (const auto& dir : bundles) {
        require_dir(dir);
        const auto b = read_bundle(dir);
        const auto c = load_candidates(fs::path(dir) / "candidates.jsonl", b);
        const auto part = make_training_samples(b, c, cfg.at("workers"));
        samples.insert(samples.end(), part.begin(), part.end());
      }
      const auto balanced = rebalance(samples, s);
      const auto e = boost_train(balanced, cfg.at("learners"), tree_factory(2));
      write_model(out, e);
      for (const auto& w : e.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "trained " << e.learners.size() << " learners on " << balanced.size() << " samples\n";
      return 0;
    }

    if (command == "score") {
      const auto b = read_bundle(bundle_dir);
      auto c = load_candidates(or_default(candidates_path, fs::path(bundle_dir) / "candidates.jsonl"), b);
      if (cfg.at("scorer") == "ensemble") {
        const std::string m = cfg.at("model");
        if (m.empty()) throw ParameterError("--scorer ensemble needs --model");
        EnsembleScorer(read_model(m), cfg.at("workers")).score(b, c);
      } else {
        OracleScorer(cfg.at("noise"), s).score(b, c);
      }
      c = filter_candidates(std::move(c), cfg.at("threshold"));
      const fs::path dst = or_default(out, fs::path(bundle_dir) / "scored.jsonl");
      write_candidates(dst, c);
      std::cout << "wrote " << c.size() << " scored candidates to " << dst.string() << "\n";
      return 0;
    }

    if (command == "assemble") {
      const auto b = read_bundle(bundle_dir);
      const auto c = load_candidates(or_default(candidates_path, fs::path(bundle_dir) / "scored.jsonl"), b);
      const AssemblyGraph g(b.fragments, c);
      const std::string name = cfg.at("solver");
      const auto t0 = std::chrono::steady_clock::now();
      const auto a = compose(name, g, solver_options(cfg, b));
      const double wall = seconds_since(t0);
      const fs::path dst = or_default(out, fs::path(bundle_dir) / ("assembly_" + name + ".json"));
      write_assembly(dst, make_record(g, a, s));
      write_text(fs::path(dst.string() + ".timing.json"), json{{"wall_time_s", wall}}.dump() + "\n");
      for (const auto& n : a.notes) std::cerr << "note: " << n << "\n";
      std::cout << name << ": " << a.selected.size() << " edges, objective " << a.objective << ", wrote "
                << dst.string() << "\n";
      return 0;
    }

    if (command == "evaluate") {
      const auto b = read_bundle(bundle_dir);
      const auto rec = read_assembly(assembly_path);
      auto r = score_assembly(b, rec.poses, rec.selected);
      const fs::path timing(assembly_path + ".timing.json");
      if (fs::exists(timing)) r.wall_time = json::parse(read_text(timing)).value("wall_time_s", 0.0);
      if (!candidates_path.empty()) {
        r.has_detector = true;
        r.detector = score_detector(b, load_candidates(candidates_path, b), cfg.at("threshold"));
      }
      const fs::path dst = or_default(out, fs::path(bundle_dir) / ("report_" + rec.solver + ".json"));
      write_text(dst, report_to_json(r));
      write_text(fs::path(dst.string() + ".timing.json"), json{{"wall_time_s", r.wall_time}}.dump() + "\n");
      std::cout << format_report_table(r);
      return 0;
    }

    if (command == "render") {
      if (out.empty()) throw ParameterError("render needs --out <image.png>");
      const auto b = read_bundle(bundle_dir);
      const auto rec = read_assembly(assembly_path);
      if (rec.poses.size() != b.size()) throw FormatError("assembly does not match the bundle", assembly_path);
      write_png(render_assembly(b.fragments, rec.poses, seams), out);
      std::cout << "wrote " << out << "\n";
      return 0;
    }
  } catch (const FormatError& e) {
    std::cerr << json{{"error", e.kind()}, {"message", e.what()}, {"path", e.path()}}.dump() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << json{{"error", e.kind()}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
