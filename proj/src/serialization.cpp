#include "jigsaw/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "jigsaw/errors.hpp"

namespace jigsaw {

using nlohmann::json;

namespace {

json pose_json(const RigidTransform2D& t) { return json{t.theta(), t.tx(), t.ty()}; }

RigidTransform2D pose_from(const json& j) {
  if (j.contains("pose")) {
    const auto& p = j.at("pose");
    return {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
  }
  return RigidTransform2D::from_matrix(j.at("T").get<std::array<double, 9>>());
}

json candidate_json(const AlignmentCandidate& c) {
  return json{{"i", c.i},
              {"j", c.j},
              {"k", c.k},
              {"T", c.transform.matrix()},
              {"pose", pose_json(c.transform)},
              {"raw_score", c.raw_score},
              {"gamma", c.gamma},
              {"roi", json{c.roi.x, c.roi.y, c.roi.w, c.roi.h}}};
}

AlignmentCandidate candidate_from(const json& j) {
  AlignmentCandidate c;
  c.i = j.at("i").get<int>();
  c.j = j.at("j").get<int>();
  c.k = j.value("k", 0);
  c.transform = pose_from(j);
  c.raw_score = j.value("raw_score", 0.0);
  c.gamma = j.value("gamma", 0.0);
  if (j.contains("roi")) {
    const auto& r = j.at("roi");
    c.roi = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(), r.at(3).get<double>()};
  }
  return c;
}

// JSON has no infinity; keep it as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write file", path.string());
  out << text;
}

void write_candidates(const std::filesystem::path& path, const std::vector<AlignmentCandidate>& candidates) {
  std::string text;
  for (const auto& c : candidates) text += candidate_json(c).dump() + "\n";
  write_text(path, text);
}

std::vector<AlignmentCandidate> read_candidates(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::vector<AlignmentCandidate> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(candidate_from(json::parse(line)));
    } catch (const json::exception& e) {
      throw FormatError("bad candidate on line " + std::to_string(lineno) + " (" + e.what() + ")", path.string());
    }
  }
  return out;
}

std::string model_to_json(const BoostEnsemble& e) {
  json trees = json::array();
  for (const auto& l : e.learners) {
    const auto* tree = dynamic_cast<const DecisionTree*>(l.get());
    if (!tree) throw ParameterError("only decision-tree learners can be saved");
    json nodes = json::array();
    for (const auto& n : tree->nodes())
      nodes.push_back(json{{"feature", n.feature},
                           {"threshold", n.threshold},
                           {"left", n.left},
                           {"right", n.right},
                           {"value", n.value}});
    trees.push_back(json{{"max_depth", tree->max_depth()}, {"nodes", nodes}});
  }
  json errors = json::array();
  for (double v : e.errors) errors.push_back(number(v));
  json j{{"schema_version", kFeatureSchemaVersion},
         {"features", feature_names()},
         {"p", e.p},
         {"alphas", e.alphas},
         {"errors", errors},
         {"trees", trees},
         {"warnings", e.warnings}};
  return j.dump(2) + "\n";
}

BoostEnsemble model_from_json(const std::string& text, const std::string& origin) {
  try {
    const json j = json::parse(text);
    if (j.at("schema_version").get<int>() != kFeatureSchemaVersion)
      throw FormatError("feature schema version mismatch", origin);
    if (j.at("features").get<std::vector<std::string>>() != feature_names())
      throw FormatError("feature names do not match this build", origin);
    BoostEnsemble e;
    e.p = j.value("p", 0.5);
    e.alphas = j.at("alphas").get<std::vector<double>>();
    for (const auto& v : j.value("errors", json::array())) e.errors.push_back(number_from(v));
    e.warnings = j.value("warnings", std::vector<std::string>{});
    const int nf = static_cast<int>(feature_names().size());
    for (const auto& t : j.at("trees")) {
      std::vector<DecisionTree::Node> nodes;
      for (const auto& n : t.at("nodes")) {
        DecisionTree::Node node;
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
        node.value = n.at("value").get<double>();
        nodes.push_back(node);
      }
      const int count = static_cast<int>(nodes.size());
      for (const auto& n : nodes)
        if (n.feature >= nf || (n.feature >= 0 && (n.left < 0 || n.left >= count || n.right < 0 || n.right >= count)))
          throw FormatError("tree node out of range", origin);
      auto tree = std::make_shared<DecisionTree>(t.value("max_depth", 2));
      tree->set_nodes(std::move(nodes));
      e.learners.push_back(std::move(tree));
    }
    if (e.learners.size() != e.alphas.size()) throw FormatError("alphas and trees differ in count", origin);
    return e;
  } catch (const json::exception& ex) {
    throw FormatError(std::string("bad model (") + ex.what() + ")", origin);
  }
}

void write_model(const std::filesystem::path& path, const BoostEnsemble& e) { write_text(path, model_to_json(e)); }

BoostEnsemble read_model(const std::filesystem::path& path) { return model_from_json(read_text(path), path.string()); }

AssemblyRecord make_record(const AssemblyGraph& g, const Assembly& a, std::uint64_t seed) {
  AssemblyRecord r;
  r.solver = a.solver;
  r.seed = seed;
  r.anchor = a.anchor;
  r.objective = a.objective;
  for (int e : a.selected) r.selected.push_back(g.edge(e));
  r.poses = a.poses;
  r.notes = a.notes;
  return r;
}

std::string assembly_to_json(const AssemblyRecord& r) {
  json poses = json::array();
  for (std::size_t v = 0; v < r.poses.size(); ++v) {
    json p{{"id", v}};
    if (r.poses[v]) {
      p["T"] = r.poses[v]->matrix();
      p["pose"] = pose_json(*r.poses[v]);
    } else {
      p["T"] = nullptr;
    }
    poses.push_back(p);
  }
  json sel = json::array();
  for (const auto& c : r.selected) sel.push_back(candidate_json(c));
  json j{{"solver", r.solver},       {"seed", r.seed},  {"anchor", r.anchor}, {"objective", number(r.objective)},
         {"selected", sel},          {"poses", poses},  {"notes", r.notes}};
  return j.dump(2) + "\n";
}

AssemblyRecord assembly_from_json(const std::string& text, const std::string& origin) {
  try {
    const json j = json::parse(text);
    AssemblyRecord r;
    r.solver = j.at("solver").get<std::string>();
    r.seed = j.value("seed", std::uint64_t{0});
    r.anchor = j.value("anchor", -1);
    r.objective = number_from(j.at("objective"));
    for (const auto& c : j.at("selected")) r.selected.push_back(candidate_from(c));
    for (const auto& p : j.at("poses")) {
      if (p.at("id").get<std::size_t>() != r.poses.size()) throw FormatError("pose ids must be 0..n-1 in order", origin);
      if (p.at("T").is_null())
        r.poses.emplace_back(std::nullopt);
      else
        r.poses.emplace_back(pose_from(p));
    }
    r.notes = j.value("notes", std::vector<std::string>{});
    return r;
  } catch (const json::exception& ex) {
    throw FormatError(std::string("bad assembly (") + ex.what() + ")", origin);
  }
}

void write_assembly(const std::filesystem::path& path, const AssemblyRecord& r) {
  write_text(path, assembly_to_json(r));
}

AssemblyRecord read_assembly(const std::filesystem::path& path) {
  return assembly_from_json(read_text(path), path.string());
}

std::string report_to_json(const EvalReport& r) {
  json errs = json::array();
  for (std::size_t v = 0; v < r.errors.size(); ++v)
    errs.push_back(json{{"id", v},
                        {"angle_deg", number(r.errors[v].angle_deg)},
                        {"distance_px", number(r.errors[v].distance_px)},
                        {"correct", r.errors[v].correct}});
  json j{{"pcr", r.pcr},
         {"acr", r.acr},
         {"lcr", r.lcr},
         {"gauge_fragment", r.gauge_fragment},
         {"fragments", errs}};
  if (r.has_detector)
    j["detector"] = json{{"tp", r.detector.tp},
                         {"fp", r.detector.fp},
                         {"tn", r.detector.tn},
                         {"fn", r.detector.fn},
                         {"precision", r.detector.precision},
                         {"recall", r.detector.recall}};
  return j.dump(2) + "\n";
}

std::string format_report_table(const EvalReport& r) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "PCR %.4f  ACR %.4f  LCR %.4f  time %.2fs\n", r.pcr, r.acr, r.lcr, r.wall_time);
  out += buf;
  if (r.has_detector) {
    std::snprintf(buf, sizeof buf, "detector: precision %.4f recall %.4f (tp %ld fp %ld fn %ld tn %ld)\n",
                  r.detector.precision, r.detector.recall, r.detector.tp, r.detector.fp, r.detector.fn, r.detector.tn);
    out += buf;
  }
  out += "  id   angle(deg)   dist(px)  ok\n";
  for (std::size_t v = 0; v < r.errors.size(); ++v) {
    std::snprintf(buf, sizeof buf, "%4zu %12.3f %10.2f  %s\n", v, r.errors[v].angle_deg, r.errors[v].distance_px,
                  r.errors[v].correct ? "yes" : "no");
    out += buf;
  }
  return out;
}

}  // namespace jigsaw
