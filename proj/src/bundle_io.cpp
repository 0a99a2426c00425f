#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "jigsaw/errors.hpp"
#include "jigsaw/shredder.hpp"

namespace jigsaw {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string crc_hex(std::uint32_t crc) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", crc);
  return buf;
}

json pose_json(const RigidTransform2D& t) {
  return {{"T", t.matrix()}, {"pose", {t.theta(), t.tx(), t.ty()}}};
}

}  // namespace

void write_bundle(const PuzzleBundle& bundle, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create bundle directory", dir.string());

  json frags = json::array(), truth = json::array();
  for (std::size_t i = 0; i < bundle.size(); ++i) {
    const Fragment& f = bundle.fragments[i];
    const std::string file = "fragment_" + std::to_string(f.id()) + ".png";
    write_png(f.raster(), dir / file);
    const auto& gt = bundle.groundtruth[i];
    frags.push_back({{"id", f.id()},
                     {"file", file},
                     {"width", f.raster().width},
                     {"height", f.raster().height},
                     {"offset", {gt.tx(), gt.ty()}},
                     {"area", f.area()},
                     {"crc32", crc_hex(raster_crc32(f.raster()))}});
    json g = pose_json(gt);
    g["id"] = f.id();
    truth.push_back(g);
  }
  json manifest = {{"format", 1},
                   {"seed", bundle.seed},
                   {"source_size", {bundle.source_width, bundle.source_height}},
                   {"params",
                    {{"num_cuts", bundle.params.num_cuts},
                     {"orientation_jitter", bundle.params.orientation_jitter},
                     {"perturbation_amplitude", bundle.params.perturbation_amplitude}}},
                   {"fragments", frags},
                   {"groundtruth", truth}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw FormatError("cannot write manifest", (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

PuzzleBundle read_bundle(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  std::ifstream in(mpath);
  if (!in) throw FormatError("missing manifest", mpath.string());
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest is not valid JSON (") + e.what() + ")", mpath.string());
  }

  PuzzleBundle b;
  try {
    if (m.at("format").get<int>() != 1) throw FormatError("unsupported manifest format", mpath.string());
    b.seed = m.at("seed").get<std::uint64_t>();
    b.source_width = m.at("source_size").at(0).get<int>();
    b.source_height = m.at("source_size").at(1).get<int>();
    const auto& p = m.at("params");
    b.params.num_cuts = p.at("num_cuts").get<int>();
    b.params.orientation_jitter = p.at("orientation_jitter").get<double>();
    b.params.perturbation_amplitude = p.at("perturbation_amplitude").get<double>();

    const auto& frags = m.at("fragments");
    const std::size_t n = frags.size();
    std::set<int> seen;
    std::vector<const json*> by_id(n, nullptr);
    for (const auto& f : frags) {
      const int id = f.at("id").get<int>();
      if (!seen.insert(id).second) throw FormatError("duplicate fragment id " + std::to_string(id), mpath.string());
      if (id < 0 || static_cast<std::size_t>(id) >= n)
        throw FormatError("fragment id " + std::to_string(id) + " outside 0..n-1", mpath.string());
      by_id[id] = &f;
    }
    b.groundtruth.resize(n);
    std::vector<bool> have_pose(n, false);
    for (const auto& g : m.at("groundtruth")) {
      const int id = g.at("id").get<int>();
      if (id < 0 || static_cast<std::size_t>(id) >= n || have_pose[id])
        throw FormatError("bad groundtruth id " + std::to_string(id), mpath.string());
      const auto pose = g.at("pose");
      b.groundtruth[id] = RigidTransform2D(pose.at(0).get<double>(), pose.at(1).get<double>(), pose.at(2).get<double>());
      have_pose[id] = true;
    }
    for (std::size_t id = 0; id < n; ++id) {
      if (!have_pose[id]) throw FormatError("fragment " + std::to_string(id) + " has no groundtruth", mpath.string());
      const json& f = *by_id[id];
      const fs::path file = dir / f.at("file").get<std::string>();
      if (!fs::exists(file)) throw FormatError("missing fragment file", file.string());
      Image raster = read_png(file);
      if (raster.width != f.at("width").get<int>() || raster.height != f.at("height").get<int>())
        throw FormatError("fragment size disagrees with manifest", file.string());
      if (crc_hex(raster_crc32(raster)) != f.at("crc32").get<std::string>())
        throw FormatError("checksum mismatch", file.string());
      b.fragments.emplace_back(static_cast<int>(id), std::move(raster));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest (") + e.what() + ")", mpath.string());
  }
  return b;
}

}  // namespace jigsaw
