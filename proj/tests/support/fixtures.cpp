#include "fixtures.hpp"

#include "jigsaw/synthetic.hpp"

namespace fixture {

using namespace jigsaw;

std::vector<Point2> Tiles::pivots() const {
  std::vector<Point2> out;
  for (const auto& f : fragments) out.push_back(f.centroid());
  return out;
}

Tiles make_tiles(const std::map<int, std::pair<int, int>>& cells, int tile, std::uint64_t seed) {
  int cols = 1, rows = 1;
  for (const auto& [id, c] : cells) cols = std::max(cols, c.first + 1), rows = std::max(rows, c.second + 1);
  const Image src = synthetic_image(cols * tile, rows * tile, seed);
  Tiles t;
  t.tile = tile;
  for (const auto& [id, c] : cells) {
    const auto [cx, cy] = c;
    Image r(tile + 2, tile + 2);
    for (int y = 0; y < tile; ++y)
      for (int x = 0; x < tile; ++x) r.at(x + 1, y + 1) = src.at(cx * tile + x, cy * tile + y);
    t.fragments.emplace_back(id, std::move(r));
    t.truth.push_back(RigidTransform2D::translation(cx * tile - 1.0, cy * tile - 1.0));
  }
  return t;
}

AlignmentCandidate edge(int i, int j, int k, const RigidTransform2D& t, double gamma) {
  AlignmentCandidate c;
  c.i = i;
  c.j = j;
  c.k = k;
  c.transform = t;
  c.gamma = gamma;
  return c;
}

AlignmentCandidate exact(const Tiles& t, int i, int j, int k, double gamma) {
  return edge(i, j, k, t.relative(i, j), gamma);
}

ConflictingLoops conflicting_loops() {
  ConflictingLoops f;
  f.tiles = make_tiles({{4, {0, 0}}, {6, {1, 0}}, {7, {2, 0}}, {0, {3, 0}}, {9, {0, 1}},
                        {8, {1, 1}}, {5, {2, 1}}, {1, {0, 2}}, {2, {1, 2}}, {3, {2, 2}}},
                       100, 11);
  const std::vector<std::pair<int, int>> correct{{4, 6}, {6, 7}, {7, 0}, {9, 8}, {8, 5}, {1, 2}, {2, 3},
                                                 {4, 9}, {6, 8}, {7, 5}, {9, 1}, {8, 2}, {5, 3}};
  for (auto [i, j] : correct) f.edges.push_back(exact(f.tiles, i, j, 0, 0.8));
  const auto& tr = f.tiles.truth;
  const RigidTransform2D five_at_six = tr[6];
  f.edges.push_back(edge(5, 8, 1, five_at_six.inverse() * tr[8], 0.95));
  f.edges.push_back(edge(9, 5, 1, tr[9].inverse() * five_at_six, 0.95));
  f.false_edges = {{5, 8, 1}, {9, 5, 1}};
  return f;
}

}  // namespace fixture
