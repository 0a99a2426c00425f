#include <algorithm>
#include <cmath>

#include "jigsaw/composition.hpp"
#include "jigsaw/errors.hpp"
#include "jigsaw/raster.hpp"

namespace jigsaw {

Tolerance default_tolerance(double source_diagonal) { return {deg_to_rad(3.0), 0.015 * source_diagonal}; }

AssemblyGraph::AssemblyGraph(std::span<const Fragment> fragments, std::vector<AlignmentCandidate> edges)
    : fragments_(fragments), edges_(std::move(edges)), incident_(fragments.size()) {
  std::sort(edges_.begin(), edges_.end(), [](const AlignmentCandidate& a, const AlignmentCandidate& b) {
    return std::tie(a.i, a.j, a.k) < std::tie(b.i, b.j, b.k);
  });
  const int n = vertex_count();
  for (int e = 0; e < edge_count(); ++e) {
    const auto& c = edges_[e];
    if (c.i < 0 || c.j < 0 || c.i >= n || c.j >= n || c.i == c.j)
      throw InvalidInput("edge (" + std::to_string(c.i) + ", " + std::to_string(c.j) + ") has bad endpoints");
    if (e > 0 && edges_[e - 1].i == c.i && edges_[e - 1].j == c.j && edges_[e - 1].k == c.k)
      throw InvalidInput("duplicate edge index (i, j, k)");
    incident_[c.i].push_back(e);
    incident_[c.j].push_back(e);
    pairs_[{std::min(c.i, c.j), std::max(c.i, c.j)}].push_back(e);
  }
}

const std::vector<int>& AssemblyGraph::between(int u, int v) const {
  static const std::vector<int> none;
  const auto it = pairs_.find({std::min(u, v), std::max(u, v)});
  return it == pairs_.end() ? none : it->second;
}

bool IntersectionCache::intersects(int u, const RigidTransform2D& xu, int v, const RigidTransform2D& xv) {
  if (u == v) return false;
  RigidTransform2D rel = xu.inverse() * xv;
  if (u > v) {
    std::swap(u, v);
    rel = rel.inverse();
  }
  const auto key = std::make_tuple(u, v, std::llround(rel.theta() * 1e7), std::llround(rel.tx() * 1e4),
                                   std::llround(rel.ty() * 1e4));
  const auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  const Fragment& fu = graph_->fragment(u);
  const Fragment& fv = graph_->fragment(v);
  const bool hit = pair_overlap_area({&fu, RigidTransform2D::identity()}, {&fv, rel}) >
                   assembly_tolerance(fu.area(), fv.area());
  memo_.emplace(key, hit);
  return hit;
}

bool IntersectionCache::any(std::span<const int> vertices, const std::map<int, RigidTransform2D>& poses) {
  for (std::size_t a = 0; a < vertices.size(); ++a)
    for (std::size_t b = a + 1; b < vertices.size(); ++b)
      if (intersects(vertices[a], poses.at(vertices[a]), vertices[b], poses.at(vertices[b]))) return true;
  return false;
}

bool IntersectionCache::across(std::span<const int> a, std::span<const int> b,
                               const std::map<int, RigidTransform2D>& poses) {
  for (int u : a)
    for (int v : b)
      if (intersects(u, poses.at(u), v, poses.at(v))) return true;
  return false;
}

LoopResidual loop_residual(const AssemblyGraph& g, std::span<const EdgeRef> cycle) {
  if (cycle.size() < 2) throw MalformedLoop("a loop needs at least two edges");
  RigidTransform2D prod;
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    if (cycle[k].edge < 0 || cycle[k].edge >= g.edge_count()) throw MalformedLoop("edge index out of range");
    const int next_tail = g.tail(cycle[(k + 1) % cycle.size()]);
    if (g.head(cycle[k]) != next_tail) throw MalformedLoop("edges do not chain head to tail");
    prod = prod * g.transform(cycle[k]);
  }
  return {std::abs(prod.theta()), prod.translation_part().norm()};
}

bool is_closed(const AssemblyGraph& g, std::span<const EdgeRef> cycle, const Tolerance& tol) {
  const auto r = loop_residual(g, cycle);
  return r.angle <= tol.angle && r.translation <= tol.translation;
}

Loop make_loop(const AssemblyGraph& g, std::span<const EdgeRef> cycle) {
  Loop l;
  l.cycle.assign(cycle.begin(), cycle.end());
  RigidTransform2D x;
  l.poses[g.tail(cycle[0])] = x;
  for (std::size_t k = 0; k + 1 < cycle.size(); ++k) {
    x = x * g.transform(cycle[k]);
    l.poses[g.head(cycle[k])] = x;
  }
  for (const auto& r : cycle) {
    l.edges.push_back(r.edge);
    l.score += g.edge(r.edge).gamma;
  }
  std::sort(l.edges.begin(), l.edges.end());
  for (const auto& [v, pose] : l.poses) l.vertices.push_back(v);
  return l;
}

namespace {

EdgeRef ref_from(const AssemblyGraph& g, int e, int from) { return {e, g.edge(e).i == from}; }

bool consistent(const AssemblyGraph& g, int e, const std::map<int, RigidTransform2D>& poses, const Tolerance& tol) {
  const auto& c = g.edge(e);
  const auto d = pose_difference(poses.at(c.i) * c.transform, poses.at(c.j), g.pivot(c.j));
  return d.angle <= tol.angle && d.distance <= tol.translation;
}

bool has_chord(const AssemblyGraph& g, int u, int v, const std::map<int, RigidTransform2D>& poses,
               const Tolerance& tol) {
  for (int e : g.between(u, v))
    if (consistent(g, e, poses, tol)) return true;
  return false;
}

// Enumerates every choice of one edge per consecutive pair of `ring`.
template <typename Fn>
void for_each_choice(const AssemblyGraph& g, const std::vector<int>& ring, Fn&& fn) {
  const std::size_t m = ring.size();
  std::vector<const std::vector<int>*> options(m);
  for (std::size_t k = 0; k < m; ++k) {
    options[k] = &g.between(ring[k], ring[(k + 1) % m]);
    if (options[k]->empty()) return;
  }
  std::vector<std::size_t> pick(m, 0);
  std::vector<EdgeRef> cycle(m);
  while (true) {
    for (std::size_t k = 0; k < m; ++k) cycle[k] = ref_from(g, (*options[k])[pick[k]], ring[k]);
    fn(cycle);
    std::size_t k = 0;
    while (k < m && ++pick[k] == options[k]->size()) pick[k++] = 0;
    if (k == m) return;
  }
}

}  // namespace

std::vector<Loop> find_induced_loops(const AssemblyGraph& g, const Tolerance& tol, IntersectionCache& cache) {
  const int n = g.vertex_count();
  std::vector<Loop> out;
  auto take = [&](const std::vector<EdgeRef>& cycle, bool quad) {
    if (!is_closed(g, cycle, tol)) return;
    Loop l = make_loop(g, cycle);
    if (quad) {
      const std::vector<int> ring{g.tail(cycle[0]), g.tail(cycle[1]), g.tail(cycle[2]), g.tail(cycle[3])};
      if (has_chord(g, ring[0], ring[2], l.poses, tol) || has_chord(g, ring[1], ring[3], l.poses, tol)) return;
    }
    if (cache.any(l.vertices, l.poses)) return;
    out.push_back(std::move(l));
  };
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (g.between(a, b).empty()) continue;
      for (int c = b + 1; c < n; ++c) for_each_choice(g, {a, b, c}, [&](const auto& cyc) { take(cyc, false); });
    }
  // 4-cycles a-b-c-d with a smallest and b < d so each ring is visited once
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (g.between(a, b).empty()) continue;
      for (int c = a + 1; c < n; ++c) {
        if (c == b || g.between(b, c).empty()) continue;
        for (int d = b + 1; d < n; ++d) {
          if (d == c || g.between(c, d).empty() || g.between(d, a).empty()) continue;
          for_each_choice(g, {a, b, c, d}, [&](const auto& cyc) { take(cyc, true); });
        }
      }
    }
  return out;
}

MergeResult merge_loops(const AssemblyGraph& g, const Loop& lp, const Loop& lq, const Tolerance& tol,
                        IntersectionCache& cache) {
  int common = -1;
  for (int e : lp.edges)
    if (std::binary_search(lq.edges.begin(), lq.edges.end(), e)) {
      common = e;
      break;
    }
  if (common < 0) throw NotMergeable("loops share no edge");

  // bring lq into lp's frame through the tail of the common edge
  const int anchor = g.edge(common).i;
  const RigidTransform2D to_p = lp.poses.at(anchor) * lq.poses.at(anchor).inverse();
  MergeResult res;
  Loop& m = res.loop;
  m.poses = lp.poses;
  std::vector<int> only_q;
  for (const auto& [v, pose] : lq.poses) {
    const RigidTransform2D moved = to_p * pose;
    const auto it = lp.poses.find(v);
    if (it == lp.poses.end()) {
      m.poses[v] = moved;
      only_q.push_back(v);
      continue;
    }
    const auto d = pose_difference(it->second, moved, g.pivot(v));
    if (d.angle > tol.angle || d.distance > tol.translation) {
      res.verdict = MergeVerdict::pose_conflict;
      return res;
    }
  }
  if (cache.across(lp.vertices, only_q, m.poses)) {
    res.verdict = MergeVerdict::intersection;
    return res;
  }

  // union of edges; for rival edges on one pair keep the higher gamma
  std::vector<int> all;
  std::set_union(lp.edges.begin(), lp.edges.end(), lq.edges.begin(), lq.edges.end(), std::back_inserter(all));
  std::map<std::pair<int, int>, int> best;
  for (int e : all) {
    const auto& c = g.edge(e);
    const std::pair<int, int> key{std::min(c.i, c.j), std::max(c.i, c.j)};
    const auto it = best.find(key);
    if (it == best.end() || c.gamma > g.edge(it->second).gamma) best[key] = e;
  }
  for (const auto& [key, e] : best) m.edges.push_back(e);
  std::sort(m.edges.begin(), m.edges.end());
  for (int e : m.edges) m.score += g.edge(e).gamma;
  for (const auto& [v, pose] : m.poses) m.vertices.push_back(v);
  return res;
}

}  // namespace jigsaw
