#include "jigsaw/composition.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

#include "jigsaw/errors.hpp"
#include "jigsaw/random.hpp"

namespace jigsaw {
namespace {

constexpr int kGlcMaxLoop = 4;
constexpr int kHlmSearchRounds = 3;

enum class Accept { within_tolerance, lowers_objective };

// Partial assembly: fragments grouped into rigid components, each with poses in
// its own frame, plus the selected edges.
class Growth {
 public:
  Growth(const AssemblyGraph& g, IntersectionCache& cache, const Tolerance& tol)
      : g_(&g), cache_(&cache), tol_(tol), comp_(g.vertex_count()), pose_(g.vertex_count()),
        selected_(g.edge_count(), 0), discarded_(g.edge_count(), 0) {
    std::iota(comp_.begin(), comp_.end(), 0);
    for (int v = 0; v < g.vertex_count(); ++v) members_[v] = {v};
  }

  bool selected(int e) const { return selected_[e]; }
  bool discarded(int e) const { return discarded_[e]; }
  bool pair_used(int u, int v) const { return used_pairs_.count({std::min(u, v), std::max(u, v)}) > 0; }
  bool connected() const { return members_.size() == 1; }
  int component(int v) const { return comp_[v]; }
  const RigidTransform2D& pose(int v) const { return pose_[v]; }

  // Places a consistent loop as one component. Only valid on a fresh state.
  void seed_with(const Loop& l) {
    const int root = l.vertices.front();
    for (int v : l.vertices) {
      if (v != root) members_.erase(v);
      comp_[v] = root;
      pose_[v] = l.poses.at(v);
    }
    members_[root] = l.vertices;
    for (int e : l.edges) mark_selected(e);
  }

  // Places every connected group of `edges` as one component at `poses`. Only
  // valid on a fresh state.
  void seed_with(const std::vector<int>& edges, const Poses& poses) {
    std::vector<int> parent(comp_.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
    for (int e : edges) parent[find(g_->edge(e).i)] = find(g_->edge(e).j);
    std::map<int, std::vector<int>> groups;
    for (int v = 0; v < static_cast<int>(comp_.size()); ++v) groups[find(v)].push_back(v);
    for (const auto& [r, vs] : groups) {
      if (vs.size() < 2) continue;
      for (int v : vs) {
        if (v != vs.front()) members_.erase(v);
        comp_[v] = vs.front();
        pose_[v] = *poses[v];
      }
      members_[vs.front()] = vs;
    }
    for (int e : edges) mark_selected(e);
  }

  bool try_attach(int e, Accept rule) {
    const auto& c = g_->edge(e);
    if (selected_[e] || discarded_[e] || pair_used(c.i, c.j)) return false;
    const int ci = comp_[c.i], cj = comp_[c.j];
    if (ci == cj) {
      bool ok;
      if (rule == Accept::within_tolerance) {
        const auto d = pose_difference(pose_[c.i] * c.transform, pose_[c.j], g_->pivot(c.j));
        ok = d.angle <= tol_.angle && d.distance <= tol_.translation;
      } else {
        ok = edge_cost(*g_, e, pose_[c.i], pose_[c.j]) < c.gamma;
      }
      if (ok) mark_selected(e);
      return ok;
    }
    // move the component with the larger smallest id into the other's frame
    const bool keep_i = members_[ci].front() < members_[cj].front();
    const int keep = keep_i ? ci : cj, move = keep_i ? cj : ci;
    const RigidTransform2D g = keep_i ? pose_[c.i] * c.transform * pose_[c.j].inverse()
                                      : pose_[c.j] * c.transform.inverse() * pose_[c.i].inverse();
    std::map<int, RigidTransform2D> placed;
    for (int v : members_[keep]) placed[v] = pose_[v];
    for (int v : members_[move]) placed[v] = g * pose_[v];
    if (cache_->across(members_[keep], members_[move], placed)) return false;
    for (int v : members_[move]) {
      pose_[v] = placed[v];
      comp_[v] = keep;
    }
    auto& k = members_[keep];
    k.insert(k.end(), members_[move].begin(), members_[move].end());
    std::sort(k.begin(), k.end());
    members_.erase(move);
    mark_selected(e);
    return true;
  }

  void discard_rivals() {
    for (int e = 0; e < g_->edge_count(); ++e)
      if (!selected_[e] && pair_used(g_->edge(e).i, g_->edge(e).j)) discarded_[e] = 1;
  }

  std::vector<int> selected_edges() const {
    std::vector<int> out;
    for (int e = 0; e < g_->edge_count(); ++e)
      if (selected_[e]) out.push_back(e);
    return out;
  }

  // Sum of f over selected edges at the current poses plus gamma over the rest.
  double value() const {
    double total = 0;
    for (int e = 0; e < g_->edge_count(); ++e) {
      const auto& c = g_->edge(e);
      total += selected_[e] ? edge_cost(*g_, e, pose_[c.i], pose_[c.j]) : c.gamma;
    }
    return total;
  }

  const std::vector<int>& largest_component() const {
    const std::vector<int>* best = nullptr;
    for (const auto& [root, m] : members_)
      if (!best || m.size() > best->size()) best = &m;
    return *best;
  }

 private:
  void mark_selected(int e) {
    selected_[e] = 1;
    used_pairs_.insert({std::min(g_->edge(e).i, g_->edge(e).j), std::max(g_->edge(e).i, g_->edge(e).j)});
  }

  const AssemblyGraph* g_;
  IntersectionCache* cache_;
  Tolerance tol_;
  std::vector<int> comp_;
  std::map<int, std::vector<int>> members_;
  std::vector<RigidTransform2D> pose_;
  std::vector<char> selected_;
  std::vector<char> discarded_;
  std::set<std::pair<int, int>> used_pairs_;
};

// (gamma desc, i, j, k); edges are already sorted by (i, j, k)
std::vector<int> edges_by_gamma(const AssemblyGraph& g) {
  std::vector<int> order(g.edge_count());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return g.edge(a).gamma > g.edge(b).gamma; });
  return order;
}

void greedy(const AssemblyGraph& g, Growth& s, Accept rule, bool stop_when_connected) {
  for (int e : edges_by_gamma(g)) {
    if (stop_when_connected && s.connected()) break;
    s.try_attach(e, rule);
  }
}

// Component label per vertex over the selected edges; -1 for isolated vertices.
std::vector<int> component_labels(const AssemblyGraph& g, const std::vector<int>& selected) {
  std::vector<int> label(g.vertex_count(), -1);
  for (int e : selected) label[g.edge(e).i] = label[g.edge(e).j] = 0;
  std::vector<int> parent(g.vertex_count());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
  for (int e : selected) parent[find(g.edge(e).i)] = find(g.edge(e).j);
  for (int v = 0; v < g.vertex_count(); ++v)
    if (label[v] == 0) label[v] = find(v);
  return label;
}

// Greedy attachment followed by local improvement: one more unselected edge is
// forced in ahead of the greedy pass and kept when the objective drops.
Growth grow_improved(const AssemblyGraph& g, const Growth& base, int max_passes = 4) {
  const auto order = edges_by_gamma(g);
  auto grow = [&](const std::vector<int>& forced, Growth& out) {
    for (int e : forced)
      if (!out.try_attach(e, Accept::lowers_objective)) return false;
    greedy(g, out, Accept::lowers_objective, false);
    return true;
  };
  std::vector<int> forced;
  Growth best = base;
  grow(forced, best);
  double best_value = best.value();
  for (int pass = 0; pass < max_passes; ++pass) {
    bool changed = false;
    for (int e : order) {
      if (best.selected(e) || base.selected(e)) continue;
      auto trial_forced = forced;
      trial_forced.push_back(e);
      Growth trial = base;
      if (!grow(trial_forced, trial)) continue;
      const double v = trial.value();
      if (v < best_value - 1e-12) {
        best = std::move(trial);
        best_value = v;
        forced = std::move(trial_forced);
        changed = true;
      }
    }
    if (!changed) break;
  }
  return best;
}

Assembly finish(const AssemblyGraph& g, const Growth& s, int anchor, std::string solver, const SolverOptions& opt) {
  Assembly a;
  a.solver = std::move(solver);
  a.selected = s.selected_edges();
  a.anchor = anchor >= 0 ? anchor : (g.vertex_count() > 0 ? s.largest_component().front() : -1);
  // re-express every component relative to its own anchor
  Poses init(g.vertex_count());
  std::map<int, int> comp_anchor;
  for (int v = 0; v < g.vertex_count(); ++v) {
    const int c = s.component(v);
    if (!comp_anchor.count(c)) comp_anchor[c] = v;
  }
  if (a.anchor >= 0) comp_anchor[s.component(a.anchor)] = a.anchor;
  for (int v = 0; v < g.vertex_count(); ++v) init[v] = s.pose(comp_anchor[s.component(v)]).inverse() * s.pose(v);
  a.poses = opt.refine ? refine_poses(g, a.selected, init, a.anchor).poses : init;
  a.objective = objective(g, a.poses, a.selected);
  return a;
}

}  // namespace

Assembly compose_best_first(const AssemblyGraph& g, const SolverOptions& opt) {
  IntersectionCache cache(g);
  Growth s(g, cache, opt.tol);
  greedy(g, s, Accept::within_tolerance, true);
  return finish(g, s, -1, "bf", opt);
}

Assembly compose_glc(const AssemblyGraph& g, const SolverOptions& opt) {
  IntersectionCache cache(g);
  Growth s(g, cache, opt.tol);
  GlcTrace trace;
  Rng rng(derive_seed(opt.seed, 0x61c));
  const long budget = static_cast<long>(opt.glc_steps_per_vertex) * g.vertex_count();
  long steps = 0;

  std::vector<int> starts(g.edge_count());
  std::iota(starts.begin(), starts.end(), 0);
  rng.shuffle(starts);

  // random depth-first search for a closed loop of at most kGlcMaxLoop edges
  // through the start edge
  std::vector<EdgeRef> path;
  std::vector<int> verts;
  std::map<int, RigidTransform2D> placed;
  auto try_fix = [&](const std::vector<EdgeRef>& cycle) {
    if (!is_closed(g, cycle, opt.tol)) return false;
    Loop l = make_loop(g, cycle);
    trace.found.push_back(l);
    Growth trial = s;
    for (const auto& r : cycle)
      if (!trial.selected(r.edge) && !trial.try_attach(r.edge, Accept::within_tolerance)) return false;
    s = std::move(trial);
    s.discard_rivals();
    trace.fixed.push_back(std::move(l));
    return true;
  };
  std::function<bool()> dfs = [&]() -> bool {
    if (++steps > budget) return false;
    const int cur = verts.back();
    std::vector<int> next = g.incident(cur);
    rng.shuffle(next);
    for (int e : next) {
      if (steps > budget) return false;
      if (s.discarded(e) || std::any_of(path.begin(), path.end(), [&](const EdgeRef& r) { return r.edge == e; }))
        continue;
      const EdgeRef r{e, g.edge(e).i == cur};
      const int v = g.head(r);
      if (v == verts.front()) {
        if (path.size() < 2) continue;
        path.push_back(r);
        const bool fixed = try_fix(path);
        path.pop_back();
        if (fixed) return true;
        continue;
      }
      if (std::find(verts.begin(), verts.end(), v) != verts.end()) continue;
      if (static_cast<int>(path.size()) + 1 >= kGlcMaxLoop) continue;
      const RigidTransform2D xv = placed.at(cur) * g.transform(r);
      bool hit = false;
      for (int u : verts) hit = hit || cache.intersects(u, placed.at(u), v, xv);
      if (hit) continue;
      path.push_back(r);
      verts.push_back(v);
      placed[v] = xv;
      if (dfs()) return true;
      placed.erase(v);
      verts.pop_back();
      path.pop_back();
    }
    return false;
  };

  for (int e : starts) {
    if (s.connected() || steps >= budget) break;
    if (s.selected(e) || s.discarded(e)) continue;
    path = {EdgeRef{e, true}};
    verts = {g.edge(e).i, g.edge(e).j};
    placed = {{g.edge(e).i, RigidTransform2D::identity()}, {g.edge(e).j, g.edge(e).transform}};
    if (cache.intersects(verts[0], placed[verts[0]], verts[1], placed[verts[1]])) continue;
    dfs();
  }
  greedy(g, s, Accept::lowers_objective, false);
  Assembly a = finish(g, s, -1, "glc", opt);
  a.trace = std::move(trace);
  return a;
}

Assembly compose_hlm(const AssemblyGraph& g, const SolverOptions& opt) {
  IntersectionCache cache(g);
  Growth s(g, cache, opt.tol);
  Assembly result;
  std::vector<std::vector<Loop>> levels{find_induced_loops(g, opt.tol, cache)};
  std::size_t attempts = 0;

  if (levels[0].empty()) {
    Assembly a = finish(g, grow_improved(g, s), -1, "hlm", opt);
    a.notes.push_back("no closed induced loops; greedy attachment only");
    a.level_sizes = {0};
    return a;
  }

  // bottom-up
  const int max_levels = std::max(1, g.vertex_count());
  while (levels.back().size() >= 2 && static_cast<int>(levels.size()) <= max_levels) {
    const auto& cur = levels.back();
    struct Pair {
      std::size_t p, q;
      double score;
    };
    std::vector<Pair> pairs;
    for (std::size_t p = 0; p < cur.size(); ++p)
      for (std::size_t q = p + 1; q < cur.size(); ++q) {
        const auto& ep = cur[p].edges;
        const auto& eq = cur[q].edges;
        if (std::includes(ep.begin(), ep.end(), eq.begin(), eq.end()) ||
            std::includes(eq.begin(), eq.end(), ep.begin(), ep.end()))
          continue;
        bool share = false;
        for (int e : ep)
          if (std::binary_search(eq.begin(), eq.end(), e)) {
            share = true;
            break;
          }
        if (share) pairs.push_back({p, q, cur[p].score + cur[q].score});
      }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.score > b.score; });
    const auto cap = static_cast<std::size_t>(std::max(opt.theta_m, 1));
    if (pairs.size() > cap) {
      const std::size_t head = cap / 2;
      std::vector<Pair> rest(pairs.begin() + static_cast<long>(head), pairs.end());
      Rng rng(derive_seed(opt.seed, levels.size()));
      rng.shuffle(rest);
      pairs.resize(head);
      pairs.insert(pairs.end(), rest.begin(), rest.begin() + static_cast<long>(cap - head));
    }
    std::vector<Loop> next;
    std::set<std::vector<int>> seen;
    for (const auto& pr : pairs) {
      ++attempts;
      MergeResult m = merge_loops(g, cur[pr.p], cur[pr.q], opt.tol, cache);
      if (m.verdict != MergeVerdict::merged || !seen.insert(m.loop.edges).second) continue;
      next.push_back(std::move(m.loop));
    }
    if (next.empty()) break;
    levels.push_back(std::move(next));
  }

  // l* from the last level
  const auto& last = levels.back();
  std::size_t best = 0;
  for (std::size_t k = 1; k < last.size(); ++k)
    if (last[k].score > last[best].score) best = k;
  Loop star = last[best];

  // top-down absorption
  for (int lvl = static_cast<int>(levels.size()) - 2; lvl >= 0; --lvl) {
    std::vector<std::size_t> order(levels[lvl].size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return levels[lvl][a].score > levels[lvl][b].score; });
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t k : order) {
        const Loop& l = levels[lvl][k];
        const bool valuable = std::any_of(l.vertices.begin(), l.vertices.end(), [&](int v) {
          return !std::binary_search(star.vertices.begin(), star.vertices.end(), v);
        });
        if (!valuable) continue;
        bool share = false;
        for (int e : l.edges) share = share || std::binary_search(star.edges.begin(), star.edges.end(), e);
        if (!share) continue;
        MergeResult m = merge_loops(g, star, l, opt.tol, cache);
        if (m.verdict != MergeVerdict::merged) continue;
        star = std::move(m.loop);
        changed = true;
      }
    }
  }

  // The merged structure is also tried with one edge left out, and not at all;
  // the lowest refined objective wins.
  const int anchor = star.vertices.front();
  s.seed_with(star);
  result = finish(g, grow_improved(g, s), anchor, "hlm", opt);
  auto consider = [&](Assembly a) {
    if (a.objective < result.objective - 1e-12) result = std::move(a);
  };
  for (int drop : star.edges) {
    Loop l = star;
    l.cycle.clear();
    l.edges.erase(std::find(l.edges.begin(), l.edges.end(), drop));
    Growth t(g, cache, opt.tol);
    t.seed_with(l);
    consider(finish(g, grow_improved(g, t), anchor, "hlm", opt));
  }
  consider(finish(g, grow_improved(g, Growth(g, cache, opt.tol)), -1, "hlm", opt));

  // Local search from refined poses: regrow after leaving out one selected edge
  // (or none), until no move lowers the objective.
  for (int round = 0; round < kHlmSearchRounds; ++round) {
    const Assembly current = result;
    for (int drop = -1; drop < static_cast<int>(current.selected.size()); ++drop) {
      std::vector<int> keep = current.selected;
      if (drop >= 0) keep.erase(keep.begin() + drop);
      Growth t(g, cache, opt.tol);
      t.seed_with(keep, current.poses);
      consider(finish(g, grow_improved(g, t), anchor, "hlm", opt));
    }
    // closing edges whose cost only drops below gamma once the poses are refined
    const auto comp = component_labels(g, current.selected);
    std::set<std::pair<int, int>> used;
    for (int e : current.selected) used.insert({std::min(g.edge(e).i, g.edge(e).j), std::max(g.edge(e).i, g.edge(e).j)});
    for (int e = 0; e < g.edge_count(); ++e) {
      const auto& c = g.edge(e);
      if (used.count({std::min(c.i, c.j), std::max(c.i, c.j)}) || comp[c.i] != comp[c.j] || comp[c.i] < 0) continue;
      std::vector<int> keep = current.selected;
      keep.insert(std::lower_bound(keep.begin(), keep.end(), e), e);
      Growth t(g, cache, opt.tol);
      t.seed_with(keep, current.poses);
      consider(finish(g, t, anchor, "hlm", opt));
    }
    if (result.objective >= current.objective - 1e-12) break;
  }
  for (const auto& l : levels) result.level_sizes.push_back(l.size());
  result.merge_attempts = attempts;
  return result;
}

Assembly compose(const std::string& solver, const AssemblyGraph& g, const SolverOptions& opt) {
  if (solver == "bf") return compose_best_first(g, opt);
  if (solver == "glc") return compose_glc(g, opt);
  if (solver == "hlm") return compose_hlm(g, opt);
  throw ParameterError("unknown solver '" + solver + "' (expected bf, glc or hlm)");
}

}  // namespace jigsaw
