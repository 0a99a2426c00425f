#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

#include "jigsaw/composition.hpp"
#include "jigsaw/errors.hpp"

namespace jigsaw {
namespace {

constexpr int kMaxIterations = 25;
constexpr double kMinRelativeDecrease = 1e-8;

std::array<double, 3> residual(const RigidTransform2D& t, const RigidTransform2D& xi, const RigidTransform2D& xj) {
  return phi(t.inverse() * xi.inverse() * xj);
}

// Components of the selected subgraph; vertices untouched by selection are singletons.
std::vector<std::vector<int>> components(const AssemblyGraph& g, const std::vector<int>& selected) {
  const int n = g.vertex_count();
  std::vector<std::vector<int>> adj(n);
  for (int e : selected) {
    adj[g.edge(e).i].push_back(g.edge(e).j);
    adj[g.edge(e).j].push_back(g.edge(e).i);
  }
  std::vector<int> seen(n, 0);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<int> comp{s};
    seen[s] = 1;
    for (std::size_t k = 0; k < comp.size(); ++k)
      for (int v : adj[comp[k]])
        if (!seen[v]) {
          seen[v] = 1;
          comp.push_back(v);
        }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

double sum_cost(const AssemblyGraph& g, const std::vector<int>& edges, const std::vector<RigidTransform2D>& x) {
  double s = 0;
  for (int e : edges) s += edge_cost(g, e, x[g.edge(e).i], x[g.edge(e).j]);
  return s;
}

}  // namespace

double edge_cost(const AssemblyGraph& g, int e, const RigidTransform2D& xi, const RigidTransform2D& xj) {
  const auto r = residual(g.edge(e).transform, xi, xj);
  return r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
}

double objective(const AssemblyGraph& g, const Poses& poses, const std::vector<int>& selected) {
  std::vector<char> chosen(g.edge_count(), 0);
  std::map<std::pair<int, int>, int> per_pair;
  double total = 0;
  for (int e : selected) {
    const auto& c = g.edge(e);
    if (!poses.at(c.i) || !poses.at(c.j))
      throw InvalidInput("selected edge (" + std::to_string(c.i) + ", " + std::to_string(c.j) + ") lacks a pose");
    if (++per_pair[{std::min(c.i, c.j), std::max(c.i, c.j)}] > 1) return std::numeric_limits<double>::infinity();
    chosen[e] = 1;
    total += edge_cost(g, e, *poses[c.i], *poses[c.j]);
  }
  for (int e = 0; e < g.edge_count(); ++e)
    if (!chosen[e]) total += g.edge(e).gamma;

  IntersectionCache cache(g);
  for (const auto& comp : components(g, selected)) {
    if (comp.size() < 2) continue;
    std::map<int, RigidTransform2D> placed;
    for (int v : comp) placed[v] = *poses[v];
    if (cache.any(comp, placed)) return std::numeric_limits<double>::infinity();
  }
  return total;
}

Poses chain_poses(const AssemblyGraph& g, const std::vector<int>& selected, int anchor) {
  const int n = g.vertex_count();
  std::vector<std::vector<int>> inc(n);
  for (int e : selected) {
    inc[g.edge(e).i].push_back(e);
    inc[g.edge(e).j].push_back(e);
  }
  Poses poses(n);
  for (const auto& comp : components(g, selected)) {
    const int root = std::find(comp.begin(), comp.end(), anchor) != comp.end() ? anchor : comp.front();
    poses[root] = RigidTransform2D::identity();
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int e : inc[u]) {
        const EdgeRef r{e, g.edge(e).i == u};
        const int v = g.head(r);
        if (poses[v]) continue;
        poses[v] = *poses[u] * g.transform(r);
        q.push(v);
      }
    }
  }
  return poses;
}

RefineResult refine_poses(const AssemblyGraph& g, const std::vector<int>& selected, const Poses& initial,
                          int anchor) {
  const int n = g.vertex_count();
  RefineResult out;
  out.poses = initial;
  out.poses.resize(n);
  {
    const Poses chained = chain_poses(g, selected, anchor);
    for (int v = 0; v < n; ++v)
      if (!out.poses[v]) out.poses[v] = chained[v];
  }
  std::vector<RigidTransform2D> x(n);
  for (int v = 0; v < n; ++v) x[v] = *out.poses[v];

  const auto comps = components(g, selected);
  std::vector<int> comp_of(n, -1);
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (int v : comps[c]) comp_of[v] = static_cast<int>(c);
  std::vector<std::vector<int>> comp_edges(comps.size());
  for (int e : selected) comp_edges[comp_of[g.edge(e).i]].push_back(e);

  out.history.push_back(sum_cost(g, selected, x));
  // components are independent; each runs its own iterations and the history
  // records the total after every round
  std::vector<char> done(comps.size(), 0);
  for (std::size_t c = 0; c < comps.size(); ++c) done[c] = comp_edges[c].empty();

  // A component that starts intersection-free must stay that way; with identity
  // weights a small rotation is almost free and can swing far fragments into each other.
  // Each trial gets a fresh cache: the memo rounds poses, and tiny line-search steps
  // would otherwise reuse verdicts from neighbouring trials.
  auto intersects = [&](const std::vector<int>& comp, const std::vector<RigidTransform2D>& xs) {
    std::map<int, RigidTransform2D> placed;
    for (int v : comp) placed[v] = xs[v];
    IntersectionCache cache(g);
    return cache.any(comp, placed);
  };
  std::vector<char> guard(comps.size(), 0);
  for (std::size_t c = 0; c < comps.size(); ++c) guard[c] = !done[c] && !intersects(comps[c], x);
  for (int it = 0; it < kMaxIterations; ++it) {
    bool any = false;
    for (std::size_t c = 0; c < comps.size(); ++c) {
      if (done[c]) continue;
      const auto& comp = comps[c];
      const int root = std::find(comp.begin(), comp.end(), anchor) != comp.end() ? anchor : comp.front();
      std::map<int, int> var;  // vertex -> first column
      for (int v : comp)
        if (v != root) var[v] = 3 * static_cast<int>(var.size());
      const int dim = 3 * static_cast<int>(var.size());
      Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim);
      for (int e : comp_edges[c]) {
        const auto& cand = g.edge(e);
        const RigidTransform2D& xi = x[cand.i];
        const RigidTransform2D& xj = x[cand.j];
        const auto r3 = residual(cand.transform, xi, xj);
        const Eigen::Vector3d r(r3[0], r3[1], r3[2]);
        const double a = -(cand.transform.theta() + xi.theta());
        Eigen::Matrix2d Rt;
        Rt << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        const double ci = std::cos(xi.theta()), si = std::sin(xi.theta());
        const Eigen::Vector2d dt(xj.tx() - xi.tx(), xj.ty() - xi.ty());
        Eigen::Matrix2d dRi;  // derivative of R(-theta_i) w.r.t. theta_i
        dRi << -si, ci, -ci, -si;
        const double ct = std::cos(-cand.transform.theta()), st = std::sin(-cand.transform.theta());
        Eigen::Matrix2d RT;
        RT << ct, -st, st, ct;
        Eigen::Matrix<double, 3, 3> Ji = Eigen::Matrix3d::Zero(), Jj = Eigen::Matrix3d::Zero();
        Ji.block<2, 2>(0, 0) = -Rt;
        Ji.block<2, 1>(0, 2) = RT * dRi * dt;
        Ji(2, 2) = -1;
        Jj.block<2, 2>(0, 0) = Rt;
        Jj(2, 2) = 1;
        const auto vi = var.find(cand.i), vj = var.find(cand.j);
        if (vi != var.end()) {
          H.block<3, 3>(vi->second, vi->second) += Ji.transpose() * Ji;
          grad.segment<3>(vi->second) += Ji.transpose() * r;
        }
        if (vj != var.end()) {
          H.block<3, 3>(vj->second, vj->second) += Jj.transpose() * Jj;
          grad.segment<3>(vj->second) += Jj.transpose() * r;
        }
        if (vi != var.end() && vj != var.end()) {
          H.block<3, 3>(vi->second, vj->second) += Ji.transpose() * Jj;
          H.block<3, 3>(vj->second, vi->second) += Jj.transpose() * Ji;
        }
      }
      const Eigen::VectorXd step = H.ldlt().solve(-grad);
      const double before = sum_cost(g, comp_edges[c], x);
      double step_size = 1.0;
      bool improved = false;
      for (int halving = 0; halving < 30 && step.allFinite(); ++halving, step_size *= 0.5) {
        std::vector<RigidTransform2D> trial = x;
        for (const auto& [v, col] : var)
          trial[v] = RigidTransform2D(x[v].theta() + step_size * step[col + 2], x[v].tx() + step_size * step[col],
                                      x[v].ty() + step_size * step[col + 1]);
        const double after = sum_cost(g, comp_edges[c], trial);
        if (after < before && guard[c] && intersects(comp, trial)) continue;
        if (after <= before) {
          improved = after < before;
          if (improved) x = std::move(trial);
          if (!improved || (before - after) <= kMinRelativeDecrease * before) done[c] = 1;
          break;
        }
      }
      if (!improved) done[c] = 1;
      any = any || improved;
    }
    if (!any) break;
    out.history.push_back(sum_cost(g, selected, x));
  }
  for (int v = 0; v < n; ++v) out.poses[v] = x[v];
  return out;
}

}  // namespace jigsaw
