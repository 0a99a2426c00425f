#include "oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace oracle {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double wrap(double a) {
  a = std::fmod(a, 2 * kPi);
  if (a <= -kPi) a += 2 * kPi;
  if (a > kPi) a -= 2 * kPi;
  return a;
}

Pose compose(const Pose& a, const Pose& b) {
  const double c = std::cos(a.th), s = std::sin(a.th);
  return {wrap(a.th + b.th), a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y};
}

Pose inverse(const Pose& p) {
  const double c = std::cos(p.th), s = std::sin(p.th);
  return {wrap(-p.th), -(c * p.x + s * p.y), -(-s * p.x + c * p.y)};
}

std::array<double, 2> apply(const Pose& p, double x, double y) {
  const double c = std::cos(p.th), s = std::sin(p.th);
  return {c * x - s * y + p.x, s * x + c * y + p.y};
}

Pose from(const jigsaw::RigidTransform2D& t) {
  // read back through the matrix so the library's angle bookkeeping is not reused
  const auto m = t.matrix();
  return {std::atan2(m[3], m[0]), m[2], m[5]};
}

jigsaw::RigidTransform2D to(const Pose& p) { return {p.th, p.x, p.y}; }

std::array<double, 3> phi(const Pose& p) { return {p.x, p.y, wrap(p.th)}; }

long overlap_pixels(const jigsaw::Image& a, const Pose& pa, const jigsaw::Image& b, const Pose& pb) {
  const Pose rel = compose(inverse(pb), pa);  // a-local -> b-local
  const double ra = std::hypot(a.width, a.height), rb = std::hypot(b.width, b.height);
  const auto ca = apply(pa, a.width / 2.0, a.height / 2.0);
  const auto cb = apply(pb, b.width / 2.0, b.height / 2.0);
  if (std::hypot(ca[0] - cb[0], ca[1] - cb[1]) > (ra + rb) / 2 + 2) return 0;
  long n = 0;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      if (a.at(x, y).a == 0) continue;
      const auto q = apply(rel, x + 0.5, y + 0.5);
      const int qx = static_cast<int>(std::floor(q[0])), qy = static_cast<int>(std::floor(q[1]));
      if (qx >= 0 && qy >= 0 && qx < b.width && qy < b.height && b.at(qx, qy).a != 0) ++n;
    }
  return n;
}

bool intersects(const jigsaw::Image& a, const Pose& pa, const jigsaw::Image& b, const Pose& pb) {
  const double area = static_cast<double>(std::min(a.opaque_count(), b.opaque_count()));
  return static_cast<double>(overlap_pixels(a, pa, b, pb)) > std::max(30.0, 0.02 * area);
}

namespace {

double residual_sq(const Edge& e, const std::vector<Pose>& x) {
  const auto r = phi(compose(inverse(e.t), compose(inverse(x[e.i]), x[e.j])));
  return r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
}

// Least-squares fit of the poses in `comp` (first vertex fixed) to `es`.
void fit(std::vector<Pose>& x, const std::vector<int>& comp, const std::vector<Edge>& es) {
  if (es.size() + 1 <= comp.size()) return;  // a tree is fitted exactly by chaining
  std::map<int, int> col;
  for (std::size_t k = 1; k < comp.size(); ++k) col[comp[k]] = 3 * static_cast<int>(k - 1);
  const int dim = 3 * static_cast<int>(comp.size() - 1);
  auto residuals = [&](const std::vector<Pose>& xs) {
    Eigen::VectorXd r(3 * es.size());
    for (std::size_t k = 0; k < es.size(); ++k) {
      const auto v = phi(compose(inverse(es[k].t), compose(inverse(xs[es[k].i]), xs[es[k].j])));
      r.segment<3>(3 * k) << v[0], v[1], v[2];
    }
    return r;
  };
  auto shifted = [&](const std::vector<Pose>& xs, const Eigen::VectorXd& d) {
    std::vector<Pose> out = xs;
    for (const auto& [v, c] : col) out[v] = {xs[v].th + d[c + 2], xs[v].x + d[c], xs[v].y + d[c + 1]};
    return out;
  };
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd r0 = residuals(x);
    const double cost = r0.squaredNorm();
    Eigen::MatrixXd J(r0.size(), dim);
    for (int c = 0; c < dim; ++c) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(dim);
      d[c] = 1e-6;
      J.col(c) = (residuals(shifted(x, d)) - residuals(shifted(x, -d))) / 2e-6;
    }
    const Eigen::MatrixXd H = J.transpose() * J + 1e-12 * Eigen::MatrixXd::Identity(dim, dim);
    const Eigen::VectorXd step = H.ldlt().solve(-J.transpose() * r0);
    double s = 1;
    bool moved = false;
    for (int h = 0; h < 40; ++h, s *= 0.5) {
      auto trial = shifted(x, s * step);
      const double c1 = residuals(trial).squaredNorm();
      if (c1 < cost) {
        x = std::move(trial);
        moved = cost - c1 > 1e-13 * std::max(cost, 1e-300);
        break;
      }
    }
    if (!moved) break;
  }
}

}  // namespace

Selection evaluate_selection(const std::vector<const jigsaw::Image*>& rasters, const std::vector<Edge>& edges,
                             const std::vector<int>& chosen) {
  const int n = static_cast<int>(rasters.size());
  Selection out;
  out.edges = chosen;
  std::sort(out.edges.begin(), out.edges.end());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<char> used(edges.size(), 0);
  std::map<std::pair<int, int>, int> pair_count;
  for (int e : chosen) {
    used[e] = 1;
    if (++pair_count[{std::min(edges[e].i, edges[e].j), std::max(edges[e].i, edges[e].j)}] > 1) {
      out.value = inf;
      return out;
    }
  }
  double penalty = 0;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (!used[e]) penalty += edges[e].w;

  // components by flood fill, poses by chaining from the smallest id
  std::vector<std::vector<int>> adj(n);
  for (int e : chosen) {
    adj[edges[e].i].push_back(e);
    adj[edges[e].j].push_back(e);
  }
  std::vector<Pose> x(n);
  std::vector<int> comp_of(n, -1);
  double f = 0;
  for (int s = 0; s < n; ++s) {
    if (comp_of[s] >= 0) continue;
    std::vector<int> comp{s};
    comp_of[s] = s;
    x[s] = {};
    for (std::size_t q = 0; q < comp.size(); ++q) {
      const int u = comp[q];
      for (int e : adj[u]) {
        const int v = edges[e].i == u ? edges[e].j : edges[e].i;
        if (comp_of[v] >= 0) continue;
        comp_of[v] = s;
        x[v] = edges[e].i == u ? compose(x[u], edges[e].t) : compose(x[u], inverse(edges[e].t));
        comp.push_back(v);
      }
    }
    std::vector<Edge> es;
    for (int e : chosen)
      if (comp_of[edges[e].i] == s) es.push_back(edges[e]);
    fit(x, comp, es);
    for (const auto& e : es) f += residual_sq(e, x);
    for (std::size_t a = 0; a < comp.size(); ++a)
      for (std::size_t b = a + 1; b < comp.size(); ++b)
        if (intersects(*rasters[comp[a]], x[comp[a]], *rasters[comp[b]], x[comp[b]])) {
          out.value = inf;
          return out;
        }
  }
  out.value = f + penalty;
  out.poses = std::move(x);
  return out;
}

Selection brute_force_minimum(const std::vector<const jigsaw::Image*>& rasters, const std::vector<Edge>& edges) {
  const int m = static_cast<int>(edges.size());
  if (m > 20) throw std::invalid_argument("too many edges for exhaustive search");
  std::vector<std::pair<double, std::uint32_t>> order;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    double lb = 0;
    for (int e = 0; e < m; ++e)
      if (!(mask >> e & 1u)) lb += edges[e].w;
    order.emplace_back(lb, mask);
  }
  std::sort(order.begin(), order.end());
  Selection best;
  best.value = std::numeric_limits<double>::infinity();
  for (const auto& [lb, mask] : order) {
    if (lb >= best.value) break;
    std::vector<int> chosen;
    for (int e = 0; e < m; ++e)
      if (mask >> e & 1u) chosen.push_back(e);
    auto s = evaluate_selection(rasters, edges, chosen);
    if (s.value < best.value) best = std::move(s);
  }
  return best;
}

int count_components(const jigsaw::Image& image) {
  std::vector<int> seen(static_cast<std::size_t>(image.width) * image.height, 0);
  int count = 0;
  for (int y0 = 0; y0 < image.height; ++y0)
    for (int x0 = 0; x0 < image.width; ++x0) {
      if (!image.opaque(x0, y0) || seen[y0 * image.width + x0]) continue;
      ++count;
      std::vector<std::pair<int, int>> stack{{x0, y0}};
      seen[y0 * image.width + x0] = 1;
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        const int nb[4][2] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
        for (const auto& q : nb)
          if (image.opaque(q[0], q[1]) && !seen[q[1] * image.width + q[0]]) {
            seen[q[1] * image.width + q[0]] = 1;
            stack.push_back({q[0], q[1]});
          }
      }
    }
  return count;
}

std::vector<std::pair<int, int>> label_adjacency(const jigsaw::PuzzleBundle& bundle, int min_contacts) {
  const int w = bundle.source_width, h = bundle.source_height;
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  for (std::size_t id = 0; id < bundle.size(); ++id) {
    const auto& r = bundle.fragments[id].raster();
    const Pose g = from(bundle.groundtruth[id]);
    for (int y = 0; y < r.height; ++y)
      for (int x = 0; x < r.width; ++x) {
        if (r.at(x, y).a == 0) continue;
        const auto p = apply(g, x + 0.5, y + 0.5);
        const int sx = static_cast<int>(std::floor(p[0])), sy = static_cast<int>(std::floor(p[1]));
        if (sx >= 0 && sy >= 0 && sx < w && sy < h) label[sy * w + sx] = static_cast<int>(id);
      }
  }
  std::map<std::pair<int, int>, int> contacts;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int a = label[y * w + x];
      if (a < 0) continue;
      for (const auto& [dx, dy] : {std::pair{1, 0}, std::pair{0, 1}}) {
        if (x + dx >= w || y + dy >= h) continue;
        const int b = label[(y + dy) * w + x + dx];
        if (b >= 0 && b != a) ++contacts[{std::min(a, b), std::max(a, b)}];
      }
    }
  std::vector<std::pair<int, int>> out;
  for (const auto& [key, c] : contacts)
    if (c >= min_contacts) out.push_back(key);
  return out;
}

int best_color_split(const std::vector<jigsaw::Color3>& colors) {
  const int n = static_cast<int>(colors.size());
  auto sse = [&](int lo, int hi) {
    double mr = 0, mg = 0, mb = 0;
    for (int i = lo; i < hi; ++i) mr += colors[i].r, mg += colors[i].g, mb += colors[i].b;
    const double k = hi - lo;
    mr /= k, mg /= k, mb /= k;
    double s = 0;
    for (int i = lo; i < hi; ++i)
      s += (colors[i].r - mr) * (colors[i].r - mr) + (colors[i].g - mg) * (colors[i].g - mg) +
           (colors[i].b - mb) * (colors[i].b - mb);
    return s;
  };
  int best = 1;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int m = 1; m < n; ++m) {
    const double c = sse(0, m) + sse(m, n);
    if (c < best_cost - 1e-9) {
      best_cost = c;
      best = m;
    }
  }
  return best;
}

}  // namespace oracle
