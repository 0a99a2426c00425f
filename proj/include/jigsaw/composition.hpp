#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "jigsaw/pairwise.hpp"

namespace jigsaw {

struct Tolerance {
  double angle = deg_to_rad(3.0);
  double translation = 9.0;  // px
};

// 3 degrees and 1.5% of the source diagonal.
Tolerance default_tolerance(double source_diagonal);

// One traversal of an edge: forward goes i -> j and uses T, backward uses T^-1.
struct EdgeRef {
  int edge = 0;
  bool forward = true;
  friend bool operator==(const EdgeRef&, const EdgeRef&) = default;
};

using Poses = std::vector<std::optional<RigidTransform2D>>;

// Directed multigraph over fragments. Edges are kept sorted by (i, j, k).
class AssemblyGraph {
 public:
  AssemblyGraph(std::span<const Fragment> fragments, std::vector<AlignmentCandidate> edges);

  int vertex_count() const { return static_cast<int>(fragments_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<AlignmentCandidate>& edges() const { return edges_; }
  const AlignmentCandidate& edge(int e) const { return edges_[e]; }
  const Fragment& fragment(int v) const { return fragments_[v]; }
  std::span<const Fragment> fragments() const { return fragments_; }
  Point2 pivot(int v) const { return fragments_[v].centroid(); }

  const std::vector<int>& incident(int v) const { return incident_[v]; }
  // Edge indices joining u and v in either direction.
  const std::vector<int>& between(int u, int v) const;

  int tail(EdgeRef r) const { return r.forward ? edges_[r.edge].i : edges_[r.edge].j; }
  int head(EdgeRef r) const { return r.forward ? edges_[r.edge].j : edges_[r.edge].i; }
  // Pose of head in tail's frame.
  RigidTransform2D transform(EdgeRef r) const {
    return r.forward ? edges_[r.edge].transform : edges_[r.edge].transform.inverse();
  }

 private:
  std::span<const Fragment> fragments_;
  std::vector<AlignmentCandidate> edges_;
  std::vector<std::vector<int>> incident_;
  std::map<std::pair<int, int>, std::vector<int>> pairs_;
};

// Memoised pairwise intersection test over placed fragments.
// Pairwise intersection verdicts under assembly_tolerance, memoised on relative pose.
class IntersectionCache {
 public:
  explicit IntersectionCache(const AssemblyGraph& g) : graph_(&g) {}
  bool intersects(int u, const RigidTransform2D& xu, int v, const RigidTransform2D& xv);
  // True when any two listed vertices intersect under `poses`.
  bool any(std::span<const int> vertices, const std::map<int, RigidTransform2D>& poses);
  // True when some vertex of `a` intersects some vertex of `b` (a and b disjoint).
  bool across(std::span<const int> a, std::span<const int> b, const std::map<int, RigidTransform2D>& poses);

 private:
  const AssemblyGraph* graph_;
  // (u, v, quantised pose of v in u's frame), u < v
  std::map<std::tuple<int, int, long long, long long, long long>, bool> memo_;
};

struct Loop {
  std::vector<EdgeRef> cycle;  // set for enumerated loops, empty after merging
  std::vector<int> edges;      // sorted edge indices
  std::vector<int> vertices;   // sorted
  std::map<int, RigidTransform2D> poses;
  double score = 0;
};

struct LoopResidual {
  double angle = 0;
  double translation = 0;
};

// Residual of the composed cycle against identity. Throws MalformedLoop when the
// references do not chain head to tail or do not close.
LoopResidual loop_residual(const AssemblyGraph& g, std::span<const EdgeRef> cycle);
bool is_closed(const AssemblyGraph& g, std::span<const EdgeRef> cycle, const Tolerance& tol);

// Builds a Loop (poses anchored at the first tail, score = sum of gamma) from a cycle.
Loop make_loop(const AssemblyGraph& g, std::span<const EdgeRef> cycle);

// All closed, induced, intersection-free cycles of length 3 and 4. A 4-cycle whose
// diagonal pair carries an edge consistent with the cycle's poses has a chord and
// is left out.
std::vector<Loop> find_induced_loops(const AssemblyGraph& g, const Tolerance& tol, IntersectionCache& cache);

enum class MergeVerdict { merged, pose_conflict, intersection };

struct MergeResult {
  MergeVerdict verdict = MergeVerdict::merged;
  Loop loop;
};

// Throws NotMergeable when lp and lq share no edge.
MergeResult merge_loops(const AssemblyGraph& g, const Loop& lp, const Loop& lq, const Tolerance& tol,
                        IntersectionCache& cache);

// f = e^T e with e = phi(T^-1 X_i^-1 X_j).
double edge_cost(const AssemblyGraph& g, int e, const RigidTransform2D& xi, const RigidTransform2D& xj);

// Sum of edge_cost over selected edges plus gamma over the rest. +inf when selected edges make
// fragments of one component intersect or select two edges of one pair. Throws
// InvalidInput when a selected edge touches a vertex without a pose.
double objective(const AssemblyGraph& g, const Poses& poses, const std::vector<int>& selected);

struct RefineResult {
  Poses poses;
  std::vector<double> history;  // sum of f over selected edges, per iteration
};

// Gauss-Newton on the selected edges with the lowest-id vertex of each component
// held fixed (or `anchor` for its component). Steps that would make an
// intersection-free component intersect are rejected by the line search.
RefineResult refine_poses(const AssemblyGraph& g, const std::vector<int>& selected, const Poses& initial,
                          int anchor = -1);

// Poses by chaining selected edges breadth-first from each component's lowest id
// (or `anchor`).
Poses chain_poses(const AssemblyGraph& g, const std::vector<int>& selected, int anchor = -1);

struct SolverOptions {
  Tolerance tol;
  std::uint64_t seed = 0;
  int theta_m = 500;
  int glc_steps_per_vertex = 50;
  bool refine = true;
};

struct GlcTrace {
  std::vector<Loop> found;  // closed loops in discovery order
  std::vector<Loop> fixed;
};

struct Assembly {
  std::string solver;
  std::vector<int> selected;  // sorted edge indices
  Poses poses;
  int anchor = -1;
  double objective = 0;
  std::vector<std::string> notes;
  GlcTrace trace;                        // glc only
  std::vector<std::size_t> level_sizes;  // hlm only
  std::size_t merge_attempts = 0;        // hlm only
};

Assembly compose_best_first(const AssemblyGraph& g, const SolverOptions& opt);
Assembly compose_glc(const AssemblyGraph& g, const SolverOptions& opt);
Assembly compose_hlm(const AssemblyGraph& g, const SolverOptions& opt);
// "bf", "glc" or "hlm"; throws ParameterError otherwise.
Assembly compose(const std::string& solver, const AssemblyGraph& g, const SolverOptions& opt);

}  // namespace jigsaw
