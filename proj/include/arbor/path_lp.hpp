#pragma once

#include <string>
#include <vector>

#include "arbor/instance.hpp"

namespace arbor {

// Prefix tree of all source paths of a layered instance, in BFS order:
// parents precede children and siblings are contiguous.
class PathIndex {
 public:
  struct Node {
    VertexId vertex;
    int layer;
    std::int32_t parent;
    std::int32_t first_child;
    std::int32_t child_count;
    bool closed;  // ends at a sink
  };

  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::int32_t i) const { return nodes_[i]; }
  VertexId source() const { return nodes_.empty() ? kNone : nodes_[0].vertex; }
  int depth() const { return depth_; }
  std::vector<VertexId> path(std::int32_t i) const;
  // node for an explicit vertex sequence, kNone if absent
  std::int32_t find(const std::vector<VertexId>& path) const;

 private:
  friend PathIndex enumerate_paths_from(const LayeredInstance&, VertexId, std::size_t);
  std::vector<Node> nodes_;
  int depth_ = 0;
};

inline constexpr std::size_t kDefaultPathCap = 200000;

// Single-source instances only.
PathIndex enumerate_paths(const LayeredInstance& li, std::size_t cap = kDefaultPathCap);
PathIndex enumerate_paths_from(const LayeredInstance& li, VertexId source, std::size_t cap = kDefaultPathCap);

struct FractionalPathSolution {
  std::vector<double> x;  // indexed by PathIndex node
};

enum class Sense { eq, le };
enum class RowKind { demand, capacity, root };

struct LpRow {
  Sense sense;
  RowKind kind;
  std::vector<std::pair<int, double>> coeffs;
  double rhs;
};

struct LpProblem {
  int vars = 0;
  std::vector<LpRow> rows;
  int count(RowKind kind) const;
};

LpProblem build_path_lp(const PathIndex& pi, int k);
std::string dump_lp(const LpProblem& lp);
double max_residual(const LpProblem& lp, const std::vector<double>& x);

struct LpOutcome {
  bool feasible = false;
  std::vector<double> x;
  std::vector<int> certificate;  // rows whose artificial stays positive
  double artificial = 0;
  long pivots = 0;
};

// Phase-1 simplex with Bland's rule on a dense tableau.
LpOutcome solve_lp_feasibility(const LpProblem& lp, double tol = 1e-9, Exec exec = Exec::parallel);

struct MaxKResult {
  int k_star = 0;
  FractionalPathSolution witness;
  PathIndex index;
};

MaxKResult max_feasible_k(const LayeredInstance& li, std::size_t cap = kDefaultPathCap, double tol = 1e-9);

// Simplex pivot row update, exposed for the kernel benchmark.
void pivot_rows(std::vector<double>& tab, int rows, int width, int pr, int pc, Exec exec);

}  // namespace arbor
