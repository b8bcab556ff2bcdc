#pragma once

#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "arbor/forest.hpp"
#include "arbor/path_lp.hpp"

namespace arbor {

// Exact weights: a node at length d carries g^(H-d) where H is the multiset depth,
// so y(p) = g^-d after dividing by g^H.
using Wide = __int128;

// The sparse multiset P'. Repeated draws of one path are distinct nodes.
struct WeightedMultiset {
  SolutionForest forest;
  std::vector<std::int32_t> path_node;  // forest node -> PathIndex node
  std::vector<char> open;               // PathIndex node not closed
  int gbase = 1;
  int k = 0;
  int children_per_open = 0;
  int depth = 0;  // H, fixed by the path index

  double weight(NodeId p) const;
  Wide scaled_weight(NodeId p) const;  // g^(depth - |p|)
};

// One row per node: sorted (v, sum of scaled weights of D(p) ending at v),
// p itself included.
using CongRow = std::vector<std::pair<VertexId, Wide>>;
std::vector<CongRow> cong_tables(const WeightedMultiset& ms, Exec exec = Exec::parallel);
Wide row_lookup(const CongRow& row, VertexId v);

// Empty iff demand, capacity and granularity hold exactly.
std::vector<std::string> check_sparse_constraints(const WeightedMultiset& ms, Exec exec = Exec::parallel);

// Layer-by-layer draw of P'. Exposed so tests can watch the conditional
// congestion between steps.
class SparsifyProcess {
 public:
  SparsifyProcess(const PathIndex& pi, const FractionalPathSolution& x, int k, int g, Rng& rng);
  int frontier() const { return frontier_; }
  bool done() const;
  void advance();
  const WeightedMultiset& state() const { return ms_; }
  WeightedMultiset take() { return std::move(ms_); }
  // cong(p, v | P^(i)) for the current frontier i
  double conditional_congestion(NodeId p, VertexId v) const;

 private:
  double path_cong(std::int32_t q, VertexId v, int layer) const;

  const PathIndex& pi_;
  std::vector<double> x_;
  Rng& rng_;
  WeightedMultiset ms_;
  std::vector<int> layer_of_;  // vertex -> layer, -1 if absent from the index
  int frontier_ = 0;
};

struct SparsifyResult {
  WeightedMultiset ms;
  int attempts = 0;
};

// Attempt a uses make_rng(seed, a). Throws RetriesExhausted after max_retries.
SparsifyResult sparsify(const PathIndex& pi, const FractionalPathSolution& x, int k, int g, std::uint64_t seed,
                        int max_retries);

nlohmann::json multiset_to_json(const WeightedMultiset& ms);

}  // namespace arbor
