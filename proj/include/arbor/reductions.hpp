#pragma once

#include <vector>

#include "arbor/forest.hpp"
#include "arbor/instance.hpp"

namespace arbor {

struct DepthPruneResult {
  Subforest result;
  // n_d = sum over retained nodes of length d of their proper descendant count in the input
  std::vector<std::int64_t> trace;
};

// Keeps, for every retained open node, the k/2 children with the fewest
// descendants (ties by vertex id). k must be even.
DepthPruneResult prune_to_bounded_depth(const Instance& inst, const SolutionForest& sol, int k);

struct CopyOf {
  VertexId vertex;
  int layer;
};

struct LayeringResult {
  LayeredInstance layered;
  std::vector<CopyOf> copy_map;  // layered vertex -> original
};

// Layer 0 holds the sources, layers 1..ceil(log2 n) are full vertex copies.
LayeringResult to_layered(const Instance& inst);

SolutionForest from_layered(const SolutionForest& sol, const std::vector<CopyOf>& copy_map);

// Degree floor(k/K) solution without congestion, via a bipartite
// degree-constrained subgraph (max-flow).
SolutionForest remove_congestion(const Instance& inst, const SolutionForest& sol, int k, int K);

}  // namespace arbor
