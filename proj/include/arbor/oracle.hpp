#pragma once

#include <map>
#include <optional>
#include <vector>

#include "arbor/forest.hpp"
#include "arbor/instance.hpp"
#include "arbor/path_lp.hpp"

namespace arbor {

inline constexpr long kDefaultNodeCap = 5'000'000;

struct OptResult {
  int k_opt = 0;
  SolutionForest witness;
  long expanded = 0;
};

// Exhaustive search for vertex-disjoint arborescences of out-degree k from
// every source, for k = max out-degree down to 1.
OptResult brute_force_opt(const Instance& inst, int depth_cap, long node_cap = kDefaultNodeCap);

// Feasibility at a fixed k: every open node gets exactly k children. Blocked
// vertices are unavailable. Returns the witness or nothing.
std::optional<SolutionForest> find_degree_k(const Instance& inst, const std::vector<VertexId>& sources, int k,
                                            const std::vector<char>& blocked, int depth_cap, long node_cap,
                                            long* expanded = nullptr);

// Each selected open path samples k children i.i.d. proportionally to the LP values.
SolutionForest naive_randomized_rounding(const PathIndex& pi, const FractionalPathSolution& x, int k, Rng& rng);
SolutionForest halved_randomized_rounding(const PathIndex& pi, const FractionalPathSolution& x, int k, Rng& rng);

// Same processes when the conditioned LP values are uniform over out-neighbours
// (the hard instance).
SolutionForest naive_uniform_rounding(const Instance& inst, VertexId source, int k, Rng& rng);
SolutionForest halved_uniform_rounding(const Instance& inst, VertexId source, int k, Rng& rng);

struct SinkStats {
  double mean = 0;  // over closed nodes, the multiplicity of their endpoint
  int max = 0;
  std::map<int, int> histogram;  // multiplicity -> number of distinct sinks
  int closed_nodes = 0;
};

SinkStats sink_congestion_stats(const Instance& inst, const SolutionForest& sol);

}  // namespace arbor
