#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arbor/forest.hpp"
#include "arbor/instance.hpp"
#include "arbor/profile.hpp"

namespace arbor {

// (instance, blocked vertex mask, source, min degree) -> single tree or none
using SingleSourceOracle =
    std::function<std::optional<SolutionForest>(const Instance&, const std::vector<char>&, VertexId, int)>;

// Exact search via find_degree_k.
SingleSourceOracle exact_oracle(int depth_cap = 1 << 20, long node_cap = 2000000);

struct LsPruneResult {
  Subforest result;
  std::vector<int> removed_per_layer;  // index = path length
};

// Bottom-up: drops R nodes and nodes with more than 3/4 k' removed children.
// A degree-k' input keeps degree >= k'/4. Throws if R is too dense.
LsPruneResult ls_prune_arborescence(const SolutionForest& tree, const std::vector<char>& in_R, int kprime);

struct LsDegrees {
  int addable = 1, collapse = 1, solution = 1;
};
LsDegrees ls_degrees(int k, double alpha, const ParamProfile& profile);

struct Ring {
  std::vector<VertexId> addable_source;
  std::vector<SolutionForest> addable;
  std::vector<VertexId> blocking;  // sources whose installed tree meets an addable tree
};

struct PotentialRecord {
  int step = 0;
  std::vector<int> ring_sizes;  // |B_1|, |B_2|, ... (an implicit infinity follows)
  std::string action;
};

// a < b in the order of (|B_1|, ..., |B_i|, inf)
bool potential_less(const std::vector<int>& a, const std::vector<int>& b);

struct SearchState {
  std::map<VertexId, SolutionForest> solution;  // source -> its installed tree
  std::vector<Ring> rings;
  VertexId target = kNone;
  std::vector<PotentialRecord> trace;
  int steps = 0;
  int oracle_calls = 0;
  int oracle_failures = 0;
  int greedy_shortfalls = 0;   // |A_{i+1}| < sum |B| (counted, not fatal)
  int growth_violations = 0;   // |B_i| < |A_i| with nothing collapsible
  int collapses = 0;
  std::vector<int> blocking_totals;  // sum |B| after each ring that did not collapse
};

std::vector<std::string> solution_overlaps(const SearchState& st);

std::optional<SolutionForest> find_addable(SearchState& st, const Instance& inst, VertexId s,
                                           const SingleSourceOracle& oracle, int k, double alpha,
                                           const ParamProfile& profile);

// Installs every collapsible addable tree, latest first found in ring order.
// Returns the first source installed.
std::optional<VertexId> try_collapse(SearchState& st, const Instance& inst, int k, double alpha,
                                     const ParamProfile& profile);

void augment_source(SearchState& st, const Instance& inst, VertexId s0, const SingleSourceOracle& oracle, int k,
                    double alpha, const ParamProfile& profile, int step_cap = 100000);

// All sources in ascending order; result trees in source order.
SolutionForest solve_multi_source(const LayeredInstance& li, int k, const SingleSourceOracle& oracle, double alpha,
                                  const ParamProfile& profile, int step_cap = 100000, SearchState* state_out = nullptr);

std::string potential_csv(const std::vector<PotentialRecord>& trace);

}  // namespace arbor
