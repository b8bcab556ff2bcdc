#pragma once

#include <json.hpp>
#include <vector>

#include "arbor/instance.hpp"

namespace arbor {

struct Generated {
  LayeredInstance inst;
  nlohmann::json provenance;  // generator, params, seed
  int planted_k = 0;
};

// widths[0] sources, widths[h] sinks; vertices numbered layer by layer.
Generated gen_random_layered(int h, const std::vector<int>& widths, double edge_prob, std::uint64_t seed);

// Vertex-disjoint complete k-ary trees of depth h, one per source, plus
// independent noise edges between consecutive layers.
Generated gen_planted(int k, int h, int sources, double noise_prob, std::uint64_t seed);

// Complete B-ary tree over layers 0..h-1 and m sinks in layer h; every sink
// runs the top-down selection at rate 1/q and links to the selected leaves.
Generated gen_hard_instance(int h, int B, int q, int m, std::uint64_t seed);

// Source -> v_{i,j} (m/k^2 copies per set) -> s_{a,j} for a in S_i.
Generated gen_maxkcover_instance(int m, const std::vector<std::vector<int>>& sets, int k);

// Monte-Carlo survival probability of a sink in a fixed d-ary tree of depth h
// whose nodes are selected at rate 1/q.
double survived_sinks_estimate(int d, int h, int B, int q, int trials, std::uint64_t seed);
// p_0 from p_j = 1 - (1 - p_{j+1}/q)^d, p_h = 1
double survival_recursion(int d, int h, int q);

}  // namespace arbor
