#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "arbor/forest.hpp"
#include "arbor/instance.hpp"
#include "arbor/profile.hpp"

namespace arbor {

struct PipelineOptions {
  int k = 0;  // 0 = LP optimum
  std::uint64_t seed = 1;
  std::string profile_name = "desk-small";
  nlohmann::json profile_overrides = nlohmann::json::object();
  double alpha = 0;  // multi-source oracle ratio; 0 = k
  Exec exec = Exec::parallel;
};

// Preset by name, then overrides.
ParamProfile resolve_profile(const std::string& name, const nlohmann::json& overrides, int n, int k, int h);

struct PipelineResult {
  SolutionForest solution;  // on the input instance
  int degree = 0;
  int congestion = 0;
  nlohmann::json report;
  std::vector<nlohmann::json> trace;
};

// layer-reduce (when the input has no layers) -> LP -> sparsify -> round ->
// local-to-global -> remove-congestion -> verify. Several sources go through
// local search with this chain as the single-source oracle.
PipelineResult run_pipeline(const LayeredInstance& input, const PipelineOptions& opts);

struct GapRow {
  int h = 0;
  double naive_mean = 0, halved_mean = 0;
  int pairs = 0;
  int naive_wins = 0;           // pairs with naive > halved
  // trials where no sink has more than (1 + 3/sqrt(B/q)) (B/q)^(h-1-j) leaves
  // inside any layer-j subtree, for every j
  int concentration_ok = 0;
  double sink_claim_rate = 0;  // fraction of (trial, sink) pairs meeting that bound
};

// Paired-seed comparison of naive (k = B/q) and halved uniform rounding on
// hard instances with m = q^h sinks.
std::vector<GapRow> gap_sweep(const std::vector<int>& hs, int B, int q, int trials, std::uint64_t seed,
                              Exec exec = Exec::parallel);
std::string gap_rows_csv(const std::vector<GapRow>& rows);

}  // namespace arbor
