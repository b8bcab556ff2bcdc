#pragma once

#include <string>
#include <vector>

namespace arbor {

struct ParamProfile {
  std::string name = "desk-small";
  int ell = 2;
  int L_local = 8;
  int K_global = 64;
  int granularity_base = 2;
  int sample_children = 2;
  int retain_children = 2;
  int b1_slack = 2;
  int mark_frac_denom = 8;
  double mark_threshold_denom = 64.0;
  double c_const = 1.0;
  // local search ring constants; addable k/(a*alpha), collapse (k/(c*alpha))^j,
  // installed k/(s*alpha)
  int ls_addable_div = 1;
  int ls_collapse_div = 4;
  int ls_solution_div = 8;
  int group_resample_cap = 10000;
  int layer_resample_cap = 10000;
  int sparsify_retries = 20;
};

// Constants computed from n exactly as in the analysis (log = log2).
ParamProfile paper_default(int n, int k);

// Small constants for desk-size instances of depth h. K_global is the bound
// implied by the per-layer congestion recurrence of the rounder.
ParamProfile desk_small(int k, int h);

// Global congestion bound after h rounded layers for this profile and k.
int rounding_congestion_bound(const ParamProfile& p, int k, int h);

std::vector<std::string> validate_profile(const ParamProfile& p);

}  // namespace arbor
