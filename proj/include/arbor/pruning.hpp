#pragma once

#include <map>
#include <string>
#include <vector>

#include "arbor/forest.hpp"
#include "arbor/instance.hpp"
#include "arbor/profile.hpp"

namespace arbor {

struct PremiseReport {
  bool pass = true;
  NodeId offender = kNone;  // node with most R descendants at distance ell, among failures
  std::int64_t offender_count = 0;
  std::map<NodeId, bool> per_source;  // root node -> stronger per-source premise holds
};

// in_R is a node mask. R members below another R member are ignored.
PremiseReport check_btt_premise(const SolutionForest& sol, const std::vector<char>& in_R, int ell, int k);

struct SweepResult {
  Subforest result;
  std::vector<char> removed;  // input node mask, set by the sweep rule only
};

// Longest-to-shortest sweep: a node goes if it is in R or more than
// max_removed_children of its children went.
SweepResult sweep_prune(const SolutionForest& sol, const std::vector<char>& in_R, double max_removed_children);

// Throws if the premise fails. Output degree is ceil(k/(2 ell)).
SweepResult bottom_to_top_prune(const SolutionForest& sol, const std::vector<char>& in_R, int ell, int k);

// Removal counts of a finished sweep checked against
// 1/8 (1+2/ell)^(ell-l'+1) k^l' for nodes at lengths 0, ell, 2ell, ...
// that satisfy the per-source premise. Returns violations.
std::vector<std::string> btt_trace_violations(const SolutionForest& sol, const std::vector<char>& in_R,
                                              const std::vector<char>& removed, int ell, int k);

struct DeletionStats {
  std::vector<double> removed_fraction;  // per depth 1..h (index 0 unused), averaged over seeds
  std::vector<double> predicted;         // beta / (1-1/alpha)^(h-d)
  double root_loss = 0;                  // fraction of root children removed
};

// Complete k-ary tree of depth h; an adversary deletes floor(beta k^h) sinks
// concentrated to kill whole subtrees, then nodes with fewer than k/alpha
// surviving children are pruned bottom-up.
DeletionStats adversarial_deletion_experiment(int k, int h, double alpha, double beta, int seeds, std::uint64_t seed0 = 1);

struct GroupPartition {
  int ell = 1;
  std::vector<std::vector<NodeId>> groups;  // groups[j-1] = G_j
  std::vector<int> group_of;                // node -> j, 0 for roots
  std::vector<int> k_of_group;              // index j; index 0 is the root child count
};

GroupPartition partition_groups(const SolutionForest& sol, int ell);

// k(p, l') = product of group child counts over lengths |p| .. |p|+l'-1
double group_k(const GroupPartition& gp, int length, int lp);

// cong_G(p) = number of same-group nodes ending at the endpoint of p; 0 for roots
std::vector<int> group_congestion(const SolutionForest& sol, const GroupPartition& gp);

struct GroupSampleResult {
  Subforest result;
  int resamples = 0;
  int initial_events = 0;
  int no_increase_failures = 0;  // ratio check over all remaining p and l' <= ell
  int k_product_mismatches = 0;  // k'(p,l') != k(p,l') for p in G_j, l' < ell
};

GroupSampleResult sample_down_group(const SolutionForest& sol, const GroupPartition& gp, int j,
                                    const ParamProfile& profile, Rng& rng);

struct HotPruneResult {
  SweepResult sweep;
  int r_size = 0;
};

// R = nodes whose group congestion exceeds group_bound, removed bottom to top.
HotPruneResult prune_hot_paths(const SolutionForest& sol, int ell, double group_bound, int k);

struct LocalToGlobalResult {
  SolutionForest result;
  std::vector<NodeId> origin;  // result node -> input node
  double A = 0;
  double global_bound = 0;  // 16 A ell^3
  double group_bound = 0;   // 16 A ell^2
  int resamples = 0;
  int no_increase_failures = 0;
  int k_product_mismatches = 0;
  int r_size = 0;
  int degree_before_prune = 0;
};

LocalToGlobalResult local_to_global(const SolutionForest& sol, int k, const ParamProfile& profile, Rng& rng);

}  // namespace arbor
