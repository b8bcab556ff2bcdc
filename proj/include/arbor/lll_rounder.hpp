#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "arbor/forest.hpp"
#include "arbor/instance.hpp"
#include "arbor/path_lp.hpp"
#include "arbor/profile.hpp"
#include "arbor/sparsifier.hpp"

namespace arbor {

struct BadEvent {
  enum class Kind { B1 = 1, B2 = 2, B3 = 3 };  // global congestion, marked children, source marked
  Kind kind = Kind::B1;
  VertexId v = kNone;  // B1
  int t = -1;          // B1 class
  NodeId p = kNone;    // B2 parent / B3 source, as Q node
  double lhs = 0, rhs = 0;
  std::vector<NodeId> depends_on;  // frontier Q nodes whose draws feed the event
  std::string describe() const;
};

// Draws of one step: every open frontier node picks sample_children of its P'
// children (indices into the P' child list).
struct Candidate {
  std::vector<NodeId> parents;
  std::vector<std::vector<int>> draws;
};

class RoundingState {
 public:
  RoundingState(const WeightedMultiset& pp, const ParamProfile& profile, Exec exec = Exec::parallel);

  int frontier() const { return frontier_; }
  bool done() const { return frontier_ >= pp_.depth; }
  const SolutionForest& partial() const { return q_; }
  NodeId pnode(NodeId q) const { return pnode_[q]; }
  const WeightedMultiset& multiset() const { return pp_; }
  const std::vector<CongRow>& tables() const { return rows_; }
  const ParamProfile& profile() const { return profile_; }
  const std::vector<char>& ever_marked() const { return marked_; }
  int layer_of(VertexId v) const;
  Wide layer_weight(int layer) const;  // g^(H - layer)

  // cong(v | Q^(i))
  double vertex_congestion(VertexId v) const;
  // cong_p(q | Q^(i)) where v is the endpoint of q
  double path_congestion(NodeId p, VertexId v) const;
  // open Q nodes at the frontier, ascending
  std::vector<NodeId> open_frontier() const;

  void accept(const Candidate& c, const std::vector<char>& marked_now);

 private:
  const WeightedMultiset& pp_;
  ParamProfile profile_;
  std::vector<CongRow> rows_;
  std::vector<int> vlayer_;
  SolutionForest q_;
  std::vector<NodeId> pnode_;
  std::vector<char> marked_;
  int frontier_ = 0;
};

Candidate round_layer(const RoundingState& st, Rng& rng);

struct Detection {
  std::vector<BadEvent> events;  // sorted by (kind, key)
  std::vector<char> marked_now;  // over Q nodes
  double congestion_bound_max = 0;  // max_v sum_t (2 mu_t + slack)
  std::vector<std::pair<VertexId, double>> bound_by_vertex;
};

Detection detect_bad_events(const RoundingState& st, const Candidate& c);

struct LayerOutcome {
  Candidate accepted;
  Detection detection;  // of the accepted candidate
  int resamples = 0;
  int events_detected = 0;  // on the first candidate
};

// Moser-Tardos: redraw the dependency set of the least event until none is left.
LayerOutcome resample_until_clear(const RoundingState& st, Candidate c, Rng& rng, int cap);

struct FinishResult {
  Subforest q_prime;
  std::vector<char> in_R;  // over q_prime nodes
  int marked_removed = 0;
};

FinishResult delete_marked_and_extract_R(const RoundingState& st);

struct RoundResult {
  SolutionForest result;
  int k = 0;
  int k_star = 0;
  int sparsify_attempts = 0;
  int total_resamples = 0;
  int marked_removed = 0;
  int r_size = 0;
  int iterlowcong_violations = 0;
  std::size_t multiset_size = 0;
  std::vector<nlohmann::json> trace;  // one record per layer
};

// Rounding stage only, from a given P'.
RoundResult round_multiset(const WeightedMultiset& pp, const ParamProfile& profile, std::uint64_t seed,
                           Exec exec = Exec::parallel);

// Same, from an already solved LP optimum.
RoundResult round_from_lp(const MaxKResult& mk, int k, const ParamProfile& profile, std::uint64_t seed,
                          Exec exec = Exec::parallel);

// LP -> sparsify -> rounding -> marked deletion -> bottom-to-top pruning.
// k <= 0 means the LP optimum.
RoundResult round_single_source(const LayeredInstance& li, int k, const ParamProfile& profile, std::uint64_t seed,
                                Exec exec = Exec::parallel);

}  // namespace arbor
