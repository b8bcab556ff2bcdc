#include "arbor/oracle.hpp"

#include <algorithm>
#include <deque>
#include <string>
#include <unordered_set>

namespace arbor {

namespace {

class DegreeSearch {
 public:
  DegreeSearch(const Instance& inst, int k, const std::vector<char>& blocked, int depth_cap, long node_cap)
      : inst_(inst), k_(k), depth_cap_(depth_cap), node_cap_(node_cap), used_(inst.vertex_count(), 0),
        chosen_(inst.vertex_count()) {
    for (VertexId v = 0; v < inst.vertex_count(); ++v)
      if (v < static_cast<VertexId>(blocked.size()) && blocked[v]) used_[v] = 1;
  }

  bool run(const std::vector<VertexId>& sources) {
    for (VertexId s : sources) used_[s] = 1;
    for (VertexId s : sources)
      if (!inst_.is_sink(s)) pending_.push_back({s, 0});
    return solve();
  }

  long expanded() const { return expanded_; }

  SolutionForest witness(const std::vector<VertexId>& sources) const {
    SolutionForest out;
    for (VertexId s : sources) {
      std::deque<NodeId> q{out.add_root(s)};
      while (!q.empty()) {
        NodeId x = q.front();
        q.pop_front();
        for (VertexId v : chosen_[out.end_vertex(x)]) q.push_back(out.add_child(x, v));
      }
    }
    return out;
  }

 private:
  struct Item {
    VertexId v;
    int depth;
  };

  int available(VertexId u) const {
    int c = 0;
    for (VertexId w : inst_.out(u)) c += !used_[w];
    return c;
  }

  std::string key() const {
    std::string s(used_.begin(), used_.end());
    std::vector<std::pair<VertexId, int>> p;
    for (const Item& it : pending_) p.push_back({it.v, depth_cap_ < inst_.vertex_count() ? it.depth : 0});
    std::sort(p.begin(), p.end());
    for (auto [v, d] : p) {
      s.append(reinterpret_cast<const char*>(&v), sizeof v);
      s.append(reinterpret_cast<const char*>(&d), sizeof d);
    }
    return s;
  }

  bool solve() {
    if (pending_.empty()) return true;
    if (++expanded_ > node_cap_) throw budget_error("brute_force_opt", "BudgetExceeded(" + std::to_string(node_cap_) + ")");
    for (const Item& it : pending_)
      if (it.depth >= depth_cap_ || available(it.v) < k_) return false;
    std::string k = key();
    if (failed_.count(k)) return false;

    Item cur = pending_.front();
    pending_.pop_front();
    std::vector<VertexId> cand;
    for (VertexId w : inst_.out(cur.v))
      if (!used_[w]) cand.push_back(w);
    std::vector<int> pick(k_);
    for (int i = 0; i < k_; ++i) pick[i] = i;
    const int m = static_cast<int>(cand.size());
    bool ok = false;
    while (true) {
      std::size_t before = pending_.size();
      for (int i : pick) {
        used_[cand[i]] = 1;
        if (!inst_.is_sink(cand[i])) pending_.push_back({cand[i], cur.depth + 1});
      }
      if (solve()) {
        chosen_[cur.v].clear();
        for (int i : pick) chosen_[cur.v].push_back(cand[i]);
        ok = true;
      }
      pending_.resize(before);
      if (ok) break;
      for (int i : pick) used_[cand[i]] = 0;
      // next k-subset in lexicographic order
      int i = k_ - 1;
      while (i >= 0 && pick[i] == m - k_ + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < k_; ++j) pick[j] = pick[j - 1] + 1;
    }
    pending_.push_front(cur);
    if (!ok) failed_.insert(std::move(k));
    return ok;
  }

  const Instance& inst_;
  int k_, depth_cap_;
  long node_cap_;
  long expanded_ = 0;
  std::vector<char> used_;
  std::deque<Item> pending_;
  std::vector<std::vector<VertexId>> chosen_;
  std::unordered_set<std::string> failed_;
};

}  // namespace

std::optional<SolutionForest> find_degree_k(const Instance& inst, const std::vector<VertexId>& sources, int k,
                                            const std::vector<char>& blocked, int depth_cap, long node_cap,
                                            long* expanded) {
  std::vector<VertexId> src = sources;
  std::sort(src.begin(), src.end());
  if (k <= 0) {
    SolutionForest out;
    for (VertexId s : src) out.add_root(s);
    return out;
  }
  DegreeSearch search(inst, k, blocked, depth_cap, node_cap);
  bool ok = search.run(src);
  if (expanded) *expanded += search.expanded();
  if (!ok) return std::nullopt;
  return search.witness(src);
}

OptResult brute_force_opt(const Instance& inst, int depth_cap, long node_cap) {
  OptResult res;
  std::vector<char> none;
  for (int k = inst.max_out_degree(); k >= 1; --k) {
    long used = 0;
    auto w = find_degree_k(inst, inst.sources(), k, none, depth_cap, node_cap - res.expanded, &used);
    res.expanded += used;
    if (w) {
      res.k_opt = k;
      res.witness = std::move(*w);
      return res;
    }
  }
  res.witness = *find_degree_k(inst, inst.sources(), 0, none, depth_cap, node_cap);
  return res;
}

namespace {

SolutionForest lp_rounding(const PathIndex& pi, const FractionalPathSolution& x, int draws, Rng& rng) {
  SolutionForest out;
  std::vector<std::int32_t> at{kNone};  // forest node -> path index node
  out.add_root(pi.node(0).vertex);
  at[0] = 0;
  std::deque<NodeId> q{0};
  while (!q.empty()) {
    NodeId f = q.front();
    q.pop_front();
    const auto& nd = pi.node(at[f]);
    if (nd.closed || nd.child_count == 0) continue;
    std::vector<double> w(nd.child_count);
    double total = 0;
    for (int c = 0; c < nd.child_count; ++c) total += w[c] = std::max(0.0, x.x[nd.first_child + c]);
    if (total <= 0) continue;
    std::discrete_distribution<int> pick(w.begin(), w.end());
    for (int d = 0; d < draws; ++d) {
      int c = nd.first_child + pick(rng);
      NodeId id = out.add_child(f, pi.node(c).vertex);
      at.push_back(c);
      q.push_back(id);
    }
  }
  return out;
}

SolutionForest uniform_rounding(const Instance& inst, VertexId source, int draws, Rng& rng) {
  SolutionForest out;
  std::deque<NodeId> q{out.add_root(source)};
  while (!q.empty()) {
    NodeId f = q.front();
    q.pop_front();
    VertexId u = out.end_vertex(f);
    if (inst.is_sink(u)) continue;
    auto nb = inst.out(u);
    if (nb.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
    for (int d = 0; d < draws; ++d) q.push_back(out.add_child(f, nb[pick(rng)]));
  }
  return out;
}

}  // namespace

SolutionForest naive_randomized_rounding(const PathIndex& pi, const FractionalPathSolution& x, int k, Rng& rng) {
  return lp_rounding(pi, x, k, rng);
}

SolutionForest halved_randomized_rounding(const PathIndex& pi, const FractionalPathSolution& x, int k, Rng& rng) {
  return lp_rounding(pi, x, k / 2, rng);
}

SolutionForest naive_uniform_rounding(const Instance& inst, VertexId source, int k, Rng& rng) {
  return uniform_rounding(inst, source, k, rng);
}

SolutionForest halved_uniform_rounding(const Instance& inst, VertexId source, int k, Rng& rng) {
  return uniform_rounding(inst, source, k / 2, rng);
}

SinkStats sink_congestion_stats(const Instance& inst, const SolutionForest& sol) {
  SinkStats st;
  std::map<VertexId, int> mult;
  for (NodeId i = 0; i < static_cast<NodeId>(sol.size()); ++i)
    if (inst.is_sink(sol.end_vertex(i))) mult[sol.end_vertex(i)]++;
  double sum = 0;
  for (auto [v, c] : mult) {
    st.histogram[c]++;
    st.max = std::max(st.max, c);
    st.closed_nodes += c;
    sum += static_cast<double>(c) * c;
  }
  st.mean = st.closed_nodes ? sum / st.closed_nodes : 0.0;
  return st;
}

}  // namespace arbor
