#include "arbor/reductions.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "arbor/congestion.hpp"
#include "arbor/verify.hpp"

namespace arbor {

DepthPruneResult prune_to_bounded_depth(const Instance& inst, const SolutionForest& sol, int k) {
  if (k < 2 || k % 2 != 0) throw validation_error("prune_to_bounded_depth", "k must be even and positive");
  const NodeId n = static_cast<NodeId>(sol.size());
  for (NodeId i = 0; i < n; ++i)
    if (!inst.is_sink(sol.end_vertex(i)) && static_cast<int>(sol.children(i).size()) < k)
      throw validation_error("prune_to_bounded_depth", "input is not degree-" + std::to_string(k) + " at node " + std::to_string(i));

  auto sizes = sol.subtree_sizes();
  std::vector<char> keep(n, 0);
  for (NodeId r : sol.roots()) keep[r] = 1;
  DepthPruneResult out;
  // parents precede children, so one forward pass is a top-down sweep
  for (NodeId i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    int d = sol.length(i);
    if (static_cast<int>(out.trace.size()) <= d) out.trace.resize(d + 1, 0);
    out.trace[d] += sizes[i] - 1;
    std::vector<NodeId> ch = sol.children(i);
    std::sort(ch.begin(), ch.end(), [&](NodeId a, NodeId b) {
      if (sizes[a] != sizes[b]) return sizes[a] < sizes[b];
      if (sol.end_vertex(a) != sol.end_vertex(b)) return sol.end_vertex(a) < sol.end_vertex(b);
      return a < b;
    });
    for (std::size_t c = 0; c < ch.size() && static_cast<int>(c) < k / 2; ++c) keep[ch[c]] = 1;
  }
  out.result = sol.retain(keep);
  return out;
}

LayeringResult to_layered(const Instance& inst) {
  const int n = inst.vertex_count();
  const int H = std::max(1, static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max(n, 2))))));
  const int S = static_cast<int>(inst.sources().size());
  LayeringResult r;
  auto copy_id = [&](VertexId v, int layer) { return S + (layer - 1) * n + v; };
  std::vector<std::vector<VertexId>> layers(H + 1);
  for (int j = 0; j < S; ++j) {
    layers[0].push_back(j);
    r.copy_map.push_back({inst.sources()[j], 0});
  }
  for (int i = 1; i <= H; ++i)
    for (VertexId v = 0; v < n; ++v) {
      layers[i].push_back(copy_id(v, i));
      r.copy_map.push_back({v, i});
    }
  std::vector<Edge> edges;
  for (int j = 0; j < S; ++j)
    for (VertexId v : inst.out(inst.sources()[j])) edges.emplace_back(j, copy_id(v, 1));
  for (int i = 1; i < H; ++i)
    for (VertexId u = 0; u < n; ++u)
      for (VertexId v : inst.out(u)) edges.emplace_back(copy_id(u, i), copy_id(v, i + 1));
  std::vector<VertexId> sources(S), sinks;
  for (int j = 0; j < S; ++j) sources[j] = j;
  for (int i = 1; i <= H; ++i)
    for (VertexId t : inst.sinks()) sinks.push_back(copy_id(t, i));
  const int total = S + H * n;
  r.layered = make_layered(Instance(total, std::move(edges), std::move(sources), std::move(sinks)), std::move(layers));
  return r;
}

SolutionForest from_layered(const SolutionForest& sol, const std::vector<CopyOf>& copy_map) {
  SolutionForest out;
  auto map = [&](VertexId v) {
    if (v < 0 || v >= static_cast<VertexId>(copy_map.size()))
      throw validation_error("from_layered", "vertex " + std::to_string(v) + " has no copy record");
    return copy_map[v].vertex;
  };
  for (NodeId i = 0; i < static_cast<NodeId>(sol.size()); ++i) {
    if (sol.parent(i) == kNone)
      out.add_root(map(sol.end_vertex(i)));
    else
      out.add_child(sol.parent(i), map(sol.end_vertex(i)));
  }
  return out;
}

namespace {

// Dinic on small graphs.
class MaxFlow {
 public:
  explicit MaxFlow(int n) : head_(n, -1), level_(n), it_(n) {}
  int add_edge(int u, int v, int cap) {
    edges_.push_back({v, head_[u], cap});
    head_[u] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({u, head_[v], 0});
    head_[v] = static_cast<int>(edges_.size()) - 1;
    return static_cast<int>(edges_.size()) - 2;
  }
  int flow_on(int e) const { return edges_[e ^ 1].cap; }
  long long run(int s, int t) {
    long long total = 0;
    while (bfs(s, t)) {
      it_ = head_;
      while (int f = dfs(s, t, std::numeric_limits<int>::max())) total += f;
    }
    return total;
  }

 private:
  struct E {
    int to, next, cap;
  };
  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::deque<int> q{s};
    level_[s] = 0;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int e = head_[u]; e != -1; e = edges_[e].next)
        if (edges_[e].cap > 0 && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[u] + 1;
          q.push_back(edges_[e].to);
        }
    }
    return level_[t] >= 0;
  }
  int dfs(int u, int t, int f) {
    if (u == t) return f;
    for (int& e = it_[u]; e != -1; e = edges_[e].next) {
      int v = edges_[e].to;
      if (edges_[e].cap > 0 && level_[v] == level_[u] + 1) {
        int got = dfs(v, t, std::min(f, edges_[e].cap));
        if (got > 0) {
          edges_[e].cap -= got;
          edges_[e ^ 1].cap += got;
          return got;
        }
      }
    }
    return 0;
  }
  std::vector<E> edges_;
  std::vector<int> head_, level_, it_;
};

}  // namespace

SolutionForest remove_congestion(const Instance& inst, const SolutionForest& sol, int k, int K) {
  if (k < 0 || K < 1) throw validation_error("remove_congestion", "need k >= 0 and K >= 1");
  const int n = inst.vertex_count();
  if (global_congestion(sol, n).max_global > K)
    throw validation_error("remove_congestion", "input congestion exceeds K");
  const int d = k / K;

  // U: vertices ending some open path; edge (u, v') per child endpoint
  std::vector<char> in_u(n, 0);
  std::vector<std::vector<VertexId>> cand(n);
  for (NodeId i = 0; i < static_cast<NodeId>(sol.size()); ++i) {
    VertexId u = sol.end_vertex(i);
    if (inst.is_sink(u)) continue;
    if (static_cast<int>(sol.children(i).size()) < k)
      throw validation_error("remove_congestion", "input is not degree-" + std::to_string(k) + " at node " + std::to_string(i));
    in_u[u] = 1;
    for (NodeId c : sol.children(i)) cand[u].push_back(sol.end_vertex(c));
  }
  const int S = 2 * n, T = 2 * n + 1;
  MaxFlow mf(2 * n + 2);
  long long need = 0;
  std::vector<std::vector<std::pair<VertexId, int>>> arcs(n);
  for (VertexId u = 0; u < n; ++u) {
    if (!in_u[u] || d == 0) continue;
    auto& c = cand[u];
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    mf.add_edge(S, u, d);
    need += d;
    for (VertexId v : c) arcs[u].push_back({v, mf.add_edge(u, n + v, 1)});
  }
  for (VertexId v = 0; v < n; ++v)
    if (!inst.is_source(v)) mf.add_edge(n + v, T, 1);
  if (mf.run(S, T) != need) throw stage_error("remove_congestion", "no degree-" + std::to_string(d) + " subgraph exists");

  std::vector<std::vector<VertexId>> chosen(n);
  for (VertexId u = 0; u < n; ++u)
    for (auto [v, e] : arcs[u])
      if (mf.flow_on(e) > 0) chosen[u].push_back(v);

  SolutionForest out;
  for (NodeId r : sol.roots()) {
    std::deque<NodeId> q{out.add_root(sol.end_vertex(r))};
    while (!q.empty()) {
      NodeId x = q.front();
      q.pop_front();
      VertexId u = out.end_vertex(x);
      if (inst.is_sink(u)) continue;
      for (VertexId v : chosen[u]) q.push_back(out.add_child(x, v));
    }
  }
  return out;
}

}  // namespace arbor
