#include "arbor/congestion.hpp"

#include <algorithm>
#include <omp.h>

namespace arbor {

CongestionReport global_congestion(const SolutionForest& sol, int vertex_count) {
  CongestionReport r;
  r.per_vertex.assign(vertex_count, 0);
  for (NodeId i = 0; i < static_cast<NodeId>(sol.size()); ++i) {
    VertexId v = sol.end_vertex(i);
    if (v >= 0 && v < vertex_count) r.per_vertex[v]++;
  }
  for (int c : r.per_vertex) r.max_global = std::max(r.max_global, c);
  return r;
}

namespace {

// Per-node sweep: for l' = 0..ell, max_v |I_{D(p,<=l')}(v)|, folded into best.
void sweep_node(const SolutionForest& sol, NodeId p, int ell, std::vector<int>& count,
                std::vector<VertexId>& touched, std::vector<int>& best) {
  std::vector<NodeId> level{p}, next;
  int running = 0;
  for (int d = 0; d <= ell; ++d) {
    for (NodeId q : level) {
      VertexId v = sol.end_vertex(q);
      if (count[v]++ == 0) touched.push_back(v);
      running = std::max(running, count[v]);
    }
    best[d] = std::max(best[d], running);
    if (d == ell) break;
    next.clear();
    for (NodeId q : level)
      for (NodeId c : sol.children(q)) next.push_back(c);
    level.swap(next);
    if (level.empty()) {
      for (int e = d + 1; e <= ell; ++e) best[e] = std::max(best[e], running);
      break;
    }
  }
  for (VertexId v : touched) count[v] = 0;
  touched.clear();
}

}  // namespace

CongestionReport local_congestion(const SolutionForest& sol, int vertex_count, int ell, Exec exec) {
  CongestionReport r = global_congestion(sol, vertex_count);
  r.local_max.assign(ell + 1, 0);
  const NodeId n = static_cast<NodeId>(sol.size());

  // virtual root: every path of length <= l'
  {
    std::vector<std::vector<NodeId>> by_len(ell + 1);
    for (NodeId i = 0; i < n; ++i)
      if (sol.length(i) <= ell) by_len[sol.length(i)].push_back(i);
    std::vector<int> count(vertex_count, 0);
    int running = 0;
    for (int d = 0; d <= ell; ++d) {
      for (NodeId q : by_len[d]) running = std::max(running, ++count[sol.end_vertex(q)]);
      r.local_max[d] = std::max(r.local_max[d], running);
    }
  }

  if (exec == Exec::serial) {
    std::vector<int> count(vertex_count, 0);
    std::vector<VertexId> touched;
    for (NodeId p = 0; p < n; ++p) sweep_node(sol, p, ell, count, touched, r.local_max);
    return r;
  }

  std::vector<int> merged = r.local_max;
#pragma omp parallel
  {
    std::vector<int> count(vertex_count, 0);
    std::vector<VertexId> touched;
    std::vector<int> best(ell + 1, 0);
#pragma omp for schedule(dynamic, 64)
    for (NodeId p = 0; p < n; ++p) sweep_node(sol, p, ell, count, touched, best);
#pragma omp critical
    for (int d = 0; d <= ell; ++d) merged[d] = std::max(merged[d], best[d]);
  }
  r.local_max = merged;
  return r;
}

}  // namespace arbor
