#include "arbor/verify.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "arbor/congestion.hpp"

namespace arbor {

Verdict is_valid_solution(const Instance& inst, const SolutionForest& sol, int k, int allow_congestion,
                          DegreeMode mode) {
  Verdict v;
  auto fail = [&](std::string why) {
    v.ok = false;
    v.reasons.push_back(std::move(why));
  };
  const int n = inst.vertex_count();

  std::map<VertexId, int> roots_at;
  for (NodeId r : sol.roots()) {
    VertexId s = sol.end_vertex(r);
    if (!inst.is_source(s)) fail("root at non-source vertex " + std::to_string(s));
    roots_at[s]++;
  }
  for (VertexId s : inst.sources()) {
    int c = roots_at.count(s) ? roots_at[s] : 0;
    if (c != 1) fail("source " + std::to_string(s) + " has " + std::to_string(c) + " root nodes");
  }

  for (NodeId i = 0; i < static_cast<NodeId>(sol.size()); ++i) {
    VertexId end = sol.end_vertex(i);
    if (!inst.valid_vertex(end)) {
      fail("node " + std::to_string(i) + " ends at invalid vertex");
      continue;
    }
    NodeId par = sol.parent(i);
    if (par != kNone && !inst.has_edge(sol.end_vertex(par), end))
      fail("node " + std::to_string(i) + " uses missing edge (" + std::to_string(sol.end_vertex(par)) + "," +
           std::to_string(end) + ")");
    if (!inst.is_sink(end)) {
      int c = static_cast<int>(sol.children(i).size());
      bool bad = mode == DegreeMode::exact ? c != k : c < k;
      if (bad)
        fail("open path with " + std::to_string(c) + " children at node " + std::to_string(i) + " (need " +
             (mode == DegreeMode::exact ? "exactly " : ">= ") + std::to_string(k) + ")");
    }
  }
  for (NodeId i = 0; i < static_cast<NodeId>(sol.size()); ++i) {
    auto p = sol.path(i);
    std::set<VertexId> uniq(p.begin(), p.end());
    if (uniq.size() != p.size()) v.warnings.push_back("path of node " + std::to_string(i) + " repeats a vertex");
  }

  CongestionReport cr = global_congestion(sol, n);
  for (int u = 0; u < n; ++u)
    if (cr.per_vertex[u] > allow_congestion)
      fail("vertex " + std::to_string(u) + " congestion " + std::to_string(cr.per_vertex[u]) + " > " +
           std::to_string(allow_congestion));
  return v;
}

int min_open_degree(const Instance& inst, const SolutionForest& sol) {
  int best = -1;
  for (NodeId i = 0; i < static_cast<NodeId>(sol.size()); ++i) {
    if (inst.is_sink(sol.end_vertex(i))) continue;
    int c = static_cast<int>(sol.children(i).size());
    best = best < 0 ? c : std::min(best, c);
  }
  return best;
}

}  // namespace arbor
