#include "arbor/path_lp.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

namespace arbor {

std::vector<VertexId> PathIndex::path(std::int32_t i) const {
  std::vector<VertexId> out;
  for (; i != kNone; i = nodes_[i].parent) out.push_back(nodes_[i].vertex);
  std::reverse(out.begin(), out.end());
  return out;
}

std::int32_t PathIndex::find(const std::vector<VertexId>& path) const {
  if (path.empty() || nodes_.empty() || path[0] != nodes_[0].vertex) return kNone;
  std::int32_t cur = 0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Node& nd = nodes_[cur];
    std::int32_t next = kNone;
    for (std::int32_t c = nd.first_child; c < nd.first_child + nd.child_count; ++c)
      if (nodes_[c].vertex == path[i]) next = c;
    if (next == kNone) return kNone;
    cur = next;
  }
  return cur;
}

PathIndex enumerate_paths_from(const LayeredInstance& li, VertexId source, std::size_t cap) {
  const Instance& inst = li.base;
  if (!inst.is_source(source)) throw validation_error("enumerate_paths", "not a source: " + std::to_string(source));
  PathIndex pi;
  pi.depth_ = li.depth();
  pi.nodes_.push_back({source, 0, kNone, 0, 0, inst.is_sink(source)});
  for (std::size_t i = 0; i < pi.nodes_.size(); ++i) {
    PathIndex::Node cur = pi.nodes_[i];
    if (cur.closed || cur.layer >= li.depth()) continue;
    auto out = inst.out(cur.vertex);
    if (pi.nodes_.size() + out.size() > cap)
      throw budget_error("enumerate_paths", "PathBudgetExceeded(" + std::to_string(cap) + ")");
    pi.nodes_[i].first_child = static_cast<std::int32_t>(pi.nodes_.size());
    pi.nodes_[i].child_count = static_cast<std::int32_t>(out.size());
    for (VertexId v : out)
      pi.nodes_.push_back({v, cur.layer + 1, static_cast<std::int32_t>(i), 0, 0, inst.is_sink(v)});
  }
  return pi;
}

PathIndex enumerate_paths(const LayeredInstance& li, std::size_t cap) {
  if (li.base.sources().size() != 1) throw validation_error("enumerate_paths", "expects a single source");
  return enumerate_paths_from(li, li.base.sources()[0], cap);
}

int LpProblem::count(RowKind kind) const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [&](const LpRow& r) { return r.kind == kind; }));
}

LpProblem build_path_lp(const PathIndex& pi, int k) {
  if (k < 1) throw validation_error("build_path_lp", "k must be >= 1");
  LpProblem lp;
  const int n = static_cast<int>(pi.size());
  lp.vars = n;
  for (int p = 0; p < n; ++p) {
    const auto& nd = pi.node(p);
    if (nd.closed) continue;
    LpRow r{Sense::eq, RowKind::demand, {}, 0.0};
    for (int c = nd.first_child; c < nd.first_child + nd.child_count; ++c) r.coeffs.push_back({c, 1.0});
    r.coeffs.push_back({p, -static_cast<double>(k)});
    lp.rows.push_back(std::move(r));
  }
  // capacity rows: proper descendants grouped by end vertex
  for (int p = 0; p < n; ++p) {
    std::map<VertexId, std::vector<int>> by_vertex;
    std::vector<int> stack;
    const auto& nd = pi.node(p);
    for (int c = nd.first_child; c < nd.first_child + nd.child_count; ++c) stack.push_back(c);
    while (!stack.empty()) {
      int q = stack.back();
      stack.pop_back();
      by_vertex[pi.node(q).vertex].push_back(q);
      const auto& qn = pi.node(q);
      for (int c = qn.first_child; c < qn.first_child + qn.child_count; ++c) stack.push_back(c);
    }
    for (auto& [v, qs] : by_vertex) {
      std::sort(qs.begin(), qs.end());
      LpRow r{Sense::le, RowKind::capacity, {}, 0.0};
      for (int q : qs) r.coeffs.push_back({q, 1.0});
      r.coeffs.push_back({p, -1.0});
      lp.rows.push_back(std::move(r));
    }
  }
  lp.rows.push_back({Sense::eq, RowKind::root, {{0, 1.0}}, 1.0});
  return lp;
}

std::string dump_lp(const LpProblem& lp) {
  std::ostringstream os;
  char buf[64];
  for (const LpRow& r : lp.rows) {
    os << (r.sense == Sense::eq ? 'E' : 'L');
    for (auto [v, c] : r.coeffs) {
      std::snprintf(buf, sizeof buf, " %.17g*x%d", c, v);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, " %.17g\n", r.rhs);
    os << buf;
  }
  return os.str();
}

double max_residual(const LpProblem& lp, const std::vector<double>& x) {
  double worst = 0;
  for (int v = 0; v < lp.vars; ++v) worst = std::max(worst, -x[v]);
  for (const LpRow& r : lp.rows) {
    double s = 0;
    for (auto [v, c] : r.coeffs) s += c * x[v];
    double viol = r.sense == Sense::eq ? std::abs(s - r.rhs) : s - r.rhs;
    worst = std::max(worst, viol);
  }
  return worst;
}

MaxKResult max_feasible_k(const LayeredInstance& li, std::size_t cap, double tol) {
  MaxKResult res;
  res.index = enumerate_paths(li, cap);
  const PathIndex& pi = res.index;
  res.witness.x.assign(pi.size(), 0.0);
  res.witness.x[0] = 1.0;
  int lo = 0, hi = li.base.max_out_degree();
  while (lo < hi) {
    int mid = (lo + hi + 1) / 2;
    LpOutcome o = solve_lp_feasibility(build_path_lp(pi, mid), tol);
    if (o.feasible) {
      lo = mid;
      res.witness.x = std::move(o.x);
    } else {
      hi = mid - 1;
    }
  }
  res.k_star = lo;
  return res;
}

}  // namespace arbor
