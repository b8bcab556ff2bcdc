#include "arbor/sparsifier.hpp"

#include <algorithm>
#include <cmath>
#include <omp.h>

#include "arbor/io.hpp"

namespace arbor {

double WeightedMultiset::weight(NodeId p) const { return std::pow(static_cast<double>(gbase), -forest.length(p)); }

Wide WeightedMultiset::scaled_weight(NodeId p) const {
  Wide w = 1;
  for (int d = forest.length(p); d < depth; ++d) w *= gbase;
  return w;
}

namespace {

void build_row(const WeightedMultiset& ms, const std::vector<CongRow>& rows, NodeId p, CongRow& out) {
  out.clear();
  out.emplace_back(ms.forest.end_vertex(p), ms.scaled_weight(p));
  for (NodeId c : ms.forest.children(p)) out.insert(out.end(), rows[c].begin(), rows[c].end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t w = 0;
  for (std::size_t r = 0; r < out.size(); ++r) {
    if (w > 0 && out[w - 1].first == out[r].first)
      out[w - 1].second += out[r].second;
    else
      out[w++] = out[r];
  }
  out.resize(w);
}

std::string wide_str(Wide v) {
  if (v == 0) return "0";
  std::string s;
  bool neg = v < 0;
  if (neg) v = -v;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  if (neg) s.push_back('-');
  return {s.rbegin(), s.rend()};
}

}  // namespace

std::vector<CongRow> cong_tables(const WeightedMultiset& ms, Exec exec) {
  const NodeId n = static_cast<NodeId>(ms.forest.size());
  std::vector<CongRow> rows(n);
  if (exec == Exec::serial) {
    for (NodeId p = n - 1; p >= 0; --p) build_row(ms, rows, p, rows[p]);
    return rows;
  }
  std::vector<std::vector<NodeId>> by_len(ms.forest.max_length() + 1);
  for (NodeId p = 0; p < n; ++p) by_len[ms.forest.length(p)].push_back(p);
  for (int d = static_cast<int>(by_len.size()) - 1; d >= 0; --d) {
    const auto& level = by_len[d];
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t a = 0; a < static_cast<std::int64_t>(level.size()); ++a) build_row(ms, rows, level[a], rows[level[a]]);
  }
  return rows;
}

Wide row_lookup(const CongRow& row, VertexId v) {
  auto it = std::lower_bound(row.begin(), row.end(), v, [](const auto& e, VertexId x) { return e.first < x; });
  return it != row.end() && it->first == v ? it->second : Wide{0};
}

std::vector<std::string> check_sparse_constraints(const WeightedMultiset& ms, Exec exec) {
  std::vector<std::string> out;
  const NodeId n = static_cast<NodeId>(ms.forest.size());
  if (ms.path_node.size() != static_cast<std::size_t>(n) || ms.open.size() != static_cast<std::size_t>(n)) {
    out.push_back("multiset bookkeeping size mismatch");
    return out;
  }
  if (ms.forest.roots().size() != 1) out.push_back("expected exactly one source copy");
  for (NodeId p = 0; p < n; ++p) {
    // the weight rule is a function of length; a node's length must match its layer
    if (ms.forest.length(p) > ms.depth) out.push_back("granularity violated at p=" + std::to_string(p));
    if (ms.open[p] && static_cast<int>(ms.forest.children(p).size()) != ms.children_per_open)
      out.push_back("demand violated at p=" + std::to_string(p) + " (" + std::to_string(ms.forest.children(p).size()) +
                    " children, need " + std::to_string(ms.children_per_open) + ")");
    if (!ms.open[p] && !ms.forest.children(p).empty()) out.push_back("closed path with children at p=" + std::to_string(p));
  }
  auto rows = cong_tables(ms, exec);
  for (NodeId p = 0; p < n; ++p) {
    const Wide cap = 2 * ms.scaled_weight(p);
    for (const auto& [v, s] : rows[p])
      if (s > cap)
        out.push_back("capacity violated at (p,v)=(" + std::to_string(p) + "," + std::to_string(v) + "): " + wide_str(s) +
                      " > " + wide_str(cap) + " scaled");
  }
  return out;
}

SparsifyProcess::SparsifyProcess(const PathIndex& pi, const FractionalPathSolution& x, int k, int g, Rng& rng)
    : pi_(pi), x_(x.x), rng_(rng) {
  if (k < 1 || g < 1) throw validation_error("sparsify", "k and g must be positive");
  if (k * g < 4) throw validation_error("sparsify", "(k/4)*g must be at least 1");
  if (x_.size() != pi.size()) throw validation_error("sparsify", "LP vector does not match the path index");
  if (pi.size() == 0) throw validation_error("sparsify", "empty path index");
  for (double& v : x_)
    if (v < 1e-9) v = 0.0;
  ms_.gbase = g;
  ms_.k = k;
  ms_.children_per_open = k * g / 4;
  ms_.depth = pi.depth();
  ms_.forest.add_root(pi.node(0).vertex);
  ms_.path_node.push_back(0);
  ms_.open.push_back(!pi.node(0).closed);
  int vmax = 0;
  for (std::size_t i = 0; i < pi.size(); ++i) vmax = std::max(vmax, pi.node(static_cast<std::int32_t>(i)).vertex + 1);
  layer_of_.assign(vmax, -1);
  for (std::size_t i = 0; i < pi.size(); ++i) {
    const auto& nd = pi.node(static_cast<std::int32_t>(i));
    layer_of_[nd.vertex] = nd.layer;
  }
}

bool SparsifyProcess::done() const { return frontier_ >= ms_.depth; }

void SparsifyProcess::advance() {
  if (done()) return;
  const NodeId end = static_cast<NodeId>(ms_.forest.size());
  for (NodeId p = 0; p < end; ++p) {
    if (ms_.forest.length(p) != frontier_ || !ms_.open[p]) continue;
    const auto& nd = pi_.node(ms_.path_node[p]);
    std::vector<double> w(nd.child_count);
    double total = 0;
    for (int c = 0; c < nd.child_count; ++c) total += w[c] = x_[nd.first_child + c];
    if (nd.child_count == 0 || total <= 0)
      throw stage_error("sparsify", "open path " + std::to_string(p) + " has no LP mass below it");
    std::discrete_distribution<int> pick(w.begin(), w.end());
    for (int d = 0; d < ms_.children_per_open; ++d) {
      std::int32_t c = nd.first_child + pick(rng_);
      ms_.forest.add_child(p, pi_.node(c).vertex);
      ms_.path_node.push_back(c);
      ms_.open.push_back(!pi_.node(c).closed);
    }
  }
  ++frontier_;
}

double SparsifyProcess::path_cong(std::int32_t q, VertexId v, int layer) const {
  // sum of x over index descendants of q (q included) ending at v
  std::vector<std::int32_t> level{q}, next;
  for (int d = pi_.node(q).layer; d < layer; ++d) {
    next.clear();
    for (std::int32_t a : level) {
      const auto& nd = pi_.node(a);
      for (int c = 0; c < nd.child_count; ++c) next.push_back(nd.first_child + c);
    }
    level.swap(next);
  }
  double s = 0;
  for (std::int32_t a : level)
    if (pi_.node(a).vertex == v) s += x_[a];
  return s;
}

double SparsifyProcess::conditional_congestion(NodeId p, VertexId v) const {
  if (v < 0 || v >= static_cast<VertexId>(layer_of_.size()) || layer_of_[v] < 0) return 0.0;
  const int lv = layer_of_[v];
  if (lv < ms_.forest.length(p)) return 0.0;
  auto levels = ms_.forest.descendants_by_distance(p, std::max(0, std::min(lv, frontier_) - ms_.forest.length(p)));
  if (lv <= frontier_) {
    double s = 0;
    for (NodeId q : levels.back())
      if (ms_.forest.end_vertex(q) == v) s += ms_.weight(q);
    return s;
  }
  if (ms_.forest.length(p) > frontier_) return 0.0;
  double s = 0;
  for (NodeId q : levels.back()) {
    double xq = x_[ms_.path_node[q]];
    if (xq <= 0) continue;
    s += ms_.weight(q) / xq * path_cong(ms_.path_node[q], v, lv);
  }
  return s;
}

SparsifyResult sparsify(const PathIndex& pi, const FractionalPathSolution& x, int k, int g, std::uint64_t seed,
                        int max_retries) {
  std::vector<std::string> last;
  for (int a = 0; a < std::max(1, max_retries); ++a) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(a));
    SparsifyProcess proc(pi, x, k, g, rng);
    while (!proc.done()) proc.advance();
    last = check_sparse_constraints(proc.state());
    if (last.empty()) return {proc.take(), a + 1};
  }
  throw stage_error("sparsify", "RetriesExhausted(" + std::to_string(max_retries) + "): " + last.front());
}

nlohmann::json multiset_to_json(const WeightedMultiset& ms) {
  auto j = solution_to_json(ms.forest);
  j["gbase"] = ms.gbase;
  j["k"] = ms.k;
  j["children_per_open"] = ms.children_per_open;
  return j;
}

}  // namespace arbor
