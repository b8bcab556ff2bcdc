#include "arbor/lll_rounder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "arbor/pruning.hpp"

namespace arbor {

using json = nlohmann::json;

namespace {

// smallest t >= 0 with s * 2^t > w
int weight_class(Wide s, Wide w) {
  int t = 0;
  while (s <= w) {
    s *= 2;
    ++t;
  }
  return t;
}

double as_double(Wide x) { return static_cast<double>(x); }

void add_row(std::unordered_map<VertexId, Wide>& acc, const CongRow& row) {
  for (const auto& [v, s] : row) acc[v] += s;
}

Wide lookup(const std::unordered_map<VertexId, Wide>& m, VertexId v) {
  auto it = m.find(v);
  return it == m.end() ? Wide(0) : it->second;
}

}  // namespace

std::string BadEvent::describe() const {
  switch (kind) {
    case Kind::B1:
      return "B1(v=" + std::to_string(v) + ",t=" + std::to_string(t) + ")";
    case Kind::B2:
      return "B2(p=" + std::to_string(p) + ")";
    default:
      return "B3(source=" + std::to_string(p) + ")";
  }
}

RoundingState::RoundingState(const WeightedMultiset& pp, const ParamProfile& profile, Exec exec)
    : pp_(pp), profile_(profile), rows_(cong_tables(pp, exec)) {
  if (pp.forest.roots().size() != 1) throw validation_error("round", "P' must have exactly one source copy");
  if (profile.sample_children < 1) throw validation_error("round", "sample_children must be positive");
  for (NodeId p = 0; p < static_cast<NodeId>(pp.forest.size()); ++p) {
    VertexId v = pp.forest.end_vertex(p);
    if (v >= static_cast<VertexId>(vlayer_.size())) vlayer_.resize(v + 1, -1);
    vlayer_[v] = pp.forest.length(p);
    if (pp.open[p] && static_cast<int>(pp.forest.children(p).size()) != pp.children_per_open)
      throw validation_error("round", "open node of P' without children_per_open children");
  }
  q_.add_root(pp.forest.end_vertex(0));
  pnode_.push_back(0);
  marked_.push_back(0);
}

int RoundingState::layer_of(VertexId v) const {
  return v >= 0 && v < static_cast<VertexId>(vlayer_.size()) ? vlayer_[v] : -1;
}

Wide RoundingState::layer_weight(int layer) const {
  Wide w = 1;
  for (int i = layer; i < pp_.depth; ++i) w *= pp_.gbase;
  return w;
}

std::vector<NodeId> RoundingState::open_frontier() const {
  std::vector<NodeId> out;
  for (NodeId q = 0; q < static_cast<NodeId>(q_.size()); ++q)
    if (q_.length(q) == frontier_ && pp_.open[pnode_[q]]) out.push_back(q);
  return out;
}

double RoundingState::path_congestion(NodeId p, VertexId v) const {
  const int lv = layer_of(v);
  if (lv < 0) return 0;
  auto by = q_.descendants_by_distance(p, std::max(0, frontier_ - q_.length(p)));
  if (lv <= frontier_) {
    int c = 0;
    for (const auto& level : by)
      for (NodeId q : level) c += q_.end_vertex(q) == v;
    return c;
  }
  if (q_.length(p) > frontier_) return 0;
  Wide s = 0;
  for (NodeId f : by.back())
    if (q_.length(f) == frontier_) s += row_lookup(rows_[pnode_[f]], v);
  return as_double(s) / as_double(layer_weight(frontier_));
}

double RoundingState::vertex_congestion(VertexId v) const {
  double s = 0;
  for (NodeId r : q_.roots()) s += path_congestion(r, v);
  return s;
}

void RoundingState::accept(const Candidate& c, const std::vector<char>& marked_now) {
  for (std::size_t i = 0; i < c.parents.size(); ++i) {
    const auto& ch = pp_.forest.children(pnode_[c.parents[i]]);
    for (int d : c.draws[i]) {
      q_.add_child(c.parents[i], pp_.forest.end_vertex(ch[d]));
      pnode_.push_back(ch[d]);
    }
  }
  for (std::size_t q = 0; q < marked_now.size() && q < marked_.size(); ++q) marked_[q] |= marked_now[q];
  marked_.resize(q_.size(), 0);
  ++frontier_;
}

Candidate round_layer(const RoundingState& st, Rng& rng) {
  Candidate c;
  c.parents = st.open_frontier();
  const int m = st.multiset().children_per_open;
  std::uniform_int_distribution<int> pick(0, m - 1);
  for (std::size_t i = 0; i < c.parents.size(); ++i) {
    std::vector<int> d(st.profile().sample_children);
    for (int& x : d) x = pick(rng);
    c.draws.push_back(std::move(d));
  }
  return c;
}

Detection detect_bad_events(const RoundingState& st, const Candidate& c) {
  const auto& pp = st.multiset();
  const auto& rows = st.tables();
  const auto& prof = st.profile();
  const SolutionForest& q = st.partial();
  const int i = st.frontier();
  const int ell = prof.ell;
  const Wide m = pp.children_per_open;
  const Wide sample = prof.sample_children;
  const Wide w_i = st.layer_weight(i);
  const Wide w_next = st.layer_weight(i + 1);

  Detection det;
  det.marked_now.assign(q.size(), 0);
  std::vector<int> slot(q.size(), -1);
  for (std::size_t j = 0; j < c.parents.size(); ++j) slot[c.parents[j]] = static_cast<int>(j);

  // B1: one event per (vertex, weight class)
  struct Acc {
    Wide expected = 0, actual = 0;
    std::vector<NodeId> deps;
  };
  std::map<std::pair<VertexId, int>, Acc> acc;
  for (std::size_t j = 0; j < c.parents.size(); ++j) {
    const NodeId f = c.parents[j];
    const auto& ch = pp.forest.children(st.pnode(f));
    std::vector<int> times(ch.size(), 0);
    for (int d : c.draws[j]) ++times[d];
    for (std::size_t a = 0; a < ch.size(); ++a)
      for (const auto& [v, s] : rows[ch[a]]) {
        Acc& e = acc[{v, weight_class(s, w_next)}];
        e.expected += s;
        e.actual += s * times[a];
        if (e.deps.empty() || e.deps.back() != f) e.deps.push_back(f);
      }
  }
  std::map<VertexId, double> bound;
  for (auto& [key, e] : acc) {
    const double rhs = 2.0 * as_double(sample * e.expected) / as_double(m * w_next) + prof.b1_slack;
    bound[key.first] += rhs;
    if (m * e.actual > 2 * sample * e.expected + Wide(prof.b1_slack) * m * w_next) {
      BadEvent ev;
      ev.kind = BadEvent::Kind::B1;
      ev.v = key.first;
      ev.t = key.second;
      ev.lhs = as_double(e.actual) / as_double(w_next);
      ev.rhs = rhs;
      ev.depends_on = std::move(e.deps);
      det.events.push_back(std::move(ev));
    }
  }
  for (auto [v, b] : bound) {
    det.bound_by_vertex.push_back({v, b});
    det.congestion_bound_max = std::max(det.congestion_bound_max, b);
  }

  // marking: paths whose local congestion crosses L during this step
  const Wide L = prof.L_local;
  for (NodeId a = 0; a < static_cast<NodeId>(q.size()); ++a) {
    const int la = q.length(a);
    if (la > i || la < i + 1 - ell) continue;
    const int lo = std::max(1, i + 1 - la), hi = std::min(ell, pp.depth - la);
    if (lo > hi) continue;
    std::unordered_map<VertexId, Wide> before, after;
    const auto frontier_desc = q.descendants_by_distance(a, i - la);
    for (NodeId f : frontier_desc.back()) {
      add_row(before, rows[st.pnode(f)]);
      if (slot[f] < 0) continue;
      const auto& ch = pp.forest.children(st.pnode(f));
      for (int d : c.draws[slot[f]]) add_row(after, rows[ch[d]]);
    }
    auto by = pp.forest.descendants_by_distance(st.pnode(a), hi);
    for (int lp = lo; lp <= hi && !det.marked_now[a]; ++lp) {
      double crossings = 0;
      for (NodeId x : by[lp]) {
        VertexId v = pp.forest.end_vertex(x);
        if (lookup(before, v) <= L * w_i && lookup(after, v) > L * w_next) crossings += 1;
      }
      if (crossings * prof.mark_threshold_denom > ipow(prof.retain_children, lp)) det.marked_now[a] = 1;
    }
  }

  // B2: too many marked children; B3: the source itself is marked
  for (NodeId p = 0; p < static_cast<NodeId>(q.size()); ++p) {
    const int lp = q.length(p);
    if (lp < i - ell - 1 || lp > i - 1) continue;
    int marked = 0;
    for (NodeId ch : q.children(p)) marked += det.marked_now[ch];
    if (marked == 0 || static_cast<long>(marked) * prof.mark_frac_denom < prof.sample_children) continue;
    BadEvent ev;
    ev.kind = BadEvent::Kind::B2;
    ev.p = p;
    ev.lhs = marked;
    ev.rhs = static_cast<double>(prof.sample_children) / prof.mark_frac_denom;
    const auto frontier_desc = q.descendants_by_distance(p, i - lp);
    for (NodeId f : frontier_desc.back())
      if (slot[f] >= 0) ev.depends_on.push_back(f);
    std::sort(ev.depends_on.begin(), ev.depends_on.end());
    det.events.push_back(std::move(ev));
  }
  if (i < ell && det.marked_now[0]) {
    BadEvent ev;
    ev.kind = BadEvent::Kind::B3;
    ev.p = 0;
    ev.lhs = 1;
    ev.depends_on = c.parents;
    det.events.push_back(std::move(ev));
  }
  return det;
}

LayerOutcome resample_until_clear(const RoundingState& st, Candidate c, Rng& rng, int cap) {
  LayerOutcome out;
  out.detection = detect_bad_events(st, c);
  out.events_detected = static_cast<int>(out.detection.events.size());
  const int m = st.multiset().children_per_open;
  std::uniform_int_distribution<int> pick(0, m - 1);
  while (!out.detection.events.empty()) {
    const BadEvent& ev = out.detection.events.front();
    if (out.resamples >= cap)
      throw stage_error("round", "ResampleCapExceeded(" + std::to_string(cap) + "): layer " +
                                     std::to_string(st.frontier()) + " still has " + ev.describe());
    if (ev.depends_on.empty())
      throw stage_error("round", "event " + ev.describe() + " has no draws to resample");
    for (NodeId f : ev.depends_on) {
      auto it = std::lower_bound(c.parents.begin(), c.parents.end(), f);
      for (int& d : c.draws[it - c.parents.begin()]) d = pick(rng);
    }
    ++out.resamples;
    out.detection = detect_bad_events(st, c);
  }
  out.accepted = std::move(c);
  return out;
}

FinishResult delete_marked_and_extract_R(const RoundingState& st) {
  const auto& marked = st.ever_marked();
  if (!marked.empty() && marked[0]) throw stage_error("round", "source copy was marked");
  FinishResult out;
  std::vector<char> keep(marked.size());
  for (std::size_t q = 0; q < marked.size(); ++q) {
    keep[q] = !marked[q];
    out.marked_removed += marked[q];
  }
  out.q_prime = st.partial().retain(keep);
  const SolutionForest& f = out.q_prime.forest;
  const int ell = st.profile().ell;
  out.in_R.assign(f.size(), 0);
  for (NodeId p = 0; p < static_cast<NodeId>(f.size()); ++p) {
    auto by = f.descendants_by_distance(p, ell);
    std::unordered_map<VertexId, int> count;
    for (int d = 1; d <= ell; ++d)
      for (NodeId x : by[d]) ++count[f.end_vertex(x)];
    for (int d = 1; d <= ell; ++d)
      for (NodeId x : by[d])
        if (count[f.end_vertex(x)] > st.profile().L_local) out.in_R[x] = 1;
  }
  return out;
}

RoundResult round_multiset(const WeightedMultiset& pp, const ParamProfile& profile, std::uint64_t seed, Exec exec) {
  RoundResult res;
  res.k = pp.k;
  res.multiset_size = pp.forest.size();
  RoundingState st(pp, profile, exec);
  Rng rng = make_rng(seed, 1000);
  std::vector<VertexId> verts;
  for (NodeId p = 0; p < static_cast<NodeId>(pp.forest.size()); ++p) verts.push_back(pp.forest.end_vertex(p));
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());

  while (!st.done()) {
    const int layer = st.frontier();
    Candidate cand = round_layer(st, rng);
    int draws = 0;
    for (const auto& d : cand.draws) draws += static_cast<int>(d.size());
    LayerOutcome lo = resample_until_clear(st, std::move(cand), rng, profile.layer_resample_cap);
    st.accept(lo.accepted, lo.detection.marked_now);
    res.total_resamples += lo.resamples;

    double cmax = 0;
    for (VertexId v : verts) cmax = std::max(cmax, st.vertex_congestion(v));
    int viol = 0;
    for (auto [v, b] : lo.detection.bound_by_vertex)
      if (st.vertex_congestion(v) > b + 1e-9) ++viol;
    res.iterlowcong_violations += viol;
    res.trace.push_back({{"layer", layer},
                         {"draws", draws},
                         {"events_detected", lo.events_detected},
                         {"resamples", lo.resamples},
                         {"accepted_congestion_max", cmax},
                         {"congestion_bound_max", lo.detection.congestion_bound_max},
                         {"iterlowcong_violations", viol}});
  }

  FinishResult fin = delete_marked_and_extract_R(st);
  res.marked_removed = fin.marked_removed;
  for (char r : fin.in_R) res.r_size += r;
  SweepResult sw = bottom_to_top_prune(fin.q_prime.forest, fin.in_R, profile.ell, profile.retain_children);
  res.result = std::move(sw.result.forest);
  return res;
}

RoundResult round_from_lp(const MaxKResult& mk, int k, const ParamProfile& profile, std::uint64_t seed, Exec exec) {
  if (mk.k_star < 1) throw validation_error("round", "LP infeasible for every k >= 1");
  if (k <= 0) k = mk.k_star;
  if (k > mk.k_star)
    throw validation_error("round", "k=" + std::to_string(k) + " exceeds LP optimum " + std::to_string(mk.k_star));
  FractionalPathSolution x = mk.witness;
  if (k != mk.k_star) {
    LpOutcome lo = solve_lp_feasibility(build_path_lp(mk.index, k), 1e-9, exec);
    if (!lo.feasible) throw stage_error("round", "LP infeasible at k=" + std::to_string(k));
    x.x = std::move(lo.x);
  }
  SparsifyResult sp = sparsify(mk.index, x, k, profile.granularity_base, seed, profile.sparsify_retries);
  RoundResult res = round_multiset(sp.ms, profile, seed, exec);
  res.k = k;
  res.k_star = mk.k_star;
  res.sparsify_attempts = sp.attempts;
  return res;
}

RoundResult round_single_source(const LayeredInstance& li, int k, const ParamProfile& profile, std::uint64_t seed,
                                Exec exec) {
  if (li.layers.empty() || li.layers[0].size() != 1)
    throw validation_error("round", "rounding needs a single-source layered instance");
  return round_from_lp(max_feasible_k(li), k, profile, seed, exec);
}

}  // namespace arbor
