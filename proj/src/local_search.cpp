#include "arbor/local_search.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "arbor/oracle.hpp"
#include "arbor/pruning.hpp"

namespace arbor {

namespace {

// keeps the first d children of every node, breadth first
SolutionForest trim_tree(const SolutionForest& t, int d) {
  std::vector<char> keep(t.size(), 0);
  if (t.empty()) return {};
  keep[0] = 1;
  for (NodeId q = 0; q < static_cast<NodeId>(t.size()); ++q) {
    if (!keep[q]) continue;
    const auto& ch = t.children(q);
    for (int i = 0; i < std::min<int>(d, static_cast<int>(ch.size())); ++i) keep[ch[i]] = 1;
  }
  return t.retain(keep).forest;
}

// non-source vertex -> owning source among installed trees
std::map<VertexId, VertexId> owners(const SearchState& st) {
  std::map<VertexId, VertexId> own;
  for (const auto& [s, t] : st.solution)
    for (NodeId q = 1; q < static_cast<NodeId>(t.size()); ++q) own[t.end_vertex(q)] = s;
  return own;
}

// nodes of t whose vertex belongs to an installed tree of another source
std::vector<char> conflicts(const SearchState& st, const SolutionForest& t, VertexId src) {
  auto own = owners(st);
  std::vector<char> r(t.size(), 0);
  for (NodeId q = 1; q < static_cast<NodeId>(t.size()); ++q) {
    auto it = own.find(t.end_vertex(q));
    if (it != own.end() && it->second != src) r[q] = 1;
  }
  return r;
}

bool collapsible(const SearchState& st, const SolutionForest& t, VertexId src, int kc) {
  auto r = conflicts(st, t, src);
  std::vector<int> per(t.max_length() + 1, 0);
  for (NodeId q = 0; q < static_cast<NodeId>(t.size()); ++q) per[t.length(q)] += r[q];
  for (int j = 1; j < static_cast<int>(per.size()); ++j)
    if (per[j] > ipow(kc, j)) return false;
  return true;
}

std::vector<int> ring_sizes(const SearchState& st) {
  std::vector<int> out;
  for (const Ring& r : st.rings) out.push_back(static_cast<int>(r.blocking.size()));
  return out;
}

void record(SearchState& st, const std::string& action) {
  PotentialRecord rec{st.steps, ring_sizes(st), action};
  if (!st.trace.empty() && !potential_less(rec.ring_sizes, st.trace.back().ring_sizes) &&
      action != "install-target")
    throw stage_error("local_search", "potential did not decrease at step " + std::to_string(st.steps));
  st.trace.push_back(std::move(rec));
}

bool has_addable(const SearchState& st, VertexId s) {
  for (const Ring& r : st.rings)
    if (std::find(r.addable_source.begin(), r.addable_source.end(), s) != r.addable_source.end()) return true;
  return false;
}

bool is_blocking(const SearchState& st, VertexId s) {
  for (const Ring& r : st.rings)
    if (std::find(r.blocking.begin(), r.blocking.end(), s) != r.blocking.end()) return true;
  return false;
}

}  // namespace

SingleSourceOracle exact_oracle(int depth_cap, long node_cap) {
  return [=](const Instance& inst, const std::vector<char>& blocked, VertexId s, int deg) {
    return find_degree_k(inst, {s}, deg, blocked, depth_cap, node_cap);
  };
}

LsPruneResult ls_prune_arborescence(const SolutionForest& tree, const std::vector<char>& in_R, int kprime) {
  if (tree.roots().size() != 1) throw validation_error("ls_prune", "expected a single arborescence");
  const double quarter = kprime / 4.0;
  std::vector<int> r_per(tree.max_length() + 1, 0);
  for (NodeId q = 0; q < static_cast<NodeId>(tree.size()); ++q) r_per[tree.length(q)] += in_R[q] != 0;
  for (int i = 0; i < static_cast<int>(r_per.size()); ++i)
    if (r_per[i] > ipow(quarter, i) + 1e-9)
      throw stage_error("ls_prune", "premise violated: " + std::to_string(r_per[i]) + " R paths at layer " +
                                        std::to_string(i));
  SweepResult sw = sweep_prune(tree, in_R, 0.75 * kprime);
  if (sw.removed[0]) throw stage_error("ls_prune", "root removed");
  LsPruneResult out;
  out.removed_per_layer.assign(r_per.size(), 0);
  for (NodeId q = 0; q < static_cast<NodeId>(tree.size()); ++q) out.removed_per_layer[tree.length(q)] += sw.removed[q];
  out.result = std::move(sw.result);
  return out;
}

LsDegrees ls_degrees(int k, double alpha, const ParamProfile& p) {
  if (!(alpha >= 1.0) || k < 1) throw validation_error("local_search", "need k >= 1 and alpha >= 1");
  auto deg = [&](int div) { return std::max(1, static_cast<int>(k / (div * alpha))); };
  return {deg(p.ls_addable_div), deg(p.ls_collapse_div), deg(p.ls_solution_div)};
}

bool potential_less(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i)
    if (a[i] != b[i]) return a[i] < b[i];
  return a.size() > b.size();  // a finite entry beats the implicit infinity
}

std::vector<std::string> solution_overlaps(const SearchState& st) {
  std::map<VertexId, VertexId> seen;
  std::vector<std::string> out;
  for (const auto& [s, t] : st.solution)
    for (NodeId q = 1; q < static_cast<NodeId>(t.size()); ++q) {
      auto [it, fresh] = seen.emplace(t.end_vertex(q), s);
      if (!fresh && it->second != s)
        out.push_back("vertex " + std::to_string(t.end_vertex(q)) + " used by sources " + std::to_string(it->second) +
                      " and " + std::to_string(s));
    }
  return out;
}

std::optional<SolutionForest> find_addable(SearchState& st, const Instance& inst, VertexId s,
                                           const SingleSourceOracle& oracle, int k, double alpha,
                                           const ParamProfile& profile) {
  std::vector<char> blocked(inst.vertex_count(), 0);
  for (const Ring& r : st.rings)
    for (const SolutionForest& t : r.addable)
      for (NodeId q = 1; q < static_cast<NodeId>(t.size()); ++q) blocked[t.end_vertex(q)] = 1;
  ++st.oracle_calls;
  auto got = oracle(inst, blocked, s, std::max(1, static_cast<int>(k / alpha)));
  if (!got) {
    ++st.oracle_failures;
    return std::nullopt;
  }
  return trim_tree(*got, ls_degrees(k, alpha, profile).addable);
}

std::optional<VertexId> try_collapse(SearchState& st, const Instance& inst, int k, double alpha,
                                     const ParamProfile& profile) {
  (void)inst;
  const LsDegrees deg = ls_degrees(k, alpha, profile);
  std::optional<VertexId> first;
  while (true) {
    bool found = false;
    for (std::size_t ri = 0; ri < st.rings.size() && !found; ++ri) {
      Ring& ring = st.rings[ri];
      for (std::size_t ai = 0; ai < ring.addable.size() && !found; ++ai) {
        const VertexId c = ring.addable_source[ai];
        if (!collapsible(st, ring.addable[ai], c, deg.collapse)) continue;
        found = true;
        auto pruned = ls_prune_arborescence(ring.addable[ai], conflicts(st, ring.addable[ai], c), deg.addable);
        // the older tree of c is displaced
        st.solution[c] = trim_tree(pruned.result.forest, deg.solution);
        ++st.collapses;
        ++st.steps;
        if (!first) first = c;
        if (auto ov = solution_overlaps(st); !ov.empty()) throw stage_error("local_search", "overlap after install: " + ov[0]);
        if (c == st.target) {
          st.rings.clear();
          record(st, "install-target");
          return first;
        }
        std::size_t where = st.rings.size();
        for (std::size_t r = 0; r < st.rings.size(); ++r) {
          auto& b = st.rings[r].blocking;
          auto it = std::find(b.begin(), b.end(), c);
          if (it != b.end()) {
            b.erase(it);
            where = r;
            break;
          }
        }
        if (where == st.rings.size()) throw stage_error("local_search", "collapsed source was not blocking");
        st.rings.resize(where + 1);
        record(st, "collapse " + std::to_string(c));
      }
    }
    if (!found) return first;
  }
}

void augment_source(SearchState& st, const Instance& inst, VertexId s0, const SingleSourceOracle& oracle, int k,
                    double alpha, const ParamProfile& profile, int step_cap) {
  if (st.solution.count(s0)) throw validation_error("local_search", "source already covered");
  st.target = s0;
  st.rings.clear();
  const int kc = ls_degrees(k, alpha, profile).collapse;
  while (!st.solution.count(s0)) {
    if (st.steps >= step_cap)
      throw stage_error("local_search", "StepCapExceeded(" + std::to_string(step_cap) + "): potential " +
                                            (st.trace.empty() ? std::string("-") : potential_csv({st.trace.back()})));
    // Greedy ring: every candidate gets one oracle call per pass until a pass adds nothing
    std::vector<VertexId> cand{s0};
    int blocking_total = 0;
    for (const Ring& r : st.rings) {
      cand.insert(cand.end(), r.blocking.begin(), r.blocking.end());
      blocking_total += static_cast<int>(r.blocking.size());
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    st.rings.emplace_back();
    bool added = true;
    while (added) {
      added = false;
      for (VertexId c : cand) {
        if (has_addable(st, c)) continue;
        auto t = find_addable(st, inst, c, oracle, k, alpha, profile);
        if (!t) continue;
        st.rings.back().addable_source.push_back(c);
        st.rings.back().addable.push_back(std::move(*t));
        added = true;
      }
    }
    Ring& ring = st.rings.back();
    if (static_cast<int>(ring.addable.size()) < blocking_total) ++st.greedy_shortfalls;
    if (ring.addable.empty()) {
      st.rings.pop_back();
      throw stage_error("local_search", "Stalled: no addable tree for any candidate of source " + std::to_string(s0) +
                                            " at step " + std::to_string(st.steps));
    }
    auto own = owners(st);
    std::vector<VertexId> blockers;
    for (std::size_t ai = 0; ai < ring.addable.size(); ++ai) {
      const SolutionForest& t = ring.addable[ai];
      for (NodeId q = 1; q < static_cast<NodeId>(t.size()); ++q) {
        auto it = own.find(t.end_vertex(q));
        if (it == own.end() || it->second == ring.addable_source[ai]) continue;
        if (!is_blocking(st, it->second)) blockers.push_back(it->second);
      }
    }
    std::sort(blockers.begin(), blockers.end());
    blockers.erase(std::unique(blockers.begin(), blockers.end()), blockers.end());
    ring.blocking = blockers;
    bool any = false;
    for (std::size_t ai = 0; ai < ring.addable.size(); ++ai)
      any = any || collapsible(st, ring.addable[ai], ring.addable_source[ai], kc);
    if (!any) {
      if (ring.blocking.size() < ring.addable.size()) ++st.growth_violations;
      st.blocking_totals.push_back(blocking_total + static_cast<int>(ring.blocking.size()));
    }
    ++st.steps;
    record(st, "ring " + std::to_string(st.rings.size()));
    try_collapse(st, inst, k, alpha, profile);
  }
}

SolutionForest solve_multi_source(const LayeredInstance& li, int k, const SingleSourceOracle& oracle, double alpha,
                                  const ParamProfile& profile, int step_cap, SearchState* state_out) {
  SearchState st;
  std::vector<VertexId> src = li.base.sources();
  std::sort(src.begin(), src.end());
  for (VertexId s : src) augment_source(st, li.base, s, oracle, k, alpha, profile, step_cap);
  SolutionForest out;
  for (const auto& [s, t] : st.solution) out.append_tree(t, 0);
  if (state_out) *state_out = std::move(st);
  return out;
}

std::string potential_csv(const std::vector<PotentialRecord>& trace) {
  std::ostringstream os;
  for (const auto& r : trace) {
    os << r.step << ',';
    for (std::size_t i = 0; i < r.ring_sizes.size(); ++i) os << (i ? ";" : "") << r.ring_sizes[i];
    os << ',' << r.action << '\n';
  }
  return os.str();
}

}  // namespace arbor
