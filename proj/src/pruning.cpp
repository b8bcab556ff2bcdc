#include "arbor/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "arbor/congestion.hpp"

namespace arbor {

namespace {

// R members that have no R ancestor.
std::vector<char> top_of_R(const SolutionForest& sol, const std::vector<char>& in_R) {
  const NodeId n = static_cast<NodeId>(sol.size());
  std::vector<char> anc(n, 0), eff(n, 0);
  for (NodeId i = 0; i < n; ++i) {
    NodeId p = sol.parent(i);
    anc[i] = p != kNone && (anc[p] || in_R[p]);
    eff[i] = in_R[i] && !anc[i];
  }
  return eff;
}

std::int64_t count_marked(const std::vector<NodeId>& nodes, const std::vector<char>& mask) {
  std::int64_t c = 0;
  for (NodeId q : nodes) c += mask[q] ? 1 : 0;
  return c;
}

}  // namespace

PremiseReport check_btt_premise(const SolutionForest& sol, const std::vector<char>& in_R, int ell, int k) {
  if (ell < 2) throw validation_error("check_btt_premise", "ell must be >= 2");
  PremiseReport rep;
  auto eff = top_of_R(sol, in_R);
  const double bound = ipow(k, ell) / ((8.0 * ell) * (8.0 * ell));
  for (NodeId p = 0; p < static_cast<NodeId>(sol.size()); ++p) {
    if (eff[p]) continue;
    auto levels = sol.descendants_by_distance(p, ell);
    std::int64_t c = count_marked(levels[ell], eff);
    if (c > bound) {
      rep.pass = false;
      if (c > rep.offender_count) {
        rep.offender = p;
        rep.offender_count = c;
      }
    }
  }
  for (NodeId r : sol.roots()) {
    auto levels = sol.descendants_by_distance(r, ell);
    bool ok = true;
    for (int d = 0; d <= ell; ++d)
      if (count_marked(levels[d], eff) > ipow(k, d) / (8.0 * ell)) ok = false;
    rep.per_source[r] = ok;
  }
  return rep;
}

SweepResult sweep_prune(const SolutionForest& sol, const std::vector<char>& in_R, double max_removed_children) {
  const NodeId n = static_cast<NodeId>(sol.size());
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return sol.length(a) > sol.length(b); });
  SweepResult out;
  out.removed.assign(n, 0);
  for (NodeId q : order) {
    if (in_R[q]) {
      out.removed[q] = 1;
      continue;
    }
    int gone = 0;
    for (NodeId c : sol.children(q)) gone += out.removed[c];
    if (gone > max_removed_children + 1e-9) out.removed[q] = 1;
  }
  std::vector<char> keep(n);
  for (NodeId i = 0; i < n; ++i) keep[i] = !out.removed[i];
  out.result = sol.retain(keep);
  return out;
}

SweepResult bottom_to_top_prune(const SolutionForest& sol, const std::vector<char>& in_R, int ell, int k) {
  PremiseReport rep = check_btt_premise(sol, in_R, ell, k);
  if (!rep.pass)
    throw stage_error("bottom_to_top_prune", "premise violated at node " + std::to_string(rep.offender) + " (" +
                                                 std::to_string(rep.offender_count) + " R descendants)");
  return sweep_prune(sol, top_of_R(sol, in_R), (1.0 - 1.0 / (2.0 * ell)) * k);
}

std::vector<std::string> btt_trace_violations(const SolutionForest& sol, const std::vector<char>& in_R,
                                              const std::vector<char>& removed, int ell, int k) {
  std::vector<std::string> out;
  auto eff = top_of_R(sol, in_R);
  for (NodeId p = 0; p < static_cast<NodeId>(sol.size()); ++p) {
    if (sol.length(p) % ell != 0) continue;
    auto levels = sol.descendants_by_distance(p, ell);
    bool premise = true;
    for (int d = 0; d <= ell; ++d)
      if (count_marked(levels[d], eff) > ipow(k, d) / (8.0 * ell)) premise = false;
    if (!premise) continue;
    for (int d = 1; d <= ell; ++d) {
      double bound = 0.125 * ipow(1.0 + 2.0 / ell, ell - d + 1) * ipow(k, d);
      std::int64_t c = count_marked(levels[d], removed);
      if (c > bound + 1e-9)
        out.push_back("node " + std::to_string(p) + " distance " + std::to_string(d) + ": " + std::to_string(c) +
                      " removed > " + std::to_string(bound));
    }
  }
  return out;
}

DeletionStats adversarial_deletion_experiment(int k, int h, double alpha, double beta, int seeds, std::uint64_t seed0) {
  if (k < 1 || h < 1 || alpha < 1) throw validation_error("adversarial_deletion_experiment", "need k, h >= 1 and alpha >= 1");
  // level sizes k^d; node i at depth d has children i*k .. i*k+k-1
  std::vector<std::int64_t> size(h + 1, 1);
  for (int d = 1; d <= h; ++d) size[d] = size[d - 1] * k;
  if (size[h] > (std::int64_t{1} << 26)) throw budget_error("adversarial_deletion_experiment", "tree too large");
  const std::int64_t need = static_cast<std::int64_t>(std::floor(k - k / alpha + 1e-12)) + 1;  // kills to remove a node
  std::vector<double> cost(h + 1, 1.0);
  for (int d = h - 1; d >= 0; --d) cost[d] = static_cast<double>(std::min<std::int64_t>(need, k)) * cost[d + 1];

  DeletionStats st;
  st.removed_fraction.assign(h + 1, 0.0);
  st.predicted.assign(h + 1, 0.0);
  for (int d = 1; d <= h; ++d) st.predicted[d] = std::min(1.0, beta / std::pow(1.0 - 1.0 / alpha, h - d));

  for (int s = 0; s < seeds; ++s) {
    Rng rng = make_rng(seed0, s);
    std::vector<char> deleted(size[h], 0);
    auto child_order = [&]() {
      std::vector<int> o(k);
      std::iota(o.begin(), o.end(), 0);
      std::shuffle(o.begin(), o.end(), rng);
      return o;
    };
    // kill(d,i): spend exactly cost[d] sinks so that node (d,i) dies
    auto kill = [&](auto&& self, int d, std::int64_t i) -> void {
      if (d == h) {
        deleted[i] = 1;
        return;
      }
      auto o = child_order();
      for (std::int64_t c = 0; c < std::min<std::int64_t>(need, k); ++c) self(self, d + 1, i * k + o[c]);
    };
    auto spend = [&](auto&& self, int d, std::int64_t i, double budget, bool capped) -> void {
      if (d == h) {
        if (budget >= 1) deleted[i] = 1;
        return;
      }
      auto o = child_order();
      std::int64_t killed = 0;
      std::size_t c = 0;
      while (c < o.size() && budget >= cost[d + 1] && (!capped || killed < need)) {
        kill(kill, d + 1, i * k + o[c]);
        budget -= cost[d + 1];
        ++killed;
        ++c;
      }
      if (c < o.size() && budget >= 1 && (!capped || killed < need)) self(self, d + 1, i * k + o[c], budget, true);
    };
    spend(spend, 0, 0, std::floor(beta * static_cast<double>(size[h]) + 1e-9), false);

    std::vector<char> dead = deleted;
    std::vector<std::int64_t> dead_count(h + 1, 0);
    dead_count[h] = std::count(dead.begin(), dead.end(), 1);
    for (int d = h - 1; d >= 1; --d) {
      std::vector<char> up(size[d], 0);
      for (std::int64_t i = 0; i < size[d]; ++i) {
        int alive = 0;
        for (int c = 0; c < k; ++c) alive += !dead[i * k + c];
        up[i] = alive * alpha < k - 1e-9;
      }
      dead.swap(up);
      dead_count[d] = std::count(dead.begin(), dead.end(), 1);
    }
    for (int d = 1; d <= h; ++d) st.removed_fraction[d] += static_cast<double>(dead_count[d]) / size[d] / seeds;
  }
  st.root_loss = st.removed_fraction[1];
  return st;
}

GroupPartition partition_groups(const SolutionForest& sol, int ell) {
  if (ell < 1) throw validation_error("partition_groups", "ell must be >= 1");
  GroupPartition gp;
  gp.ell = ell;
  gp.groups.assign(ell, {});
  gp.group_of.assign(sol.size(), 0);
  gp.k_of_group.assign(ell + 1, 0);
  for (NodeId i = 0; i < static_cast<NodeId>(sol.size()); ++i) {
    int len = sol.length(i);
    int j = len == 0 ? 0 : (len - 1) % ell + 1;
    gp.group_of[i] = j;
    if (j > 0) gp.groups[j - 1].push_back(i);
    gp.k_of_group[j] = std::max(gp.k_of_group[j], static_cast<int>(sol.children(i).size()));
  }
  return gp;
}

double group_k(const GroupPartition& gp, int length, int lp) {
  double k = 1.0;
  for (int d = length; d < length + lp; ++d) k *= gp.k_of_group[d == 0 ? 0 : (d - 1) % gp.ell + 1];
  return k;
}

std::vector<int> group_congestion(const SolutionForest& sol, const GroupPartition& gp) {
  std::unordered_map<std::int64_t, int> count;
  auto key = [&](NodeId i) { return static_cast<std::int64_t>(gp.group_of[i]) << 32 | sol.end_vertex(i); };
  for (NodeId i = 0; i < static_cast<NodeId>(sol.size()); ++i)
    if (gp.group_of[i] > 0) count[key(i)]++;
  std::vector<int> out(sol.size(), 0);
  for (NodeId i = 0; i < static_cast<NodeId>(sol.size()); ++i)
    if (gp.group_of[i] > 0) out[i] = count[key(i)];
  return out;
}

namespace {

// cong_G(D(p, l')) for every node and l' = 0..ell
std::vector<std::vector<double>> descendant_group_congestion(const SolutionForest& sol, const GroupPartition& gp) {
  auto cg = group_congestion(sol, gp);
  std::vector<std::vector<double>> out(sol.size());
  for (NodeId p = 0; p < static_cast<NodeId>(sol.size()); ++p) {
    auto levels = sol.descendants_by_distance(p, gp.ell);
    out[p].assign(gp.ell + 1, 0.0);
    for (int d = 0; d <= gp.ell; ++d)
      for (NodeId q : levels[d]) out[p][d] += cg[q];
  }
  return out;
}

struct Term {
  NodeId q;
  double tau;
};

struct EventClass {
  NodeId p;
  int lp;
  int t;
  double limit;  // threshold on the kept sum
  std::vector<Term> terms;
};

}  // namespace

GroupSampleResult sample_down_group(const SolutionForest& sol, const GroupPartition& gp, int j,
                                    const ParamProfile& profile, Rng& rng) {
  const int ell = gp.ell;
  if (j < 1 || j > ell) throw validation_error("sample_down_group", "group index out of range");
  const NodeId n = static_cast<NodeId>(sol.size());
  const auto& G = gp.groups[j - 1];
  const double L = profile.L_local, K = profile.K_global, c = profile.c_const;

  // pairs under common parents; the lowest-vertex child of an odd family stays
  std::vector<int> pair_of(n, -1), side(n, 0);
  int pairs = 0;
  {
    std::vector<NodeId> parents;
    for (NodeId q : G)
      if (sol.parent(q) != kNone) parents.push_back(sol.parent(q));
    std::sort(parents.begin(), parents.end());
    parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
    for (NodeId r : parents) {
      std::vector<NodeId> ch = sol.children(r);
      std::sort(ch.begin(), ch.end(), [&](NodeId a, NodeId b) {
        return std::pair(sol.end_vertex(a), a) < std::pair(sol.end_vertex(b), b);
      });
      std::size_t start = ch.size() % 2;
      for (std::size_t i = start; i + 1 < ch.size(); i += 2) {
        pair_of[ch[i]] = pair_of[ch[i + 1]] = pairs++;
        side[ch[i + 1]] = 1;
      }
    }
  }
  std::bernoulli_distribution coin(0.5);
  std::vector<char> var(pairs);
  for (auto& v : var) v = coin(rng);
  auto kept = [&](NodeId q) { return pair_of[q] < 0 || var[pair_of[q]] != side[q]; };

  // event classes over cong_G(D(p,l'), D(q,l'))
  std::vector<EventClass> events;
  std::vector<int> idx_in_G(n, -1);
  for (std::size_t a = 0; a < G.size(); ++a) idx_in_G[G[a]] = static_cast<int>(a);
  for (int lp = 0; lp < ell; ++lp) {
    std::vector<std::unordered_map<VertexId, int>> ends(G.size());
    std::unordered_map<VertexId, std::vector<std::pair<int, int>>> by_vertex;
    for (std::size_t a = 0; a < G.size(); ++a) {
      auto levels = sol.descendants_by_distance(G[a], lp);
      for (NodeId q : levels[lp]) ends[a][sol.end_vertex(q)]++;
      for (auto [v, cnt] : ends[a]) by_vertex[v].push_back({static_cast<int>(a), cnt});
    }
    for (std::size_t a = 0; a < G.size(); ++a) {
      std::unordered_map<int, double> tau;
      for (auto [v, cnt] : ends[a])
        for (auto [b, cb] : by_vertex[v]) tau[b] += static_cast<double>(cnt) * cb;
      const NodeId p = G[a];
      const double kp = group_k(gp, sol.length(p), lp);
      const double scale = L * kp;
      std::map<int, std::vector<Term>> classes;
      std::vector<std::pair<int, double>> sorted(tau.begin(), tau.end());
      std::sort(sorted.begin(), sorted.end());
      for (auto [b, t] : sorted) {
        if (t <= 0) continue;
        int cls = std::max(0, static_cast<int>(std::floor(std::log2(scale / t))));
        classes[cls].push_back({G[b], t});
      }
      for (auto& [t, terms] : classes) {
        double all = 0;
        for (const Term& tm : terms) all += tm.tau;
        double base = 24.0 * c * ell * ell * ell * L * kp;
        if (t > 2 * ell) base /= K;
        events.push_back({p, lp, t, base + 0.5 * (1.0 + 1.0 / ell) * all, std::move(terms)});
      }
    }
  }
  std::sort(events.begin(), events.end(), [](const EventClass& a, const EventClass& b) {
    return std::tie(a.p, a.lp, a.t) < std::tie(b.p, b.lp, b.t);
  });

  auto first_occurring = [&]() -> const EventClass* {
    for (const EventClass& e : events) {
      if (!kept(e.p)) continue;
      double s = 0;
      for (const Term& tm : e.terms)
        if (kept(tm.q)) s += tm.tau;
      if (s > e.limit * (1 + 1e-12)) return &e;
    }
    return nullptr;
  };

  GroupSampleResult res;
  bool counted = false;
  while (const EventClass* e = first_occurring()) {
    if (!counted) {
      for (const EventClass& x : events) {
        if (!kept(x.p)) continue;
        double s = 0;
        for (const Term& tm : x.terms)
          if (kept(tm.q)) s += tm.tau;
        res.initial_events += s > x.limit * (1 + 1e-12);
      }
      counted = true;
    }
    if (res.resamples >= profile.group_resample_cap)
      throw stage_error("sample_down_group", "resample cap exceeded at event (p=" + std::to_string(e->p) +
                                                 ", l'=" + std::to_string(e->lp) + ", t=" + std::to_string(e->t) + ")");
    for (const Term& tm : e->terms)
      if (pair_of[tm.q] >= 0) var[pair_of[tm.q]] = coin(rng);
    ++res.resamples;
  }

  std::vector<char> keep(n, 1);
  for (NodeId q : G) keep[q] = kept(q);
  res.result = sol.retain(keep);

  // no-increase and k-product bookkeeping on the accepted sample
  const SolutionForest& out = res.result.forest;
  GroupPartition gp2 = partition_groups(out, ell);
  auto pre = descendant_group_congestion(sol, gp);
  auto post = descendant_group_congestion(out, gp2);
  for (NodeId i = 0; i < static_cast<NodeId>(out.size()); ++i) {
    NodeId o = res.result.origin[i];
    int len = sol.length(o);
    for (int lp = 1; lp <= ell; ++lp) {
      double k0 = group_k(gp, len, lp), k1 = group_k(gp2, len, lp);
      if (k0 <= 0 || k1 <= 0) continue;
      if (post[i][lp] / k1 > c * ipow(ell, 4) * L + (1.0 + 1.0 / ell) * pre[o][lp] / k0 + 1e-9) res.no_increase_failures++;
    }
    if (gp.group_of[o] == j)
      for (int lp = 1; lp < ell; ++lp)
        if (group_k(gp, len, lp) != group_k(gp2, len, lp) && group_k(gp2, len, lp) > 0) res.k_product_mismatches++;
  }
  return res;
}

HotPruneResult prune_hot_paths(const SolutionForest& sol, int ell, double group_bound, int k) {
  GroupPartition gp = partition_groups(sol, ell);
  auto cg = group_congestion(sol, gp);
  std::vector<char> in_R(sol.size(), 0);
  HotPruneResult out;
  for (NodeId i = 0; i < static_cast<NodeId>(sol.size()); ++i)
    if (cg[i] > group_bound) {
      in_R[i] = 1;
      out.r_size++;
    }
  out.sweep = bottom_to_top_prune(sol, in_R, ell, k);
  return out;
}

LocalToGlobalResult local_to_global(const SolutionForest& sol, int k, const ParamProfile& profile, Rng& rng) {
  const int ell = profile.ell;
  int nv = 0;
  for (NodeId i = 0; i < static_cast<NodeId>(sol.size()); ++i) nv = std::max(nv, sol.end_vertex(i) + 1);
  CongestionReport cr = local_congestion(sol, nv, ell);
  if (cr.local_max[ell] > profile.L_local)
    throw validation_error("local_to_global", "input local congestion " + std::to_string(cr.local_max[ell]) + " exceeds L");
  if (cr.max_global > profile.K_global)
    throw validation_error("local_to_global", "input global congestion " + std::to_string(cr.max_global) + " exceeds K");

  LocalToGlobalResult out;
  SolutionForest cur = sol;
  std::vector<NodeId> origin(sol.size());
  std::iota(origin.begin(), origin.end(), 0);
  for (int pass = 0; pass < 2; ++pass)
    for (int j = ell; j >= 1; --j) {
      GroupPartition gp = partition_groups(cur, ell);
      GroupSampleResult gs = sample_down_group(cur, gp, j, profile, rng);
      out.resamples += gs.resamples;
      out.no_increase_failures += gs.no_increase_failures;
      out.k_product_mismatches += gs.k_product_mismatches;
      std::vector<NodeId> next(gs.result.origin.size());
      for (std::size_t i = 0; i < next.size(); ++i) next[i] = origin[gs.result.origin[i]];
      origin.swap(next);
      cur = std::move(gs.result.forest);
    }

  const double c = profile.c_const, L = profile.L_local, K = profile.K_global;
  const double e1 = 1.0 + 1.0 / std::exp(1.0);
  out.A = 3.0 * c * ipow(ell, 4) * L + e1 * e1 * K / ipow(2.0, ell);
  out.group_bound = 16.0 * out.A * ell * ell;
  out.global_bound = out.group_bound * ell;

  int deg = -1;
  for (NodeId i = 0; i < static_cast<NodeId>(cur.size()); ++i) {
    int ch = static_cast<int>(cur.children(i).size());
    if (ch > 0) deg = deg < 0 ? ch : std::min(deg, ch);
  }
  out.degree_before_prune = std::max(deg, 0);
  (void)k;
  HotPruneResult hp = prune_hot_paths(cur, ell, out.group_bound, std::max(1, out.degree_before_prune));
  out.r_size = hp.r_size;
  SweepResult& sw = hp.sweep;
  out.origin.resize(sw.result.origin.size());
  for (std::size_t i = 0; i < out.origin.size(); ++i) out.origin[i] = origin[sw.result.origin[i]];
  out.result = std::move(sw.result.forest);
  return out;
}

}  // namespace arbor
