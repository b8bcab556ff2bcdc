#include "arbor/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "arbor/congestion.hpp"
#include "arbor/generators.hpp"
#include "arbor/io.hpp"
#include "arbor/lll_rounder.hpp"
#include "arbor/local_search.hpp"
#include "arbor/oracle.hpp"
#include "arbor/path_lp.hpp"
#include "arbor/pruning.hpp"
#include "arbor/reductions.hpp"
#include "arbor/verify.hpp"

namespace arbor {

using json = nlohmann::json;

ParamProfile resolve_profile(const std::string& name, const json& overrides, int n, int k, int h) {
  ParamProfile base;
  if (name == "desk-small")
    base = desk_small(k, h);
  else if (name == "paper-default")
    base = paper_default(n, k);
  else
    throw validation_error("profile", "unknown profile " + name);
  ParamProfile p = overrides.is_object() && !overrides.empty() ? profile_from_json(overrides, base) : base;
  auto bad = validate_profile(p);
  if (!bad.empty()) throw validation_error("profile", bad.front());
  return p;
}

namespace {

struct ChainOut {
  SolutionForest sol;  // on the instance handed to run_chain
  json stages = json::object();
  std::vector<json> trace;
  int k = 0;
};

// single-source layered instance -> local-to-global output on its vertices
ChainOut chain_layered(const LayeredInstance& li, int k_req, const PipelineOptions& o, std::uint64_t seed) {
  ChainOut out;
  MaxKResult mk = max_feasible_k(li);
  if (mk.k_star < 1) throw validation_error("lp", "path LP infeasible for every k >= 1");
  const int k = k_req > 0 ? k_req : mk.k_star;
  out.k = k;
  ParamProfile prof = resolve_profile(o.profile_name, o.profile_overrides, li.base.vertex_count(), k, li.depth());
  RoundResult rr = round_from_lp(mk, k, prof, seed, o.exec);
  out.stages["lp"] = {{"k_star", mk.k_star}, {"paths", mk.index.size()}};
  out.stages["sparsify"] = {{"attempts", rr.sparsify_attempts}, {"size", rr.multiset_size}};
  out.stages["round"] = {{"k", rr.k},
                         {"resamples", rr.total_resamples},
                         {"marked_removed", rr.marked_removed},
                         {"r_size", rr.r_size},
                         {"iterlowcong_violations", rr.iterlowcong_violations},
                         {"nodes", rr.result.size()}};
  for (json t : rr.trace) {
    t["stage"] = "round";
    out.trace.push_back(std::move(t));
  }
  Rng rng = make_rng(seed, 2000);
  LocalToGlobalResult lg = local_to_global(rr.result, k, prof, rng);
  out.stages["local_to_global"] = {{"A", lg.A},
                                   {"global_bound", lg.global_bound},
                                   {"resamples", lg.resamples},
                                   {"no_increase_failures", lg.no_increase_failures},
                                   {"r_size", lg.r_size},
                                   {"nodes", lg.result.size()}};
  out.stages["profile"] = profile_to_json(prof);
  out.sol = std::move(lg.result);
  return out;
}

LayeredInstance restrict_to(const Instance& inst, const std::vector<std::vector<VertexId>>& layers,
                            const std::vector<char>& blocked, VertexId s) {
  auto ok = [&](VertexId v) { return v == s || !(v < static_cast<VertexId>(blocked.size()) && blocked[v]); };
  std::vector<Edge> e;
  for (auto [u, v] : inst.edges())
    if (ok(u) && ok(v) && !inst.is_source(v) && !(inst.is_source(u) && u != s)) e.emplace_back(u, v);
  std::vector<VertexId> sinks;
  for (VertexId t : inst.sinks())
    if (ok(t)) sinks.push_back(t);
  Instance base(inst.vertex_count(), std::move(e), {s}, sinks);
  if (layers.empty()) return make_layered(std::move(base), {});
  std::vector<std::vector<VertexId>> ls{{s}};
  for (std::size_t i = 1; i < layers.size(); ++i) {
    ls.emplace_back();
    for (VertexId v : layers[i])
      if (ok(v)) ls.back().push_back(v);
  }
  return make_layered(std::move(base), std::move(ls));
}

// any single-source instance -> congestion-free solution on its vertices
ChainOut chain_single(const LayeredInstance& li, int k_req, const PipelineOptions& o, std::uint64_t seed) {
  ChainOut out;
  SolutionForest sol;
  if (li.layers.empty()) {
    LayeringResult lr = to_layered(li.base);
    out = chain_layered(lr.layered, k_req, o, seed);
    out.stages["layer_reduce"] = {{"layers", lr.layered.depth() + 1}, {"vertices", lr.layered.base.vertex_count()}};
    sol = from_layered(out.sol, lr.copy_map);
  } else {
    out = chain_layered(li, k_req, o, seed);
    out.stages["layer_reduce"] = {{"layers", li.depth() + 1}, {"skipped", true}};
    sol = std::move(out.sol);
  }
  const int n = li.base.vertex_count();
  const int K = std::max(1, global_congestion(sol, n).max_global);
  const int d = std::max(0, min_open_degree(li.base, sol));
  out.sol = remove_congestion(li.base, sol, d, K);
  out.stages["remove_congestion"] = {{"input_degree", d}, {"input_congestion", K}, {"degree", d / K}};
  return out;
}

}  // namespace

PipelineResult run_pipeline(const LayeredInstance& input, const PipelineOptions& opts) {
  auto problems = validate_instance(input.base);
  if (!input.layers.empty()) {
    auto lp = validate_layered(input);
    problems.insert(problems.end(), lp.begin(), lp.end());
  }
  if (!problems.empty()) throw validation_error("pipeline", problems.front());
  const auto& sources = input.base.sources();
  if (sources.empty()) throw validation_error("pipeline", "no sources");

  PipelineResult res;
  json& rep = res.report;
  rep["instance"] = {{"vertices", input.base.vertex_count()},
                     {"edges", input.base.edges().size()},
                     {"sources", sources.size()},
                     {"layered", !input.layers.empty()}};
  rep["seed"] = opts.seed;

  if (sources.size() == 1) {
    ChainOut c = chain_single(input, opts.k, opts, opts.seed);
    rep["k"] = c.k;
    rep["stages"] = c.stages;
    res.trace = std::move(c.trace);
    res.solution = std::move(c.sol);
  } else {
    // k for the degree ladder: the weakest source's LP optimum unless given
    int k = opts.k;
    if (k <= 0) {
      if (input.layers.empty()) throw validation_error("pipeline", "multi-source input without layers needs --k");
      k = 1 << 30;
      for (VertexId s : sources) k = std::min(k, max_feasible_k(single_source_view(input, s)).k_star);
      if (k < 1) throw validation_error("pipeline", "some source has LP optimum 0");
    }
    const double alpha = opts.alpha > 0 ? opts.alpha : k;
    int calls = 0;
    json per_call = json::array();
    SingleSourceOracle oracle = [&](const Instance& inst, const std::vector<char>& blocked, VertexId s,
                                    int min_degree) -> std::optional<SolutionForest> {
      LayeredInstance sub = restrict_to(inst, input.layers, blocked, s);
      const std::uint64_t seed = opts.seed + 7919ULL * static_cast<std::uint64_t>(++calls);
      try {
        ChainOut c = chain_single(sub, 0, opts, seed);
        const int deg = min_open_degree(sub.base, c.sol);
        per_call.push_back({{"source", s}, {"degree", deg}});
        if (deg >= 0 && deg < min_degree) return std::nullopt;
        return c.sol;
      } catch (const ArborError& e) {
        per_call.push_back({{"source", s}, {"error", e.what()}});
        return std::nullopt;
      }
    };
    SearchState st;
    ParamProfile prof = resolve_profile(opts.profile_name, opts.profile_overrides, input.base.vertex_count(), k,
                                        std::max(1, input.depth()));
    res.solution = solve_multi_source(input, k, oracle, alpha, prof, 100000, &st);
    rep["k"] = k;
    rep["stages"]["local_search"] = {{"alpha", alpha},
                                    {"steps", st.steps},
                                    {"collapses", st.collapses},
                                    {"oracle_calls", st.oracle_calls},
                                    {"oracle_failures", st.oracle_failures},
                                    {"calls", per_call}};
    for (const auto& r : st.trace) res.trace.push_back({{"stage", "local_search"}, {"step", r.step}, {"rings", r.ring_sizes}, {"action", r.action}});
  }

  res.degree = std::max(0, min_open_degree(input.base, res.solution));
  res.congestion = global_congestion(res.solution, input.base.vertex_count()).max_global;
  Verdict v = is_valid_solution(input.base, res.solution, res.degree, 1);
  if (!v.ok) throw stage_error("verify", v.reasons.front());
  rep["degree"] = res.degree;
  rep["congestion"] = res.congestion;
  rep["verified"] = true;
  rep["warnings"] = v.warnings;
  return res;
}

std::vector<GapRow> gap_sweep(const std::vector<int>& hs, int B, int q, int trials, std::uint64_t seed, Exec exec) {
  if (B < q || q < 1 || trials < 1) throw validation_error("gapsweep", "need B >= q >= 1 and trials >= 1");
  const int k = B / q;
  std::vector<GapRow> rows;
  for (int h : hs) {
    if (h < 1) throw validation_error("gapsweep", "h must be positive");
    int m = 1;
    for (int i = 0; i < h; ++i) m *= q;
    std::vector<double> nv(trials), hv(trials);
    std::vector<char> conc(trials);
    std::vector<double> sink_rate(trials);
    const double mu = static_cast<double>(B) / q;
    const double band = 3.0 / std::sqrt(mu);
    auto trial = [&](int t) {
      const std::uint64_t s = seed * 1000003ULL + static_cast<std::uint64_t>(h) * 7919ULL + static_cast<std::uint64_t>(t);
      Generated g = gen_hard_instance(h, B, q, m, s);
      Rng r1 = make_rng(s, 1), r2 = make_rng(s, 2);
      nv[t] = sink_congestion_stats(g.inst.base, naive_uniform_rounding(g.inst.base, 0, k, r1)).mean;
      hv[t] = sink_congestion_stats(g.inst.base, halved_uniform_rounding(g.inst.base, 0, k, r2)).mean;
      // leaves are numbered breadth first, so leaf i sits under layer-j vertex i / B^(h-1-j)
      const VertexId leaf0 = g.inst.layers[h - 1].front(), sink0 = g.inst.layers[h].front();
      std::vector<std::vector<std::int64_t>> leaves(m);
      for (auto [u, v] : g.inst.base.edges())
        if (g.inst.base.is_sink(v)) leaves[v - sink0].push_back(u - leaf0);
      int good = 0;
      for (auto& ls : leaves) {
        std::sort(ls.begin(), ls.end());
        bool ok = true;
        std::int64_t span = 1;
        for (int j = h - 1; j >= 0 && ok; --j, span *= B) {
          const double cap = (1.0 + band) * std::pow(mu, h - 1 - j);
          for (std::size_t a = 0, b = 0; a < ls.size() && ok; a = b) {
            while (b < ls.size() && ls[b] / span == ls[a] / span) ++b;
            ok = static_cast<double>(b - a) <= cap;
          }
        }
        good += ok;
      }
      conc[t] = good == m;
      sink_rate[t] = static_cast<double>(good) / m;
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
      for (int t = 0; t < trials; ++t) trial(t);
    } else {
      for (int t = 0; t < trials; ++t) trial(t);
    }
    GapRow row;
    row.h = h;
    row.pairs = trials;
    for (int t = 0; t < trials; ++t) {
      row.naive_mean += nv[t] / trials;
      row.halved_mean += hv[t] / trials;
      row.naive_wins += nv[t] > hv[t];
      row.concentration_ok += conc[t];
      row.sink_claim_rate += sink_rate[t] / trials;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string gap_rows_csv(const std::vector<GapRow>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "h,naive_mean,halved_mean,pairs,naive_wins,concentration_ok,sink_claim_rate\n";
  for (const auto& r : rows)
    os << r.h << ',' << r.naive_mean << ',' << r.halved_mean << ',' << r.pairs << ',' << r.naive_wins << ','
       << r.concentration_ok << ',' << r.sink_claim_rate << '\n';
  return os.str();
}

}  // namespace arbor
