#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "arbor/congestion.hpp"
#include "arbor/generators.hpp"
#include "arbor/io.hpp"
#include "arbor/lll_rounder.hpp"
#include "arbor/local_search.hpp"
#include "arbor/oracle.hpp"
#include "arbor/path_lp.hpp"
#include "arbor/pipeline.hpp"
#include "arbor/pruning.hpp"
#include "arbor/reductions.hpp"
#include "arbor/sparsifier.hpp"
#include "arbor/verify.hpp"

using namespace arbor;
using json = nlohmann::json;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<int> k;
  std::optional<std::string> profile;
  std::string config;
  std::string out;
  int jobs = 0;
  std::string format = "json";
  json config_doc = json::object();

  void load_config() {
    if (!config.empty()) config_doc = read_json_file(config);
  }
  std::uint64_t need_seed() const {
    if (seed) return *seed;
    if (config_doc.contains("seed")) return config_doc["seed"].get<std::uint64_t>();
    throw validation_error("cli", "this command is randomized and needs --seed");
  }
  int k_or(int fallback) const {
    if (k) return *k;
    if (config_doc.contains("k")) return config_doc["k"].get<int>();
    return fallback;
  }
  std::string profile_name() const {
    if (profile) return *profile;
    if (config_doc.contains("profile_name")) return config_doc["profile_name"].get<std::string>();
    return "desk-small";
  }
  json overrides() const { return config_doc.value("profile", json::object()); }
};

void add_common(CLI::App* app, Common& c, bool with_seed) {
  if (with_seed) app->add_option("--seed", c.seed, "RNG seed");
  app->add_option("--k", c.k, "target degree");
  app->add_option("--profile", c.profile, "desk-small or paper-default");
  app->add_option("--config", c.config, "JSON config (profile overrides, seed, k)");
  app->add_option("--out", c.out, "output path");
  app->add_option("--jobs", c.jobs, "worker threads");
  app->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty())
    std::cout << text << (text.empty() || text.back() == '\n' ? "" : "\n");
  else
    write_text_file(c.out, text.back() == '\n' ? text : text + "\n");
}

void emit(const Common& c, const json& j) { emit(c, j.dump(2)); }

LayeredInstance load_instance(const std::string& path) {
  LayeredInstance li = instance_from_json(read_json_file(path));
  auto bad = validate_instance(li.base);
  if (!li.layers.empty()) {
    auto lb = validate_layered(li);
    bad.insert(bad.end(), lb.begin(), lb.end());
  }
  if (!bad.empty()) throw validation_error("input", bad.front());
  return li;
}

// accepts a bare solution or an object wrapping one
SolutionForest load_solution(const std::string& path) {
  json j = read_json_file(path);
  for (const char* key : {"solution", "witness", "result"})
    if (j.contains(key) && j[key].is_object()) return solution_from_json(j[key]);
  return solution_from_json(j);
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  auto dots = s.find("..");
  if (dots != std::string::npos) {
    int a = std::stoi(s.substr(0, dots)), b = std::stoi(s.substr(dots + 2));
    for (int i = a; i <= b; ++i) out.push_back(i);
    return out;
  }
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stoi(tok));
  return out;
}

std::vector<std::vector<int>> parse_sets(const std::string& s) {
  std::vector<std::vector<int>> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ';')) out.push_back(parse_int_list(part));
  return out;
}

json error_json(const std::string& kind, const std::string& stage, const std::string& msg) {
  return {{"error", {{"kind", kind}, {"stage", stage}, {"message", msg}}}};
}

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::budget: return "budget";
    default: return "stage";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"arbor: degree-bounded arborescence toolkit"};
  app.set_help_flag("--help", "print help");  // -h is taken by the depth option
  app.require_subcommand(1);
  Common c;
  std::function<void()> run;

  // gen
  auto* gen = app.add_subcommand("gen", "generate an instance");
  gen->require_subcommand(1);
  int h = 2, sources = 1, B = 64, q = 8, m = 0;
  double p = 0.5, noise = 0.0;
  std::string widths = "1,3,3", sets;

  auto* g_random = gen->add_subcommand("random", "random layered DAG");
  add_common(g_random, c, true);
  g_random->add_option("--h", h);
  g_random->add_option("--widths", widths, "comma list of h+1 layer widths");
  g_random->add_option("--p", p, "edge probability");
  g_random->callback([&] {
    run = [&] {
      auto g = gen_random_layered(h, parse_int_list(widths), p, c.need_seed());
      json j = layered_to_json(g.inst);
      j["provenance"] = g.provenance;
      emit(c, j);
    };
  });

  auto* g_planted = gen->add_subcommand("planted", "planted disjoint k-ary trees plus noise");
  add_common(g_planted, c, true);
  g_planted->add_option("--h", h);
  g_planted->add_option("--sources", sources);
  g_planted->add_option("--noise", noise);
  g_planted->callback([&] {
    run = [&] {
      auto g = gen_planted(c.k_or(4), h, sources, noise, c.need_seed());
      json j = layered_to_json(g.inst);
      j["provenance"] = g.provenance;
      j["planted_k"] = g.planted_k;
      emit(c, j);
    };
  });

  auto* g_hard = gen->add_subcommand("hard", "integrality-gap style instance");
  add_common(g_hard, c, true);
  g_hard->add_option("--h", h);
  g_hard->add_option("--B", B);
  g_hard->add_option("--q", q);
  g_hard->add_option("--m", m, "sinks (default q^h)");
  g_hard->callback([&] {
    run = [&] {
      int mm = m;
      if (mm <= 0) {
        mm = 1;
        for (int i = 0; i < h; ++i) mm *= q;
      }
      auto g = gen_hard_instance(h, B, q, mm, c.need_seed());
      json j = layered_to_json(g.inst);
      j["provenance"] = g.provenance;
      emit(c, j);
    };
  });

  auto* g_cover = gen->add_subcommand("maxkcover", "max-k-cover reduction instance");
  add_common(g_cover, c, false);
  g_cover->add_option("--m", m, "universe size");
  g_cover->add_option("--sets", sets, "sets as '0,1;2,3' (default: k disjoint blocks)");
  g_cover->callback([&] {
    run = [&] {
      const int k = c.k_or(2);
      std::vector<std::vector<int>> ss;
      if (sets.empty()) {
        if (m <= 0 || m % k) throw validation_error("cli", "--m must be a positive multiple of --k");
        for (int i = 0; i < k; ++i) {
          ss.emplace_back();
          for (int a = i * (m / k); a < (i + 1) * (m / k); ++a) ss.back().push_back(a);
        }
      } else {
        ss = parse_sets(sets);
      }
      auto g = gen_maxkcover_instance(m, ss, k);
      json j = layered_to_json(g.inst);
      j["provenance"] = g.provenance;
      emit(c, j);
    };
  });

  std::string in, sol_path, trace_path;
  int depth_cap = 1 << 20;
  long node_cap = kDefaultNodeCap;

  auto* oracle = app.add_subcommand("oracle", "exact brute-force optimum");
  add_common(oracle, c, false);
  oracle->add_option("--in", in)->required();
  oracle->add_option("--depth-cap", depth_cap);
  oracle->add_option("--node-cap", node_cap);
  oracle->callback([&] {
    run = [&] {
      auto li = load_instance(in);
      auto r = brute_force_opt(li.base, depth_cap, node_cap);
      emit(c, json{{"k_opt", r.k_opt}, {"expanded", r.expanded}, {"witness", solution_to_json(r.witness)}});
    };
  });

  auto* lp = app.add_subcommand("lp", "path LP: optimum, or feasibility at --k");
  add_common(lp, c, false);
  lp->add_option("--in", in)->required();
  lp->callback([&] {
    run = [&] {
      auto li = load_instance(in);
      if (c.k_or(0) > 0) {
        auto pi = enumerate_paths(li);
        auto prob = build_path_lp(pi, c.k_or(0));
        auto o = solve_lp_feasibility(prob);
        emit(c, json{{"k", c.k_or(0)},
                     {"feasible", o.feasible},
                     {"paths", pi.size()},
                     {"rows", prob.rows.size()},
                     {"pivots", o.pivots},
                     {"x", o.x},
                     {"certificate", o.certificate}});
      } else {
        auto mk = max_feasible_k(li);
        emit(c, json{{"k_star", mk.k_star}, {"paths", mk.index.size()}, {"x", mk.witness.x}});
      }
    };
  });

  auto lp_at = [&](const LayeredInstance& li, int k, FractionalPathSolution& x) {
    MaxKResult mk = max_feasible_k(li);
    if (k <= 0) k = mk.k_star;
    if (k > mk.k_star || k < 1)
      throw validation_error("lp", "k=" + std::to_string(k) + " is not LP-feasible (optimum " + std::to_string(mk.k_star) + ")");
    x = mk.witness;
    if (k != mk.k_star) x.x = solve_lp_feasibility(build_path_lp(mk.index, k)).x;
    return std::make_pair(std::move(mk), k);
  };

  auto* sp = app.add_subcommand("sparsify", "draw the sparse multiset P'");
  add_common(sp, c, true);
  sp->add_option("--in", in)->required();
  sp->callback([&] {
    run = [&] {
      auto li = load_instance(in);
      FractionalPathSolution x;
      auto [mk, k] = lp_at(li, c.k_or(0), x);
      ParamProfile prof = resolve_profile(c.profile_name(), c.overrides(), li.base.vertex_count(), k, li.depth());
      auto r = sparsify(mk.index, x, k, prof.granularity_base, c.need_seed(), prof.sparsify_retries);
      json j = multiset_to_json(r.ms);
      j["attempts"] = r.attempts;
      j["profile"] = profile_to_json(prof);
      emit(c, j);
    };
  });

  auto* rd = app.add_subcommand("round", "LP, sparsify and layer-by-layer rounding");
  add_common(rd, c, true);
  rd->add_option("--in", in)->required();
  rd->add_option("--trace", trace_path, "JSONL trace output");
  rd->callback([&] {
    run = [&] {
      auto li = load_instance(in);
      MaxKResult mk = max_feasible_k(li);
      const int k = c.k_or(mk.k_star);
      ParamProfile prof = resolve_profile(c.profile_name(), c.overrides(), li.base.vertex_count(), k, li.depth());
      auto r = round_from_lp(mk, k, prof, c.need_seed());
      if (!trace_path.empty()) {
        std::string t;
        for (const auto& rec : r.trace) t += rec.dump() + "\n";
        write_text_file(trace_path, t);
      }
      emit(c, json{{"k", r.k},
                   {"k_star", r.k_star},
                   {"resamples", r.total_resamples},
                   {"marked_removed", r.marked_removed},
                   {"sparsify_attempts", r.sparsify_attempts},
                   {"profile", profile_to_json(prof)},
                   {"solution", solution_to_json(r.result)}});
    };
  });

  std::string mode = "remove-congestion";
  int bigK = 0;
  auto* pr = app.add_subcommand("prune", "bounded-depth, local-to-global or congestion removal");
  add_common(pr, c, true);
  pr->add_option("--in", in)->required();
  pr->add_option("--solution", sol_path)->required();
  pr->add_option("--mode", mode)->check(CLI::IsMember({"bounded-depth", "local-to-global", "remove-congestion"}));
  pr->add_option("--K", bigK, "congestion of the input (default: measured)");
  pr->callback([&] {
    run = [&] {
      auto li = load_instance(in);
      auto sol = load_solution(sol_path);
      const int n = li.base.vertex_count();
      const int k = c.k_or(std::max(0, min_open_degree(li.base, sol)));
      json j;
      if (mode == "bounded-depth") {
        auto r = prune_to_bounded_depth(li.base, sol, k);
        j = {{"solution", solution_to_json(r.result.forest)}, {"trace", r.trace}};
      } else if (mode == "local-to-global") {
        ParamProfile prof = resolve_profile(c.profile_name(), c.overrides(), n, k, std::max(1, li.depth()));
        Rng rng = make_rng(c.need_seed(), 2000);
        auto r = local_to_global(sol, k, prof, rng);
        j = {{"solution", solution_to_json(r.result)},
             {"A", r.A},
             {"global_bound", r.global_bound},
             {"resamples", r.resamples},
             {"profile", profile_to_json(prof)}};
      } else {
        const int K = bigK > 0 ? bigK : std::max(1, global_congestion(sol, n).max_global);
        j = {{"solution", solution_to_json(remove_congestion(li.base, sol, k, K))}, {"k", k}, {"K", K}};
      }
      emit(c, j);
    };
  });

  double alpha = 1.0;
  int step_cap = 100000;
  auto* ls = app.add_subcommand("localsearch", "multi-source local search with the exact oracle");
  add_common(ls, c, false);
  ls->add_option("--in", in)->required();
  ls->add_option("--alpha", alpha);
  ls->add_option("--step-cap", step_cap);
  ls->add_option("--trace", trace_path, "potential CSV output");
  ls->callback([&] {
    run = [&] {
      auto li = load_instance(in);
      const int k = c.k_or(0);
      if (k < 1) throw validation_error("cli", "localsearch needs --k");
      ParamProfile prof = resolve_profile(c.profile_name(), c.overrides(), li.base.vertex_count(), k, std::max(1, li.depth()));
      SearchState st;
      auto sol = solve_multi_source(li, k, exact_oracle(), alpha, prof, step_cap, &st);
      if (!trace_path.empty()) write_text_file(trace_path, "step,ring_sizes,action\n" + potential_csv(st.trace));
      if (c.format == "csv")
        emit(c, "step,ring_sizes,action\n" + potential_csv(st.trace));
      else
        emit(c, json{{"solution", solution_to_json(sol)},
                     {"degree", ls_degrees(k, alpha, prof).solution},
                     {"steps", st.steps},
                     {"collapses", st.collapses},
                     {"profile", profile_to_json(prof)}});
    };
  });

  auto* pipe = app.add_subcommand("pipeline", "full chain; --out is a directory");
  add_common(pipe, c, true);
  pipe->add_option("--in", in)->required();
  double pipe_alpha = 0;
  pipe->add_option("--alpha", pipe_alpha, "multi-source oracle ratio (default k)");
  pipe->callback([&] {
    run = [&] {
      auto li = load_instance(in);
      PipelineOptions o;
      o.k = c.k_or(0);
      o.seed = c.need_seed();
      o.profile_name = c.profile_name();
      o.profile_overrides = c.overrides();
      o.alpha = pipe_alpha;
      auto r = run_pipeline(li, o);
      if (!c.out.empty()) {
        std::filesystem::create_directories(c.out);
        write_text_file(c.out + "/solution.json", solution_to_json(r.solution).dump(2) + "\n");
        write_text_file(c.out + "/report.json", r.report.dump(2) + "\n");
        std::string t;
        for (const auto& rec : r.trace) t += rec.dump() + "\n";
        write_text_file(c.out + "/trace.jsonl", t);
      }
      std::cout << json{{"degree", r.degree}, {"congestion", r.congestion}}.dump() << "\n";
    };
  });

  int allow = 1;
  auto* vf = app.add_subcommand("verify", "check a solution; exit 2 when invalid");
  add_common(vf, c, false);
  vf->add_option("--in", in)->required();
  vf->add_option("--solution", sol_path)->required();
  vf->add_option("--congestion", allow, "allowed congestion");
  vf->callback([&] {
    run = [&] {
      auto li = load_instance(in);
      auto sol = load_solution(sol_path);
      const int k = c.k_or(std::max(0, min_open_degree(li.base, sol)));
      Verdict v = is_valid_solution(li.base, sol, k, allow);
      emit(c, json{{"ok", v.ok}, {"k", k}, {"congestion", allow}, {"reasons", v.reasons}, {"warnings", v.warnings}});
      if (!v.ok) throw validation_error("verify", v.reasons.front());
    };
  });

  int trials = 1;
  bool uniform = false;
  auto* bl = app.add_subcommand("baseline", "naive or halved randomized rounding");
  bl->require_subcommand(1);
  for (const char* which : {"naive", "halved"}) {
    auto* sub = bl->add_subcommand(which);
    add_common(sub, c, true);
    sub->add_option("--in", in)->required();
    sub->add_option("--trials", trials);
    sub->add_flag("--uniform", uniform, "uniform over out-neighbours instead of LP values");
    const bool halved = std::string(which) == "halved";
    sub->callback([&, halved] {
      run = [&, halved] {
        auto li = load_instance(in);
        const std::uint64_t seed = c.need_seed();
        std::optional<std::pair<MaxKResult, int>> lpx;
        FractionalPathSolution x;
        int k = c.k_or(0);
        if (!uniform) {
          lpx.emplace(lp_at(li, k, x));
          k = lpx->second;
        } else if (k < 1) {
          throw validation_error("cli", "--uniform needs --k");
        }
        json rows = json::array();
        double mean = 0;
        for (int t = 0; t < trials; ++t) {
          Rng rng = make_rng(seed, static_cast<std::uint64_t>(t));
          SolutionForest s;
          const VertexId src = li.base.sources().front();
          if (uniform)
            s = halved ? halved_uniform_rounding(li.base, src, k, rng) : naive_uniform_rounding(li.base, src, k, rng);
          else
            s = halved ? halved_randomized_rounding(lpx->first.index, x, k, rng)
                       : naive_randomized_rounding(lpx->first.index, x, k, rng);
          auto st = sink_congestion_stats(li.base, s);
          mean += st.mean / trials;
          rows.push_back({{"trial", t}, {"mean", st.mean}, {"max", st.max}, {"closed", st.closed_nodes}, {"nodes", s.size()}});
        }
        if (c.format == "csv") {
          std::string csv = "trial,mean,max,closed,nodes\n";
          for (const auto& r : rows)
            csv += std::to_string(r["trial"].get<int>()) + "," + json(r["mean"]).dump() + "," + r["max"].dump() + "," +
                   r["closed"].dump() + "," + r["nodes"].dump() + "\n";
          emit(c, csv);
        } else {
          emit(c, json{{"variant", halved ? "halved" : "naive"}, {"k", k}, {"mean", mean}, {"trials", rows}});
        }
      };
    });
  }

  std::string hs = "2..4";
  auto* ex = app.add_subcommand("experiment", "Monte-Carlo experiments");
  ex->require_subcommand(1);
  auto* gap = ex->add_subcommand("gapsweep", "naive vs halved mean sink congestion per h (CSV)");
  add_common(gap, c, true);
  gap->add_option("--h", hs, "range a..b or list");
  gap->add_option("--B", B);
  gap->add_option("--q", q);
  gap->add_option("--trials", trials)->default_val(200);
  gap->callback([&] {
    run = [&] {
      auto rows = gap_sweep(parse_int_list(hs), B, q, trials, c.need_seed());
      if (c.format == "json") {
        json j = json::array();
        for (const auto& r : rows)
          j.push_back({{"h", r.h},
                       {"naive_mean", r.naive_mean},
                       {"halved_mean", r.halved_mean},
                       {"pairs", r.pairs},
                       {"naive_wins", r.naive_wins},
                       {"concentration_ok", r.concentration_ok},
                       {"sink_claim_rate", r.sink_claim_rate}});
        emit(c, j);
      } else {
        emit(c, gap_rows_csv(rows));
      }
    };
  });
  // the sweep is CSV unless asked otherwise
  gap->preparse_callback([&](std::size_t) { c.format = "csv"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_json("validation", "cli", e.what()).dump() << "\n";
    return 2;
  }

  try {
    c.load_config();
    if (c.jobs > 0) omp_set_num_threads(c.jobs);
    if (!run) throw validation_error("cli", "no command selected");
    run();
  } catch (const ArborError& e) {
    std::cerr << error_json(kind_name(e.kind()), e.stage(), e.what()).dump() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << error_json("stage", "internal", e.what()).dump() << "\n";
    return 4;
  }
  return 0;
}
