#include <doctest.h>

#include "arbor/congestion.hpp"
#include "arbor/io.hpp"
#include "arbor/profile.hpp"
#include "arbor/verify.hpp"
#include "fixtures.hpp"

using namespace arbor;

namespace {

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

// random multiset forest over a random layered instance
SolutionForest random_forest(const LayeredInstance& li, std::uint64_t seed, int fanout) {
  Rng rng = make_rng(seed, 5);
  SolutionForest sol;
  for (VertexId s : li.base.sources()) sol.add_root(s);
  for (NodeId i = 0; i < static_cast<NodeId>(sol.size()); ++i) {
    auto out = li.base.out(sol.end_vertex(i));
    if (out.empty()) continue;
    int c = static_cast<int>(rng() % (fanout + 1));
    for (int j = 0; j < c; ++j) sol.add_child(i, out[rng() % out.size()]);
  }
  return sol;
}

// |I_{D(p,<=l')}(v)| by walking every node's ancestor chain
std::vector<int> local_bruteforce(const SolutionForest& sol, int n, int ell) {
  std::vector<int> best(ell + 1, 0);
  const NodeId N = static_cast<NodeId>(sol.size());
  for (int lp = 0; lp <= ell; ++lp) {
    for (NodeId p = -1; p < N; ++p) {
      std::vector<int> cnt(n, 0);
      for (NodeId q = 0; q < N; ++q) {
        bool in = false;
        if (p < 0) {
          in = sol.length(q) <= lp;
        } else {
          int dist = 0;
          for (NodeId a = q; a != kNone; a = sol.parent(a), ++dist)
            if (a == p) {
              in = dist <= lp;
              break;
            }
        }
        if (in) best[lp] = std::max(best[lp], ++cnt[sol.end_vertex(q)]);
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("validate_instance reports each rule") {
  Instance both(1, {}, {0}, {0});
  auto v = validate_instance(both);
  REQUIRE(v.size() == 1);
  CHECK(starts_with(v[0], "sources/sinks overlap"));

  CHECK(validate_instance(fx::star(3).base).empty());

  Instance bad(3, {{0, 1}, {1, 2}}, {0}, {1});
  v = validate_instance(bad);
  REQUIRE(v.size() == 1);
  CHECK(starts_with(v[0], "sink has outgoing edge"));

  Instance range(2, {{0, 5}}, {0}, {1});
  CHECK(starts_with(validate_instance(range)[0], "invalid edge endpoint"));
}

TEST_CASE("validate_layered checks layer structure") {
  CHECK(validate_layered(fx::star(3)).empty());
  auto li = fx::star(2);
  li.layers = {{0, 1}, {2}};
  li = make_layered(li.base, li.layers);
  CHECK_FALSE(validate_layered(li).empty());
}

TEST_CASE("global congestion") {
  auto li = fx::star(3);
  SolutionForest sol;
  NodeId r = sol.add_root(0);
  for (int i = 1; i <= 3; ++i) sol.add_child(r, i);
  CHECK(global_congestion(sol, 4).max_global == 1);

  SolutionForest twice;
  twice.add_root(0);
  twice.add_root(0);
  CHECK(global_congestion(twice, 4).per_vertex[0] == 2);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto g = gen_random_layered(3, {2, 4, 4, 3}, 0.6, seed);
    auto f = random_forest(g.inst, seed, 3);
    auto rep = global_congestion(f, g.inst.base.vertex_count());
    std::vector<int> naive(g.inst.base.vertex_count(), 0);
    for (NodeId i = 0; i < static_cast<NodeId>(f.size()); ++i) naive[f.path(i).back()]++;
    CHECK(rep.per_vertex == naive);
    CHECK(rep.max_global == *std::max_element(naive.begin(), naive.end()));
    CHECK(std::accumulate(naive.begin(), naive.end(), 0) == static_cast<int>(f.size()));
  }
}

TEST_CASE("local congestion") {
  auto g = gen_planted(2, 3, 1, 0.0, 1);
  auto sol = fx::planted_solution(g.inst, 2);
  auto rep = local_congestion(sol, g.inst.base.vertex_count(), 3);
  CHECK(rep.local_max == std::vector<int>{1, 1, 1, 1});

  // v at depths 1 and 3 of one tree with ell = 1: s -> v -> a -> v
  Instance inst(3, {{0, 1}, {1, 2}, {2, 1}}, {0}, {});
  SolutionForest chain;
  NodeId x = chain.add_root(0);
  x = chain.add_child(x, 1);
  x = chain.add_child(x, 2);
  chain.add_child(x, 1);
  CHECK(local_congestion(chain, 3, 1).local_max[1] == 1);
  CHECK(local_congestion(chain, 3, 2).local_max[2] == 2);

  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    auto rg = gen_random_layered(3, {2, 3, 3, 2}, 0.7, seed);
    auto f = random_forest(rg.inst, seed, 3);
    int n = rg.inst.base.vertex_count();
    for (int ell = 1; ell <= 3; ++ell) {
      auto s = local_congestion(f, n, ell, Exec::serial);
      auto p = local_congestion(f, n, ell, Exec::parallel);
      CHECK(s.local_max == local_bruteforce(f, n, ell));
      CHECK(s.local_max == p.local_max);
    }
    // the empty-root row at ell = h is the global maximum
    auto full = local_congestion(f, n, 3);
    CHECK(full.local_max[3] == full.max_global);
  }
}

TEST_CASE("deleting nodes never increases congestion") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto rg = gen_random_layered(3, {1, 3, 3, 2}, 0.8, seed);
    auto f = random_forest(rg.inst, seed, 3);
    int n = rg.inst.base.vertex_count();
    Rng rng = make_rng(seed);
    std::vector<char> keep(f.size());
    for (auto& k : keep) k = rng() % 4 != 0;
    keep[0] = 1;
    auto sub = f.retain(keep);
    auto a = local_congestion(f, n, 2), b = local_congestion(sub.forest, n, 2);
    for (int v = 0; v < n; ++v) CHECK(b.per_vertex[v] <= a.per_vertex[v]);
    for (int d = 0; d <= 2; ++d) CHECK(b.local_max[d] <= a.local_max[d]);
    for (std::size_t i = 0; i < sub.origin.size(); ++i) CHECK(sub.forest.path(i) == f.path(sub.origin[i]));
  }
}

TEST_CASE("is_valid_solution") {
  auto g = gen_planted(3, 2, 2, 0.0, 4);
  auto sol = fx::planted_solution(g.inst, 3);
  CHECK(is_valid_solution(g.inst.base, sol, 3, 1).ok);
  CHECK(is_valid_solution(g.inst.base, sol, 3, 1, DegreeMode::exact).ok);
  CHECK_FALSE(is_valid_solution(g.inst.base, sol, 2, 1, DegreeMode::exact).ok);
  CHECK(is_valid_solution(g.inst.base, sol, 2, 1).ok);

  std::vector<char> keep(sol.size(), 1);
  keep[sol.children(sol.roots()[0]).back()] = 0;
  auto cut = sol.retain(keep).forest;
  auto v = is_valid_solution(g.inst.base, cut, 3, 1);
  CHECK_FALSE(v.ok);
  bool found = false;
  for (auto& r : v.reasons) found |= r.find("open path with 2 children") != std::string::npos;
  CHECK(found);

  // acceptance at allow_congestion = K matches the congestion maximum
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto b = fx::congested_solution(2, 2, 2, seed);
    int cong = global_congestion(b.sol, b.inst.base.vertex_count()).max_global;
    for (int K = 1; K <= 3; ++K) CHECK(is_valid_solution(b.inst.base, b.sol, 2, K).ok == (cong <= K));
  }

  // repeated vertices are warnings only
  Instance cyc(3, {{0, 1}, {1, 2}, {2, 1}}, {0}, {});
  SolutionForest loop;
  NodeId x = loop.add_root(0);
  x = loop.add_child(x, 1);
  x = loop.add_child(x, 2);
  loop.add_child(x, 1);
  auto lv = is_valid_solution(cyc, loop, 0, 2);
  CHECK(lv.ok);
  CHECK(lv.warnings.size() == 1);

  // missing edge and missing source root
  SolutionForest wrong;
  wrong.add_child(wrong.add_child(wrong.add_root(0), 1), 2);
  auto wv = is_valid_solution(fx::star(3).base, wrong, 1, 1);
  CHECK_FALSE(wv.ok);
  CHECK_FALSE(is_valid_solution(fx::star(3).base, SolutionForest{}, 1, 1).ok);
}

TEST_CASE("json round trips") {
  auto g = gen_random_layered(2, {1, 3, 2}, 0.7, 9);
  auto j = layered_to_json(g.inst);
  auto back = instance_from_json(json::parse(j.dump()));
  CHECK(layered_to_json(back) == j);
  CHECK(back.layer_of == g.inst.layer_of);

  auto sol = fx::planted_solution(gen_planted(2, 2, 1, 0, 1).inst, 2);
  auto sj = solution_to_json(sol);
  auto sol2 = solution_from_json(json::parse(sj.dump()));
  CHECK(solution_to_json(sol2) == sj);

  json broken = {{"nodes", {{{"path", {0, 1}}, {"parent", nullptr}}}}};
  CHECK_THROWS_AS(solution_from_json(broken), ArborError);
  CHECK_THROWS_AS(instance_from_json(json{{"n", 2}}), ArborError);
}

TEST_CASE("profiles validate") {
  CHECK(validate_profile(desk_small(16, 2)).empty());
  CHECK(validate_profile(paper_default(256, 1024)).empty());
  auto p = desk_small(16, 2);
  p.retain_children = p.sample_children + 1;
  CHECK_FALSE(validate_profile(p).empty());
  p = desk_small(64, 2);  // sample 16, one fresh mark per step allowed
  CHECK_FALSE(validate_profile(p).empty());
  p.retain_children = p.sample_children - 3;
  CHECK(validate_profile(p).empty());
  p.ell = 1;
  CHECK_FALSE(validate_profile(p).empty());
  auto pd = paper_default(256, 64);
  CHECK(pd.ell == 30);
  CHECK(pd.L_local == 1024 * 900);
  CHECK(pd.K_global == 2048 * 512);
  CHECK(pd.granularity_base == 256);
  CHECK(pd.b1_slack == 8192);
  auto round = profile_from_json(profile_to_json(pd), ParamProfile{});
  CHECK(profile_to_json(round) == profile_to_json(pd));
}
