#include <doctest.h>

#include <set>

#include "arbor/oracle.hpp"
#include "arbor/path_lp.hpp"
#include "fixtures.hpp"

using namespace arbor;

namespace {

std::vector<double> indicator(const PathIndex& pi, const SolutionForest& sol) {
  std::vector<double> x(pi.size(), 0.0);
  for (NodeId i = 0; i < static_cast<NodeId>(sol.size()); ++i) {
    auto at = pi.find(sol.path(i));
    REQUIRE(at != kNone);
    x[at] = 1.0;
  }
  return x;
}

// s -> a_1..a_mid -> t_1..t_w, complete between layers
LayeredInstance bottleneck(int mid, int w) { return fx::complete_layered({1, mid, w}); }

}  // namespace

TEST_CASE("path enumeration counts") {
  auto pi = enumerate_paths(fx::star(3));
  CHECK(pi.size() == 4);
  CHECK(pi.depth() == 1);
  auto li = fx::complete_layered({1, 3, 3});
  auto full = enumerate_paths(li);
  CHECK(full.size() == 13);
  CHECK_THROWS_AS(enumerate_paths(li, 10), ArborError);
  try {
    enumerate_paths(li, 10);
  } catch (const ArborError& e) {
    CHECK(e.kind() == ErrorKind::budget);
    CHECK(std::string(e.what()).find("PathBudgetExceeded") != std::string::npos);
  }
  // children of each node are exactly the out-edges of its end vertex
  for (std::size_t i = 0; i < full.size(); ++i) {
    const auto& nd = full.node(static_cast<std::int32_t>(i));
    auto out = li.base.out(nd.vertex);
    REQUIRE(static_cast<std::size_t>(nd.child_count) == out.size());
    for (int c = 0; c < nd.child_count; ++c) {
      CHECK(full.node(nd.first_child + c).vertex == out[c]);
      CHECK(full.node(nd.first_child + c).parent == static_cast<std::int32_t>(i));
    }
    CHECK(full.path(static_cast<std::int32_t>(i)).front() == 0);
    CHECK(full.find(full.path(static_cast<std::int32_t>(i))) == static_cast<std::int32_t>(i));
  }
  auto two = gen_planted(2, 1, 2, 0.0, 1);
  CHECK_THROWS_AS(enumerate_paths(two.inst), ArborError);
}

TEST_CASE("path LP row counts") {
  auto pi = enumerate_paths(fx::star(3));
  auto lp = build_path_lp(pi, 2);
  CHECK(lp.count(RowKind::demand) == 1);
  CHECK(lp.count(RowKind::capacity) == 3);
  CHECK(lp.count(RowKind::root) == 1);
  CHECK_THROWS_AS(build_path_lp(pi, 0), ArborError);
  auto text = dump_lp(lp);
  CHECK(text.find("E ") == 0);
  CHECK(text.find("L ") != std::string::npos);

  // hard-instance miniature against an independent count
  auto g = gen_hard_instance(2, 3, 2, 6, 4);
  auto hp = enumerate_paths(g.inst);
  int open = 0;
  std::set<std::pair<std::int32_t, VertexId>> pairs;
  for (std::size_t i = 0; i < hp.size(); ++i) {
    auto path = hp.path(static_cast<std::int32_t>(i));
    if (!hp.node(static_cast<std::int32_t>(i)).closed) ++open;
    // every proper ancestor p of this node pairs with its end vertex
    for (std::size_t len = 1; len < path.size(); ++len) {
      std::vector<VertexId> pre(path.begin(), path.begin() + len);
      pairs.insert({hp.find(pre), path.back()});
    }
  }
  auto hlp = build_path_lp(hp, 2);
  CHECK(static_cast<std::size_t>(hlp.rows.size()) == open + pairs.size() + 1);
}

TEST_CASE("path LP feasibility on a star") {
  auto pi = enumerate_paths(fx::star(3));
  auto ok = solve_lp_feasibility(build_path_lp(pi, 3));
  REQUIRE(ok.feasible);
  for (std::int32_t i = 1; i < 4; ++i) CHECK(ok.x[i] == doctest::Approx(1.0));
  CHECK(ok.x[0] == doctest::Approx(1.0));
  auto bad = solve_lp_feasibility(build_path_lp(pi, 4));
  CHECK_FALSE(bad.feasible);
  CHECK_FALSE(bad.certificate.empty());
  for (int m : {1, 2, 5}) CHECK(max_feasible_k(fx::star(m)).k_star == m);
}

TEST_CASE("planted value is feasible") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto g = gen_planted(2, 2, 1, 0.0, seed);
    auto pi = enumerate_paths(g.inst);
    CHECK(solve_lp_feasibility(build_path_lp(pi, 2)).feasible);
    auto opt = brute_force_opt(g.inst.base, g.inst.depth());
    bool up = solve_lp_feasibility(build_path_lp(pi, 3)).feasible;
    // with no noise there is no room for a third child anywhere
    CHECK(opt.k_opt == 2);
    CHECK_FALSE(up);
  }
}

TEST_CASE("bottleneck width") {
  for (auto [mid, w] : std::vector<std::pair<int, int>>{{4, 1}, {4, 2}, {4, 4}, {4, 5}, {2, 9}}) {
    auto li = bottleneck(mid, w);
    auto opt = brute_force_opt(li.base, li.depth());
    CHECK(max_feasible_k(li).k_star == opt.k_opt);
  }
}

TEST_CASE("relaxation soundness and monotonicity on tiny instances") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    std::vector<int> widths = seed % 2 ? std::vector<int>{1, 3, 3, 3} : std::vector<int>{1, 4, 4};
    auto g = gen_random_layered(static_cast<int>(widths.size()) - 1, widths, 0.6, seed);
    auto opt = brute_force_opt(g.inst.base, g.inst.depth());
    auto mk = max_feasible_k(g.inst);
    CHECK(mk.k_star >= opt.k_opt);
    if (opt.k_opt >= 1) {
      auto lp = build_path_lp(mk.index, opt.k_opt);
      CHECK(max_residual(lp, indicator(mk.index, opt.witness)) == 0.0);
    }
    for (int k = 1; k <= mk.k_star; ++k) CHECK(solve_lp_feasibility(build_path_lp(mk.index, k)).feasible);
    CHECK_FALSE(solve_lp_feasibility(build_path_lp(mk.index, mk.k_star + 1)).feasible);
    if (mk.k_star >= 1) {
      // demand rows hold with equality on the witness
      auto lp = build_path_lp(mk.index, mk.k_star);
      CHECK(max_residual(lp, mk.witness.x) <= 1e-6);
      for (const auto& row : lp.rows) {
        if (row.kind != RowKind::demand) continue;
        double lhs = 0;
        for (auto [c, a] : row.coeffs) lhs += a * mk.witness.x[c];
        CHECK(lhs == doctest::Approx(row.rhs).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("pivot kernel serial and parallel agree") {
  Rng rng = make_rng(5, 0);
  std::uniform_real_distribution<double> u(-1, 1);
  const int rows = 37, width = 53;
  std::vector<double> tab(static_cast<std::size_t>(rows) * width);
  for (auto& v : tab) v = u(rng);
  tab[5 * width + 7] = 0.75;
  auto a = tab, b = tab;
  pivot_rows(a, rows, width, 5, 7, Exec::serial);
  pivot_rows(b, rows, width, 5, 7, Exec::parallel);
  CHECK(a == b);
  CHECK(a[5 * width + 7] == doctest::Approx(1.0));
  for (int r = 0; r < rows; ++r)
    if (r != 5) CHECK(std::abs(a[r * width + 7]) < 1e-12);

  auto pi = enumerate_paths(fx::complete_layered({1, 3, 3}));
  auto lp = build_path_lp(pi, 2);
  auto s = solve_lp_feasibility(lp, 1e-9, Exec::serial);
  auto p = solve_lp_feasibility(lp, 1e-9, Exec::parallel);
  CHECK(s.feasible == p.feasible);
  CHECK(s.x == p.x);
}

TEST_CASE("planted instance that once stalled phase one") {
  // noise makes phase one long; a weak pivot rule used to end with a positive artificial
  auto li = gen_planted(8, 2, 1, 0.1, 93).inst;
  auto mk = max_feasible_k(li);
  CHECK(mk.k_star == 8);
  auto lo = solve_lp_feasibility(build_path_lp(mk.index, 8));
  CHECK(lo.feasible);
  CHECK(lo.pivots < 5000);
}
