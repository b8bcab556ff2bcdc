#include <benchmark/benchmark.h>

#include "arbor/congestion.hpp"
#include "arbor/generators.hpp"
#include "arbor/path_lp.hpp"
#include "arbor/pipeline.hpp"
#include "arbor/sparsifier.hpp"

using namespace arbor;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

// complete k-ary tree over fresh vertices plus a second copy reusing them
SolutionForest dense_forest(int k, int depth) {
  SolutionForest f;
  for (int copy = 0; copy < 2; ++copy) {
    VertexId next = 1;
    std::vector<NodeId> level{f.add_root(0)};
    for (int d = 0; d < depth; ++d) {
      std::vector<NodeId> nl;
      for (NodeId p : level)
        for (int c = 0; c < k; ++c) nl.push_back(f.add_child(p, next++));
      level = nl;
    }
  }
  return f;
}

void BM_local_congestion(benchmark::State& st) {
  auto f = dense_forest(6, 4);
  for (auto _ : st) benchmark::DoNotOptimize(local_congestion(f, 2000, 2, exec_of(st)));
}
BENCHMARK(BM_local_congestion)->Arg(0)->Arg(1);

void BM_pivot_rows(benchmark::State& st) {
  const int rows = 400, width = 800;
  std::vector<double> tab(static_cast<std::size_t>(rows + 1) * width);
  for (std::size_t i = 0; i < tab.size(); ++i) tab[i] = 1.0 + static_cast<double>(i % 17) / 7.0;
  std::vector<double> work;
  for (auto _ : st) {
    st.PauseTiming();
    work = tab;  // a pivot zeroes its column, so every run starts fresh
    st.ResumeTiming();
    pivot_rows(work, rows, width, 3, 5, exec_of(st));
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_pivot_rows)->Arg(0)->Arg(1);

void BM_cong_tables(benchmark::State& st) {
  auto li = gen_planted(8, 2, 1, 0.1, 3).inst;
  auto mk = max_feasible_k(li);
  auto ms = sparsify(mk.index, mk.witness, 8, 4, 1, 20).ms;
  for (auto _ : st) benchmark::DoNotOptimize(cong_tables(ms, exec_of(st)));
}
BENCHMARK(BM_cong_tables)->Arg(0)->Arg(1);

void BM_gap_trials(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(gap_sweep({2}, 32, 4, 8, 1, exec_of(st)));
}
BENCHMARK(BM_gap_trials)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
