#include "arbor/generators.hpp"

#include <algorithm>
#include <cmath>

namespace arbor {

using json = nlohmann::json;

Generated gen_random_layered(int h, const std::vector<int>& widths, double edge_prob, std::uint64_t seed) {
  if (h < 1 || static_cast<int>(widths.size()) != h + 1)
    throw validation_error("gen_random_layered", "widths must have h+1 entries");
  Rng rng = make_rng(seed);
  std::bernoulli_distribution coin(edge_prob);
  std::vector<std::vector<VertexId>> layers(h + 1);
  int n = 0;
  for (int i = 0; i <= h; ++i)
    for (int w = 0; w < widths[i]; ++w) layers[i].push_back(n++);
  std::vector<Edge> edges;
  for (int i = 0; i < h; ++i)
    for (VertexId u : layers[i])
      for (VertexId v : layers[i + 1])
        if (coin(rng)) edges.emplace_back(u, v);
  Generated g;
  g.inst = make_layered(Instance(n, std::move(edges), layers[0], layers[h]), layers);
  g.provenance = {{"generator", "random"}, {"params", {{"h", h}, {"widths", widths}, {"edge_prob", edge_prob}}}, {"seed", seed}};
  return g;
}

Generated gen_planted(int k, int h, int sources, double noise_prob, std::uint64_t seed) {
  if (k < 1 || h < 1 || sources < 1) throw validation_error("gen_planted", "need k, h, sources >= 1");
  Rng rng = make_rng(seed);
  std::vector<std::vector<VertexId>> layers(h + 1);
  std::vector<Edge> edges;
  int n = 0;
  for (int s = 0; s < sources; ++s) layers[0].push_back(n++);
  // per source the previous layer of its tree
  std::vector<std::vector<VertexId>> frontier(sources);
  for (int s = 0; s < sources; ++s) frontier[s] = {layers[0][s]};
  for (int d = 1; d <= h; ++d)
    for (int s = 0; s < sources; ++s) {
      std::vector<VertexId> next;
      for (VertexId u : frontier[s])
        for (int c = 0; c < k; ++c) {
          VertexId v = n++;
          edges.emplace_back(u, v);
          next.push_back(v);
          layers[d].push_back(v);
        }
      frontier[s] = std::move(next);
    }
  if (noise_prob > 0) {
    std::bernoulli_distribution coin(noise_prob);
    std::vector<Edge> planted = edges;
    std::sort(planted.begin(), planted.end());
    for (int d = 0; d < h; ++d)
      for (VertexId u : layers[d])
        for (VertexId v : layers[d + 1])
          if (coin(rng) && !std::binary_search(planted.begin(), planted.end(), Edge{u, v})) edges.emplace_back(u, v);
  }
  Generated g;
  g.inst = make_layered(Instance(n, std::move(edges), layers[0], layers[h]), layers);
  g.planted_k = k;
  g.provenance = {{"generator", "planted"},
                  {"params", {{"k", k}, {"h", h}, {"sources", sources}, {"noise_prob", noise_prob}}},
                  {"seed", seed}};
  return g;
}

Generated gen_hard_instance(int h, int B, int q, int m, std::uint64_t seed) {
  if (h < 1 || B < 1 || q < 1 || m < 1) throw validation_error("gen_hard_instance", "parameters must be positive");
  Rng rng = make_rng(seed);
  std::vector<std::vector<VertexId>> layers(h + 1);
  std::vector<Edge> edges;
  int n = 0;
  std::vector<int> first(h, 0);
  std::int64_t width = 1;
  for (int d = 0; d < h; ++d) {
    if (static_cast<std::int64_t>(n) + width > (1 << 26)) throw budget_error("gen_hard_instance", "tree too large");
    first[d] = n;
    for (std::int64_t i = 0; i < width; ++i) layers[d].push_back(n++);
    width *= B;
  }
  for (int d = 0; d + 1 < h; ++d)
    for (std::size_t i = 0; i < layers[d].size(); ++i)
      for (int c = 0; c < B; ++c) edges.emplace_back(layers[d][i], first[d + 1] + static_cast<int>(i) * B + c);
  // sinks are numbered before any selection happens
  for (int t = 0; t < m; ++t) layers[h].push_back(n++);
  std::bernoulli_distribution coin(1.0 / q);
  for (VertexId sink : layers[h]) {
    std::vector<int> sel{0};  // indices within the layer
    for (int d = 1; d < h; ++d) {
      std::vector<int> next;
      for (int i : sel)
        for (int c = 0; c < B; ++c)
          if (coin(rng)) next.push_back(i * B + c);
      sel.swap(next);
    }
    for (int i : sel) edges.emplace_back(first[h - 1] + i, sink);
  }
  Generated g;
  g.inst = make_layered(Instance(n, std::move(edges), layers[0], layers[h]), layers);
  g.provenance = {{"generator", "hard"}, {"params", {{"h", h}, {"B", B}, {"q", q}, {"m", m}}}, {"seed", seed}};
  return g;
}

Generated gen_maxkcover_instance(int m, const std::vector<std::vector<int>>& sets, int k) {
  if (k < 1 || m % (k * k) != 0) throw validation_error("gen_maxkcover_instance", "k^2 must divide m");
  for (const auto& s : sets) {
    if (static_cast<int>(s.size()) != m / k) throw validation_error("gen_maxkcover_instance", "every set must have m/k elements");
    for (int a : s)
      if (a < 0 || a >= m) throw validation_error("gen_maxkcover_instance", "element out of universe");
  }
  const int copies = m / (k * k);
  const int ns = static_cast<int>(sets.size());
  // 0 = source, then v_{i,j} at 1 + i*copies + j, then s_{a,j}
  auto vid = [&](int i, int j) { return 1 + i * copies + j; };
  auto sid = [&](int a, int j) { return 1 + ns * copies + a * copies + j; };
  const int n = 1 + ns * copies + m * copies;
  std::vector<Edge> edges;
  std::vector<std::vector<VertexId>> layers(3);
  layers[0] = {0};
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < copies; ++j) {
      edges.emplace_back(0, vid(i, j));
      layers[1].push_back(vid(i, j));
      for (int a : sets[i]) edges.emplace_back(vid(i, j), sid(a, j));
    }
  for (int a = 0; a < m; ++a)
    for (int j = 0; j < copies; ++j) layers[2].push_back(sid(a, j));
  Generated g;
  g.inst = make_layered(Instance(n, std::move(edges), {0}, layers[2]), layers);
  g.provenance = {{"generator", "maxkcover"}, {"params", {{"m", m}, {"k", k}, {"sets", sets}}}, {"seed", 0}};
  return g;
}

double survived_sinks_estimate(int d, int h, int B, int q, int trials, std::uint64_t seed) {
  if (d < 1 || d > B || h < 1 || q < 1 || trials < 1) throw validation_error("survived_sinks_estimate", "bad parameters");
  Rng rng = make_rng(seed);
  int survived = 0;
  for (int t = 0; t < trials; ++t) {
    std::int64_t alive = 1;
    for (int j = 0; j < h && alive > 0; ++j) {
      std::binomial_distribution<std::int64_t> bin(alive * d, 1.0 / q);
      alive = bin(rng);
    }
    survived += alive > 0;
  }
  return static_cast<double>(survived) / trials;
}

double survival_recursion(int d, int h, int q) {
  double p = 1.0;
  for (int j = 0; j < h; ++j) p = 1.0 - std::pow(1.0 - p / q, d);
  return p;
}

}  // namespace arbor
