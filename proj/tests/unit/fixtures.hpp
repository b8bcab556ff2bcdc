#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "arbor/forest.hpp"
#include "arbor/generators.hpp"
#include "arbor/instance.hpp"

namespace fx {

using namespace arbor;

struct Built {
  LayeredInstance inst;
  SolutionForest sol;
};

// s -> t1..tm
inline LayeredInstance star(int m) {
  std::vector<Edge> e;
  std::vector<VertexId> sinks;
  for (int i = 1; i <= m; ++i) {
    e.emplace_back(0, i);
    sinks.push_back(i);
  }
  return make_layered(Instance(m + 1, e, {0}, sinks), {{0}, sinks});
}

// complete layered graph with the given widths (single source when widths[0] == 1)
inline LayeredInstance complete_layered(const std::vector<int>& widths) {
  return gen_random_layered(static_cast<int>(widths.size()) - 1, widths, 1.0, 0).inst;
}

// The planted trees of gen_planted as a solution (vertices are numbered so
// that the i-th vertex of layer d is a child of vertex i/k of layer d-1 per source).
inline SolutionForest planted_solution(const LayeredInstance& li, int k) {
  SolutionForest sol;
  std::map<VertexId, NodeId> at;
  for (VertexId s : li.base.sources()) at[s] = sol.add_root(s);
  // planted edges are exactly the first k out-edges in vertex id order that
  // continue a tree; recover them from the generation layout
  const int sources = static_cast<int>(li.layers[0].size());
  std::vector<std::vector<VertexId>> prev(sources);
  for (int s = 0; s < sources; ++s) prev[s] = {li.layers[0][s]};
  for (int d = 1; d <= li.depth(); ++d) {
    std::size_t pos = 0;
    for (int s = 0; s < sources; ++s) {
      std::vector<VertexId> next;
      for (VertexId u : prev[s])
        for (int c = 0; c < k; ++c) {
          VertexId v = li.layers[d][pos++];
          at[v] = sol.add_child(at[u], v);
          next.push_back(v);
        }
      prev[s] = next;
    }
  }
  return sol;
}

// Random exact-degree-k tree as its own instance: internal nodes have k
// children, leaves are sinks; optional noise edges to unused vertices.
inline Built random_tree(int k, int max_depth, double leaf_prob, std::uint64_t seed) {
  Rng rng = make_rng(seed, 77);
  std::bernoulli_distribution leaf(leaf_prob);
  std::vector<Edge> edges;
  std::vector<VertexId> sinks;
  std::vector<int> depth{0};
  SolutionForest sol;
  sol.add_root(0);
  int n = 1;
  for (NodeId i = 0; i < static_cast<NodeId>(sol.size()); ++i) {
    bool is_leaf = depth[i] == max_depth || (depth[i] > 0 && leaf(rng));
    if (is_leaf) {
      sinks.push_back(sol.end_vertex(i));
      continue;
    }
    for (int c = 0; c < k; ++c) {
      VertexId v = n++;
      edges.emplace_back(sol.end_vertex(i), v);
      sol.add_child(i, v);
      depth.push_back(depth[i] + 1);
    }
  }
  std::vector<std::vector<VertexId>> layers(max_depth + 1);
  for (NodeId i = 0; i < static_cast<NodeId>(sol.size()); ++i) layers[depth[i]].push_back(sol.end_vertex(i));
  while (!layers.empty() && layers.back().empty()) layers.pop_back();
  return {make_layered(Instance(n, edges, {0}, sinks), layers), sol};
}

// Degree-k solution with global congestion <= K on a layered instance built
// around it (widths close to N_d / K so vertices are shared).
inline Built congested_solution(int k, int K, int h, std::uint64_t seed) {
  Rng rng = make_rng(seed, 91);
  std::vector<std::vector<VertexId>> layers{{0}};
  int n = 1;
  SolutionForest sol;
  std::vector<NodeId> frontier{sol.add_root(0)};
  std::set<Edge> edges;
  for (int d = 1; d <= h; ++d) {
    const int need = static_cast<int>(frontier.size()) * k;
    int width = std::max(k, (need + K - 1) / K + static_cast<int>(rng() % 2));
    std::vector<VertexId> layer;
    for (int i = 0; i < width; ++i) layer.push_back(n++);
    std::vector<int> cap(width, K);
    std::vector<NodeId> next;
    for (NodeId f : frontier) {
      std::vector<int> idx(width);
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return cap[a] > cap[b]; });
      for (int c = 0; c < k; ++c) {
        int j = idx[c];
        cap[j]--;
        edges.insert({sol.end_vertex(f), layer[j]});
        next.push_back(sol.add_child(f, layer[j]));
      }
    }
    frontier = next;
    layers.push_back(layer);
  }
  return {make_layered(Instance(n, {edges.begin(), edges.end()}, {0}, layers.back()), layers), sol};
}

}  // namespace fx
