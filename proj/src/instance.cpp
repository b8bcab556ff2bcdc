#include "arbor/instance.hpp"

#include <algorithm>
#include <set>

namespace arbor {

Instance::Instance(int n, std::vector<Edge> edges, std::vector<VertexId> sources, std::vector<VertexId> sinks)
    : n_(n), edges_(std::move(edges)), sources_(std::move(sources)), sinks_(std::move(sinks)) {
  if (n_ < 0) n_ = 0;
  role_.assign(n_, 0);
  for (VertexId s : sources_)
    if (valid_vertex(s)) role_[s] |= 1;
  for (VertexId t : sinks_)
    if (valid_vertex(t)) role_[t] |= 2;

  std::vector<Edge> good;
  good.reserve(edges_.size());
  for (const Edge& e : edges_)
    if (valid_vertex(e.first) && valid_vertex(e.second)) good.push_back(e);
  std::sort(good.begin(), good.end());
  good.erase(std::unique(good.begin(), good.end()), good.end());
  offset_.assign(n_ + 1, 0);
  for (const Edge& e : good) offset_[e.first + 1]++;
  for (int v = 0; v < n_; ++v) offset_[v + 1] += offset_[v];
  adj_.resize(good.size());
  for (std::size_t i = 0; i < good.size(); ++i) adj_[i] = good[i].second;  // already grouped by source
}

bool Instance::has_edge(VertexId u, VertexId v) const {
  if (!valid_vertex(u) || !valid_vertex(v)) return false;
  auto o = out(u);
  return std::binary_search(o.begin(), o.end(), v);
}

int Instance::max_out_degree() const {
  int best = 0;
  for (int v = 0; v < n_; ++v) best = std::max(best, offset_[v + 1] - offset_[v]);
  return best;
}

std::vector<std::string> validate_instance(const Instance& inst) {
  std::vector<std::string> out;
  const int n = inst.vertex_count();
  if (n <= 0) out.push_back("vertex_count must be positive");
  auto bad_id = [&](VertexId v) { return v < 0 || v >= n; };
  for (VertexId s : inst.sources())
    if (bad_id(s)) out.push_back("invalid vertex id in sources: " + std::to_string(s));
  for (VertexId t : inst.sinks())
    if (bad_id(t)) out.push_back("invalid vertex id in sinks: " + std::to_string(t));
  std::set<VertexId> src(inst.sources().begin(), inst.sources().end());
  for (VertexId t : inst.sinks())
    if (src.count(t)) out.push_back("sources/sinks overlap: vertex " + std::to_string(t));
  std::set<Edge> seen;
  for (const Edge& e : inst.edges()) {
    std::string tag = "(" + std::to_string(e.first) + "," + std::to_string(e.second) + ")";
    if (bad_id(e.first) || bad_id(e.second)) {
      out.push_back("invalid edge endpoint: " + tag);
      continue;
    }
    if (inst.is_sink(e.first)) out.push_back("sink has outgoing edge: " + tag);
    if (!seen.insert(e).second) out.push_back("duplicate edge: " + tag);
  }
  return out;
}

LayeredInstance make_layered(Instance base, std::vector<std::vector<VertexId>> layers) {
  LayeredInstance li;
  li.layer_of.assign(base.vertex_count(), -1);
  for (std::size_t i = 0; i < layers.size(); ++i)
    for (VertexId v : layers[i])
      if (base.valid_vertex(v)) li.layer_of[v] = static_cast<int>(i);
  li.base = std::move(base);
  li.layers = std::move(layers);
  return li;
}

std::vector<std::string> validate_layered(const LayeredInstance& li) {
  std::vector<std::string> out = validate_instance(li.base);
  const Instance& b = li.base;
  if (li.layers.empty()) {
    out.push_back("layered instance has no layers");
    return out;
  }
  std::vector<int> count(b.vertex_count(), 0);
  for (const auto& layer : li.layers)
    for (VertexId v : layer)
      if (b.valid_vertex(v)) count[v]++;
  for (int v = 0; v < b.vertex_count(); ++v)
    if (count[v] != 1) out.push_back("vertex not in exactly one layer: " + std::to_string(v));
  std::set<VertexId> l0(li.layers[0].begin(), li.layers[0].end());
  std::set<VertexId> src(b.sources().begin(), b.sources().end());
  if (l0 != src) out.push_back("layer 0 differs from source set");
  for (const Edge& e : b.edges()) {
    if (!b.valid_vertex(e.first) || !b.valid_vertex(e.second)) continue;
    if (li.layer_of[e.second] != li.layer_of[e.first] + 1)
      out.push_back("edge skips layers: (" + std::to_string(e.first) + "," + std::to_string(e.second) + ")");
  }
  return out;
}

LayeredInstance single_source_view(const LayeredInstance& li, VertexId source) {
  Instance base(li.base.vertex_count(), li.base.edges(), {source}, li.base.sinks());
  auto layers = li.layers;
  // other sources become isolated layer-0 non-sources; keep them in layer 0 so
  // the partition stays complete
  LayeredInstance out = make_layered(std::move(base), std::move(layers));
  return out;
}

}  // namespace arbor
