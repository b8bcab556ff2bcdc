#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "arbor/common.hpp"

namespace arbor {

using Edge = std::pair<VertexId, VertexId>;

// Directed graph with source and sink sets. Construction never throws on bad
// data so that validate_instance can report it.
class Instance {
 public:
  Instance() = default;
  Instance(int n, std::vector<Edge> edges, std::vector<VertexId> sources, std::vector<VertexId> sinks);

  int vertex_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<VertexId>& sources() const { return sources_; }
  const std::vector<VertexId>& sinks() const { return sinks_; }
  bool valid_vertex(VertexId v) const { return v >= 0 && v < n_; }
  bool is_source(VertexId v) const { return valid_vertex(v) && role_[v] & 1; }
  bool is_sink(VertexId v) const { return valid_vertex(v) && role_[v] & 2; }
  // sorted, deduplicated out-neighbours
  std::span<const VertexId> out(VertexId v) const {
    return {adj_.data() + offset_[v], adj_.data() + offset_[v + 1]};
  }
  bool has_edge(VertexId u, VertexId v) const;
  int max_out_degree() const;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<VertexId> sources_, sinks_;
  std::vector<unsigned char> role_;
  std::vector<int> offset_{0};
  std::vector<VertexId> adj_;
};

std::vector<std::string> validate_instance(const Instance& inst);

struct LayeredInstance {
  Instance base;
  std::vector<std::vector<VertexId>> layers;
  std::vector<int> layer_of;  // -1 for vertices outside every layer

  int depth() const { return static_cast<int>(layers.size()) - 1; }
};

// Fills layer_of from the layer lists.
LayeredInstance make_layered(Instance base, std::vector<std::vector<VertexId>> layers);
std::vector<std::string> validate_layered(const LayeredInstance& li);

// Restricts a layered instance to a single source (other sources and their
// private vertices stay, but are no longer sources).
LayeredInstance single_source_view(const LayeredInstance& li, VertexId source);

}  // namespace arbor
