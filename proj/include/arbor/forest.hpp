#pragma once

#include <unordered_map>
#include <vector>

#include "arbor/common.hpp"

namespace arbor {

// Interned prefix tree of paths. Id 0.. are stable; equal paths share an id.
class PathTrie {
 public:
  std::int32_t root(VertexId source);
  std::int32_t extend(std::int32_t prefix, VertexId v);
  VertexId end(std::int32_t id) const { return entries_[id].vertex; }
  std::int32_t parent(std::int32_t id) const { return entries_[id].parent; }
  int length(std::int32_t id) const { return entries_[id].length; }
  std::vector<VertexId> path(std::int32_t id) const;
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    VertexId vertex;
    std::int32_t parent;
    int length;
  };
  std::vector<Entry> entries_;
  std::unordered_map<std::uint64_t, std::int32_t> index_;
};

struct ForestNode {
  std::int32_t path;
  NodeId parent;
  std::vector<NodeId> children;
};

// Multiset of source-rooted paths with parent links. A node's id is always
// larger than its parent's, so descending id order is a bottom-up order.
// Length of a path is its edge count; roots have length 0.
class SolutionForest {
 public:
  NodeId add_root(VertexId source);
  NodeId add_child(NodeId parent, VertexId v);

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const ForestNode& node(NodeId id) const { return nodes_[id]; }
  NodeId parent(NodeId id) const { return nodes_[id].parent; }
  const std::vector<NodeId>& children(NodeId id) const { return nodes_[id].children; }
  VertexId end_vertex(NodeId id) const { return trie_.end(nodes_[id].path); }
  int length(NodeId id) const { return trie_.length(nodes_[id].path); }
  std::vector<VertexId> path(NodeId id) const { return trie_.path(nodes_[id].path); }
  const std::vector<NodeId>& roots() const { return roots_; }
  NodeId root_of(NodeId id) const;
  int max_length() const;
  // Nodes of D(p, d) for d = 0..depth, grouped by distance.
  std::vector<std::vector<NodeId>> descendants_by_distance(NodeId p, int depth) const;
  // subtree sizes including the node itself
  std::vector<std::int64_t> subtree_sizes() const;

  // Keeps nodes with keep[id] != 0 whose ancestors are all kept. origin maps
  // new ids to old ids.
  struct Subforest;
  Subforest retain(const std::vector<char>& keep) const;

  // Appends a copy of the subtree rooted at src_node of other as a new root
  // (src_node must be a root of other).
  void append_tree(const SolutionForest& other, NodeId src_root);

 private:
  PathTrie trie_;
  std::vector<ForestNode> nodes_;
  std::vector<NodeId> roots_;
};

struct SolutionForest::Subforest {
  SolutionForest forest;
  std::vector<NodeId> origin;
};
using Subforest = SolutionForest::Subforest;

// Single tree of the forest rooted at root as its own forest.
SolutionForest extract_tree(const SolutionForest& sol, NodeId root);

}  // namespace arbor
