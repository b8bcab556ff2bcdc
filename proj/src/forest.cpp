#include "arbor/forest.hpp"

#include <algorithm>

namespace arbor {

namespace {
std::uint64_t key(std::int32_t parent, VertexId v) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(parent + 1)) << 32) |
         static_cast<std::uint32_t>(v);
}
}  // namespace

std::int32_t PathTrie::root(VertexId source) { return extend(kNone, source); }

std::int32_t PathTrie::extend(std::int32_t prefix, VertexId v) {
  auto [it, fresh] = index_.try_emplace(key(prefix, v), static_cast<std::int32_t>(entries_.size()));
  if (fresh) entries_.push_back({v, prefix, prefix == kNone ? 0 : entries_[prefix].length + 1});
  return it->second;
}

std::vector<VertexId> PathTrie::path(std::int32_t id) const {
  std::vector<VertexId> out;
  for (; id != kNone; id = entries_[id].parent) out.push_back(entries_[id].vertex);
  std::reverse(out.begin(), out.end());
  return out;
}

NodeId SolutionForest::add_root(VertexId source) {
  NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back({trie_.root(source), kNone, {}});
  roots_.push_back(id);
  return id;
}

NodeId SolutionForest::add_child(NodeId parent, VertexId v) {
  NodeId id = static_cast<NodeId>(nodes_.size());
  std::int32_t path = trie_.extend(nodes_[parent].path, v);
  nodes_.push_back({path, parent, {}});
  nodes_[parent].children.push_back(id);
  return id;
}

NodeId SolutionForest::root_of(NodeId id) const {
  while (nodes_[id].parent != kNone) id = nodes_[id].parent;
  return id;
}

int SolutionForest::max_length() const {
  int best = 0;
  for (const auto& nd : nodes_) best = std::max(best, trie_.length(nd.path));
  return best;
}

std::vector<std::vector<NodeId>> SolutionForest::descendants_by_distance(NodeId p, int depth) const {
  std::vector<std::vector<NodeId>> out(1, {p});
  for (int d = 1; d <= depth; ++d) {
    std::vector<NodeId> next;
    for (NodeId q : out.back())
      for (NodeId c : nodes_[q].children) next.push_back(c);
    if (next.empty()) break;
    out.push_back(std::move(next));
  }
  out.resize(depth + 1);
  return out;
}

std::vector<std::int64_t> SolutionForest::subtree_sizes() const {
  std::vector<std::int64_t> sz(nodes_.size(), 1);
  for (std::size_t i = nodes_.size(); i-- > 0;)
    if (nodes_[i].parent != kNone) sz[nodes_[i].parent] += sz[i];
  return sz;
}

Subforest SolutionForest::retain(const std::vector<char>& keep) const {
  Subforest out;
  std::vector<NodeId> remap(nodes_.size(), kNone);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!keep[i]) continue;
    const ForestNode& nd = nodes_[i];
    NodeId id;
    if (nd.parent == kNone) {
      id = out.forest.add_root(trie_.end(nd.path));
    } else {
      if (remap[nd.parent] == kNone) continue;
      id = out.forest.add_child(remap[nd.parent], trie_.end(nd.path));
    }
    remap[i] = id;
    out.origin.push_back(static_cast<NodeId>(i));
  }
  return out;
}

void SolutionForest::append_tree(const SolutionForest& other, NodeId src_root) {
  std::vector<std::pair<NodeId, NodeId>> stack{{src_root, add_root(other.end_vertex(src_root))}};
  // preorder keeps parent ids below child ids
  while (!stack.empty()) {
    auto [o, mine] = stack.back();
    stack.pop_back();
    const auto& ch = other.children(o);
    std::vector<std::pair<NodeId, NodeId>> made;
    for (NodeId c : ch) made.push_back({c, add_child(mine, other.end_vertex(c))});
    for (auto it = made.rbegin(); it != made.rend(); ++it) stack.push_back(*it);
  }
}

SolutionForest extract_tree(const SolutionForest& sol, NodeId root) {
  SolutionForest out;
  out.append_tree(sol, root);
  return out;
}

}  // namespace arbor
