#pragma once

// Causal graphs: construction, path enumeration, d-separation and
// back-door adjustment audits.
//
// Path enumeration is an exhaustive simple-path search over the skeleton, so
// the worst case is exponential in the node count. Audited graphs are small
// (a few dozen nodes at most), which keeps this practical.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "collider/error.hpp"

namespace collider {

enum class EdgeDirection { Forward, Backward };

enum class NodeRole { Collider, Chain, Fork, Endpoint };

constexpr const char* role_name(NodeRole role) {
  switch (role) {
    case NodeRole::Collider: return "collider";
    case NodeRole::Chain: return "chain";
    case NodeRole::Fork: return "fork";
    case NodeRole::Endpoint: return "endpoint";
  }
  return "?";
}

/// A simple path through the skeleton of a Dag. directions[i] describes the
/// edge between nodes[i] and nodes[i + 1]: Forward means nodes[i] -> nodes[i+1].
struct Path {
  std::vector<std::string> nodes;
  std::vector<EdgeDirection> directions;

  /// Renders as e.g. "SOD -> PRO <- SBP".
  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (i > 0) out += directions[i - 1] == EdgeDirection::Forward ? " -> " : " <- ";
      out += nodes[i];
    }
    return out;
  }

  bool starts_into_source() const {
    return !directions.empty() && directions.front() == EdgeDirection::Backward;
  }

  bool is_directed() const {
    return std::all_of(directions.begin(), directions.end(),
                       [](EdgeDirection d) { return d == EdgeDirection::Forward; });
  }

  friend bool operator==(const Path&, const Path&) = default;
};

/// Shortest paths first, ties broken lexicographically by node sequence.
inline bool path_order(const Path& a, const Path& b) {
  if (a.nodes.size() != b.nodes.size()) return a.nodes.size() < b.nodes.size();
  return a.nodes < b.nodes;
}

using NameSet = std::set<std::string>;
using EdgeList = std::vector<std::pair<std::string, std::string>>;

class Dag {
 public:
  /// Validates and builds a graph. Throws UnknownNode, DuplicateEdge (also for
  /// self-edges and duplicated node names) or CycleError naming one cycle.
  static Dag build(const std::vector<std::string>& nodes, const EdgeList& edges) {
    Dag g;
    for (const auto& name : nodes) {
      if (g.index_.count(name)) {
        throw Error(ErrorKind::DuplicateEdge, "node '" + name + "' declared twice");
      }
      g.index_.emplace(name, g.names_.size());
      g.names_.push_back(name);
    }
    g.children_.resize(g.names_.size());
    g.parents_.resize(g.names_.size());
    for (const auto& [from, to] : edges) {
      const std::size_t f = g.require(from);
      const std::size_t t = g.require(to);
      if (f == t) throw Error(ErrorKind::DuplicateEdge, "self-edge on '" + from + "'");
      auto& kids = g.children_[f];
      if (std::find(kids.begin(), kids.end(), t) != kids.end()) {
        throw Error(ErrorKind::DuplicateEdge, "edge " + from + " -> " + to + " repeated");
      }
      kids.push_back(t);
      g.parents_[t].push_back(f);
      g.edges_.emplace_back(from, to);
    }
    for (auto& v : g.children_) std::sort(v.begin(), v.end());
    for (auto& v : g.parents_) std::sort(v.begin(), v.end());
    g.compute_topological_order();
    return g;
  }

  const std::vector<std::string>& nodes() const noexcept { return names_; }
  const EdgeList& edges() const noexcept { return edges_; }
  const std::vector<std::string>& topological_order() const noexcept { return topo_; }
  std::size_t size() const noexcept { return names_.size(); }

  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  bool has_edge(const std::string& from, const std::string& to) const {
    const auto& kids = children_[require(from)];
    return std::binary_search(kids.begin(), kids.end(), require(to));
  }

  std::vector<std::string> parents(const std::string& name) const {
    return names_of(parents_[require(name)]);
  }

  std::vector<std::string> children(const std::string& name) const {
    return names_of(children_[require(name)]);
  }

  /// Strict descendants (the node itself excluded).
  NameSet descendants(const std::string& name) const {
    NameSet out;
    std::vector<std::size_t> stack(children_[require(name)]);
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      if (!out.insert(names_[v]).second) continue;
      for (std::size_t c : children_[v]) stack.push_back(c);
    }
    return out;
  }

  /// Ancestors of every member of `names`, members included.
  NameSet ancestral_closure(const NameSet& names) const {
    NameSet out;
    std::vector<std::size_t> stack;
    for (const auto& n : names) stack.push_back(require(n));
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      if (!out.insert(names_[v]).second) continue;
      for (std::size_t p : parents_[v]) stack.push_back(p);
    }
    return out;
  }

  std::size_t require(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error(ErrorKind::UnknownNode, "'" + name + "'");
    return it->second;
  }

  friend bool operator==(const Dag& a, const Dag& b) {
    if (NameSet(a.names_.begin(), a.names_.end()) != NameSet(b.names_.begin(), b.names_.end())) {
      return false;
    }
    using EdgeSet = std::set<std::pair<std::string, std::string>>;
    return EdgeSet(a.edges_.begin(), a.edges_.end()) == EdgeSet(b.edges_.begin(), b.edges_.end());
  }

 private:
  std::vector<std::string> names_of(const std::vector<std::size_t>& ids) const {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (std::size_t i : ids) out.push_back(names_[i]);
    return out;
  }

  void compute_topological_order() {
    const std::size_t n = names_.size();
    std::vector<std::size_t> indegree(n);
    for (std::size_t v = 0; v < n; ++v) indegree[v] = parents_[v].size();
    // Smallest declaration index first keeps the order deterministic.
    std::set<std::size_t> ready;
    for (std::size_t v = 0; v < n; ++v) {
      if (indegree[v] == 0) ready.insert(v);
    }
    while (!ready.empty()) {
      const std::size_t v = *ready.begin();
      ready.erase(ready.begin());
      topo_.push_back(names_[v]);
      for (std::size_t c : children_[v]) {
        if (--indegree[c] == 0) ready.insert(c);
      }
    }
    if (topo_.size() != n) throw Error(ErrorKind::CycleError, describe_cycle(indegree));
  }

  // Every node left with positive indegree after Kahn's pass has a parent that
  // is also left, so walking parents from any of them must revisit a node.
  std::string describe_cycle(const std::vector<std::size_t>& indegree) const {
    std::size_t v = 0;
    while (indegree[v] == 0) ++v;
    std::vector<std::size_t> walk;
    std::vector<int> seen_at(names_.size(), -1);
    while (seen_at[v] < 0) {
      seen_at[v] = static_cast<int>(walk.size());
      walk.push_back(v);
      for (std::size_t p : parents_[v]) {
        if (indegree[p] > 0) {
          v = p;
          break;
        }
      }
    }
    std::vector<std::size_t> cycle(walk.begin() + seen_at[v], walk.end());
    std::reverse(cycle.begin(), cycle.end());
    std::string out = "cycle ";
    for (std::size_t id : cycle) out += names_[id] + " -> ";
    return out + names_[cycle.front()];
  }

  std::vector<std::string> names_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::vector<std::size_t>> parents_;
  EdgeList edges_;
  std::vector<std::string> topo_;
};

inline Dag build_dag(const std::vector<std::string>& nodes, const EdgeList& edges) {
  return Dag::build(nodes, edges);
}

/// All simple paths between x and y in the skeleton, shortest first and then
/// lexicographic by node sequence.
inline std::vector<Path> enumerate_paths(const Dag& dag, const std::string& x, const std::string& y) {
  dag.require(x);
  dag.require(y);
  if (x == y) throw Error(ErrorKind::InvalidArgument, "path endpoints must differ");

  std::vector<Path> out;
  Path current{{x}, {}};
  NameSet on_path{x};

  auto visit = [&](auto&& self, const std::string& at) -> void {
    if (at == y) {
      out.push_back(current);
      return;
    }
    auto step = [&](const std::string& next, EdgeDirection dir) {
      if (on_path.count(next)) return;
      on_path.insert(next);
      current.nodes.push_back(next);
      current.directions.push_back(dir);
      self(self, next);
      current.nodes.pop_back();
      current.directions.pop_back();
      on_path.erase(next);
    };
    for (const auto& c : dag.children(at)) step(c, EdgeDirection::Forward);
    for (const auto& p : dag.parents(at)) step(p, EdgeDirection::Backward);
  };
  visit(visit, x);
  std::sort(out.begin(), out.end(), path_order);
  return out;
}

inline NodeRole classify_node_on_path(const Path& path, const std::string& v) {
  auto it = std::find(path.nodes.begin(), path.nodes.end(), v);
  if (it == path.nodes.end()) {
    throw Error(ErrorKind::NodeNotOnPath, "'" + v + "' is not on " + path.to_string());
  }
  const auto i = static_cast<std::size_t>(it - path.nodes.begin());
  if (i == 0 || i + 1 == path.nodes.size()) return NodeRole::Endpoint;
  const bool in_from_left = path.directions[i - 1] == EdgeDirection::Forward;
  const bool in_from_right = path.directions[i] == EdgeDirection::Backward;
  if (in_from_left && in_from_right) return NodeRole::Collider;
  if (!in_from_left && !in_from_right) return NodeRole::Fork;
  return NodeRole::Chain;
}

inline void require_all(const Dag& dag, const NameSet& names) {
  for (const auto& n : names) dag.require(n);
}

/// Blocked iff some interior non-collider is conditioned on, or some collider
/// has neither itself nor any descendant in the conditioning set.
inline bool is_path_blocked(const Dag& dag, const Path& path, const NameSet& conditioning) {
  for (const auto& n : path.nodes) dag.require(n);
  require_all(dag, conditioning);
  if (conditioning.count(path.nodes.front()) || conditioning.count(path.nodes.back())) {
    throw Error(ErrorKind::InvalidArgument, "conditioning set contains a path endpoint");
  }
  for (std::size_t i = 1; i + 1 < path.nodes.size(); ++i) {
    const auto& v = path.nodes[i];
    if (classify_node_on_path(path, v) == NodeRole::Collider) {
      if (conditioning.count(v)) continue;
      const NameSet desc = dag.descendants(v);
      const bool opened = std::any_of(desc.begin(), desc.end(),
                                      [&](const std::string& d) { return conditioning.count(d) > 0; });
      if (!opened) return true;
    } else if (conditioning.count(v)) {
      return true;
    }
  }
  return false;
}

inline bool d_separated(const Dag& dag, const std::string& x, const std::string& y,
                        const NameSet& conditioning) {
  for (const auto& p : enumerate_paths(dag, x, y)) {
    if (!is_path_blocked(dag, p, conditioning)) return false;
  }
  return true;
}

struct AdjustmentVerdict {
  bool valid = false;
  /// Back-door paths left open by the adjustment set.
  std::vector<Path> open_backdoor_paths;
  /// Non-causal paths blocked with no adjustment that the set opens.
  std::vector<Path> opened_collider_paths;
  std::vector<std::string> descendants_of_exposure_in_set;
};

/// Back-door audit: every non-causal path must be blocked under `adjust`, and no
/// member of `adjust` may descend from the exposure.
inline AdjustmentVerdict check_adjustment_set(const Dag& dag, const std::string& exposure,
                                              const std::string& outcome, const NameSet& adjust) {
  dag.require(exposure);
  dag.require(outcome);
  require_all(dag, adjust);
  if (exposure == outcome) throw Error(ErrorKind::InvalidArgument, "exposure equals outcome");
  if (adjust.count(exposure) || adjust.count(outcome)) {
    throw Error(ErrorKind::InvalidArgument, "adjustment set contains the exposure or outcome");
  }

  AdjustmentVerdict verdict;
  for (const auto& path : enumerate_paths(dag, exposure, outcome)) {
    if (path.is_directed()) continue;
    if (is_path_blocked(dag, path, adjust)) continue;
    if (is_path_blocked(dag, path, {})) {
      verdict.opened_collider_paths.push_back(path);
    } else {
      verdict.open_backdoor_paths.push_back(path);
    }
  }
  const NameSet desc = dag.descendants(exposure);
  for (const auto& z : adjust) {
    if (desc.count(z)) verdict.descendants_of_exposure_in_set.push_back(z);
  }
  verdict.valid = verdict.open_backdoor_paths.empty() && verdict.opened_collider_paths.empty() &&
                  verdict.descendants_of_exposure_in_set.empty();
  return verdict;
}

}  // namespace collider
