#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace cmh {

/// Directed graph on a finite subset of {1..n}. Arcs reference member nodes
/// only; no parallel arcs; self-loops allowed. Node and arc containers are
/// ordered, so iteration (and every derived output) is deterministic.
class DiGraph {
public:
  DiGraph() = default;

  void add_node(int v) { nodes_.insert(v); }
  void add_arc(int u, int v);

  bool has_node(int v) const { return nodes_.count(v) != 0; }
  bool has_arc(int u, int v) const { return arcs_.count({u, v}) != 0; }

  const std::set<int>& nodes() const { return nodes_; }
  const std::set<std::pair<int, int>>& arcs() const { return arcs_; }

  bool empty() const { return nodes_.empty(); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t arc_count() const { return arcs_.size(); }

  std::vector<int> successors(int u) const;

  /// Subgraph induced by the given node set.
  DiGraph restricted_to(const std::vector<int>& keep) const;

  /// Union of nodes and arcs.
  DiGraph united_with(const DiGraph& other) const;

  friend bool operator==(const DiGraph& a, const DiGraph& b) {
    return a.nodes_ == b.nodes_ && a.arcs_ == b.arcs_;
  }
  friend bool operator!=(const DiGraph& a, const DiGraph& b) { return !(a == b); }

private:
  std::set<int> nodes_;
  std::set<std::pair<int, int>> arcs_;
};

/// Strongly connected components in canonical order: topological over the
/// condensation, ties broken by smallest member node. Each class is sorted.
std::vector<std::vector<int>> strong_components(const DiGraph& g);

/// True when the component (given as a node set) carries at least one arc of
/// g, i.e. it is not a single node without a self-loop.
bool component_is_nontrivial(const DiGraph& g, const std::vector<int>& component);

/// Classes with no arc leaving the class, in canonical order.
std::vector<std::vector<int>> final_classes(const DiGraph& g);

/// Same nodes; arc i->j iff a directed path of length exactly k exists.
DiGraph graph_power(const DiGraph& g, int k);

/// One-step path composition: arc i->j iff i->m in a and m->j in b.
DiGraph compose_arcs(const DiGraph& a, const DiGraph& b);

/// Period of one strongly connected component: gcd over internal arcs u->v of
/// level(u)+1-level(v), with BFS levels from the smallest node.
long long component_cyclicity(const DiGraph& g, const std::vector<int>& component);

/// lcm of the per-component periods. Throws std::invalid_argument when some
/// strong component is trivial (it has no circuit, so no period).
long long cyclicity(const DiGraph& g);

/// DOT rendering; when `clusters` is nonempty each class is drawn as a
/// cluster labeled C1..Cs in the given order.
std::string to_dot(const DiGraph& g, const std::vector<std::vector<int>>& clusters = {},
                   const std::string& name = "G");

}  // namespace cmh
