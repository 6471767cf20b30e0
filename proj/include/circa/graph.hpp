#pragma once

#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "circa/errors.hpp"
#include "circa/model.hpp"

namespace circa {

// Kahn's algorithm; among ready nodes the smallest (by operator<) goes
// first, so the order is a pure function of the node and edge sets.
// Returns nullopt when the edges contain a cycle.
template <class Node>
std::optional<std::vector<Node>> kahn_order(const std::set<Node>& nodes,
                                            const std::set<std::pair<Node, Node>>& edges) {
  std::map<Node, std::size_t> in_degree;
  std::map<Node, std::vector<Node>> out;
  for (const auto& n : nodes) in_degree[n] = 0;
  for (const auto& [from, to] : edges) {
    ++in_degree[to];
    out[from].push_back(to);
  }
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> ready;
  for (const auto& [n, d] : in_degree) {
    if (d == 0) ready.push(n);
  }
  std::vector<Node> order;
  order.reserve(nodes.size());
  while (!ready.empty()) {
    Node n = ready.top();
    ready.pop();
    order.push_back(n);
    if (auto it = out.find(n); it != out.end()) {
      for (const auto& m : it->second) {
        if (--in_degree[m] == 0) ready.push(m);
      }
    }
  }
  if (order.size() != in_degree.size()) return std::nullopt;
  return order;
}

// Immutable directed acyclic graph. Construction validates that every edge
// endpoint is a node and that the edges are acyclic.
template <class Node>
class Dag {
 public:
  using Edge = std::pair<Node, Node>;  // (parent, child)

  Dag() = default;

  Dag(std::set<Node> nodes, std::set<Edge> edges) : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    for (const auto& n : nodes_) {
      parents_[n];
      children_[n];
    }
    for (const auto& [from, to] : edges_) {
      if (!nodes_.contains(from) || !nodes_.contains(to)) {
        throw Error(ErrorCode::UnknownNode, "edge endpoint is not a graph node");
      }
      if (from == to) throw Error(ErrorCode::NotDag, "self-loop");
      children_[from].insert(to);
      parents_[to].insert(from);
    }
    auto order = kahn_order(nodes_, edges_);
    if (!order) throw Error(ErrorCode::NotDag, "graph contains a cycle");
    order_ = std::move(*order);
  }

  const std::set<Node>& nodes() const noexcept { return nodes_; }
  const std::set<Edge>& edges() const noexcept { return edges_; }
  bool contains(const Node& n) const { return nodes_.contains(n); }
  bool has_edge(const Node& from, const Node& to) const { return edges_.contains({from, to}); }

  const std::set<Node>& parents(const Node& n) const { return lookup(parents_, n); }
  const std::set<Node>& children(const Node& n) const { return lookup(children_, n); }

  // Parents before children; ties resolved by ascending node order.
  const std::vector<Node>& topological_order() const noexcept { return order_; }

  friend bool operator==(const Dag& a, const Dag& b) { return a.nodes_ == b.nodes_ && a.edges_ == b.edges_; }

 private:
  static const std::set<Node>& lookup(const std::map<Node, std::set<Node>>& m, const Node& n) {
    auto it = m.find(n);
    if (it == m.end()) throw Error(ErrorCode::UnknownNode, "node is not in the graph");
    return it->second;
  }

  std::set<Node> nodes_;
  std::set<Edge> edges_;
  std::map<Node, std::set<Node>> parents_;
  std::map<Node, std::set<Node>> children_;
  std::vector<Node> order_;
};

// Causal Bayesian network over metrics.
using CausalGraph = Dag<MetricId>;

// graph.json: {"nodes": [...], "edges": [["parent", "child"], ...]}.
// Extra top-level fields are ignored on read.
std::string graph_to_json(const CausalGraph& graph);
CausalGraph graph_from_json(const std::string& text);
CausalGraph load_graph(const std::string& path);
void save_graph(const CausalGraph& graph, const std::string& path);

}  // namespace circa
