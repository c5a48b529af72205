#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace lergm {

using NodeId = std::int32_t;

/// Unordered node pair stored with u < v (0-based).
struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Immutable undirected simple graph with sorted CSR adjacency.
class Graph {
 public:
  Graph() = default;

  /// Canonicalizes `edges`: orients each pair as u < v, sorts, and drops
  /// duplicates. Throws ValidationError on self-loops or ids out of range.
  Graph(std::size_t num_nodes, std::vector<Edge> edges);

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const NodeId> neighbors(NodeId i) const {
    return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
  }
  std::size_t degree(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }
  bool has_edge(NodeId i, NodeId j) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.num_nodes_ == b.num_nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adjacency_;
};

/// Hard block assignment z; blocks are 0-based internally.
class Membership {
 public:
  Membership() = default;
  Membership(std::vector<int> assignment, int num_blocks);

  std::size_t num_nodes() const { return assignment_.size(); }
  int num_blocks() const { return num_blocks_; }
  int block(NodeId i) const { return assignment_[i]; }
  const std::vector<int>& assignment() const { return assignment_; }

  /// Nodes of block k in increasing order.
  std::vector<NodeId> members(int k) const;

  friend bool operator==(const Membership&, const Membership&) = default;

 private:
  std::vector<int> assignment_;
  int num_blocks_ = 0;
};

/// Soft membership alpha: n x K row-stochastic matrix, row-major.
class SoftMembership {
 public:
  SoftMembership() = default;
  SoftMembership(std::size_t num_nodes, int num_blocks);
  SoftMembership(std::size_t num_nodes, int num_blocks, std::vector<double> values);

  /// One-hot rows matching z.
  static SoftMembership from_hard(const Membership& z);

  std::size_t num_nodes() const { return num_nodes_; }
  int num_blocks() const { return num_blocks_; }

  std::span<double> row(std::size_t i) {
    return {values_.data() + i * num_blocks_, static_cast<std::size_t>(num_blocks_)};
  }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * num_blocks_, static_cast<std::size_t>(num_blocks_)};
  }
  double operator()(std::size_t i, int k) const { return values_[i * num_blocks_ + k]; }
  double& operator()(std::size_t i, int k) { return values_[i * num_blocks_ + k]; }
  const std::vector<double>& values() const { return values_; }

  /// Throws ValidationError unless rows are nonnegative and sum to 1 within tol.
  void validate(double tol = 1e-10) const;

  /// Argmax per row, lowest index on ties.
  Membership harden() const;

 private:
  std::size_t num_nodes_ = 0;
  int num_blocks_ = 0;
  std::vector<double> values_;
};

/// Induced subgraph together with the local-to-global node map.
struct Subgraph {
  Graph graph;
  std::vector<NodeId> nodes;
};

std::vector<std::size_t> neighborhood_sizes(const Membership& z);

/// Induced subgraph on block k; local ids follow increasing global id.
Subgraph within_subgraph(const Graph& g, const Membership& z, int k);

/// Number of edges whose endpoints lie in different blocks.
std::size_t between_edge_count(const Graph& g, const Membership& z);

/// Edge list reader: whitespace-separated 1-based id pairs, `#` comments,
/// optional `n=<count>` header line.
Graph load_edge_list(std::istream& in);
void write_edge_list(std::ostream& out, const Graph& g);

/// Membership reader: `node_id block_id` lines, 1-based. Every node 1..n must
/// appear exactly once. K defaults to the largest block id seen.
Membership load_membership(std::istream& in, std::optional<int> num_blocks = std::nullopt);
void write_membership(std::ostream& out, const Membership& z);

}  // namespace lergm
