#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <vector>

#include "lergm/graph.hpp"

namespace lergm {

/// Mutable dense adjacency for one neighborhood, rows stored as bitsets.
/// Samplers toggle dyads in place; shared-partner counts are popcounts.
class BlockAdjacency {
 public:
  BlockAdjacency() = default;
  explicit BlockAdjacency(std::size_t m)
      : m_(m), words_((m + 63) / 64), bits_(m * words_, 0), degree_(m, 0) {}
  explicit BlockAdjacency(const Graph& g) : BlockAdjacency(g.num_nodes()) {
    for (const auto& e : g.edges()) set(e.u, e.v, true);
  }

  std::size_t size() const { return m_; }
  std::size_t num_edges() const { return edges_; }
  std::size_t degree(NodeId i) const { return degree_[i]; }

  bool has(NodeId i, NodeId j) const {
    return (bits_[i * words_ + (j >> 6)] >> (j & 63)) & 1U;
  }

  void set(NodeId i, NodeId j, bool on) {
    if (has(i, j) == on) return;
    flip(i, j);
    flip(j, i);
    if (on) {
      ++degree_[i];
      ++degree_[j];
      ++edges_;
    } else {
      --degree_[i];
      --degree_[j];
      --edges_;
    }
  }
  void toggle(NodeId i, NodeId j) { set(i, j, !has(i, j)); }

  std::size_t common_count(NodeId i, NodeId j) const {
    const std::uint64_t* a = &bits_[i * words_];
    const std::uint64_t* b = &bits_[j * words_];
    std::size_t c = 0;
    for (std::size_t w = 0; w < words_; ++w) c += std::popcount(a[w] & b[w]);
    return c;
  }

  template <typename F>
  void for_each_common(NodeId i, NodeId j, F&& f) const {
    const std::uint64_t* a = &bits_[i * words_];
    const std::uint64_t* b = &bits_[j * words_];
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t x = a[w] & b[w];
      while (x) {
        f(static_cast<NodeId>(w * 64 + std::countr_zero(x)));
        x &= x - 1;
      }
    }
  }

  template <typename F>
  void for_each_edge(F&& f) const {
    for (std::size_t i = 0; i < m_; ++i) {
      const std::uint64_t* a = &bits_[i * words_];
      for (std::size_t w = 0; w < words_; ++w) {
        std::uint64_t x = a[w];
        while (x) {
          const std::size_t j = w * 64 + std::countr_zero(x);
          if (j > i) f(static_cast<NodeId>(i), static_cast<NodeId>(j));
          x &= x - 1;
        }
      }
    }
  }

  Graph to_graph() const {
    std::vector<Edge> edges;
    edges.reserve(edges_);
    for_each_edge([&](NodeId i, NodeId j) { edges.push_back({i, j}); });
    return Graph(m_, std::move(edges));
  }

  friend bool operator==(const BlockAdjacency&, const BlockAdjacency&) = default;

 private:
  void flip(NodeId i, NodeId j) { bits_[i * words_ + (j >> 6)] ^= std::uint64_t{1} << (j & 63); }

  std::size_t m_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
  std::vector<std::size_t> degree_;
  std::size_t edges_ = 0;
};

/// Read-only view of the within-block subgraph of block k inside a full graph.
/// Node ids are global; only neighbors in block k are visible.
class BlockView {
 public:
  BlockView(const Graph& g, const Membership& z, int k) : g_(g), z_(z), k_(k) {}

  bool has(NodeId i, NodeId j) const {
    return z_.block(i) == k_ && z_.block(j) == k_ && g_.has_edge(i, j);
  }
  std::size_t degree(NodeId i) const {
    std::size_t d = 0;
    for (NodeId h : g_.neighbors(i)) d += z_.block(h) == k_;
    return d;
  }
  template <typename F>
  void for_each_common(NodeId i, NodeId j, F&& f) const {
    auto a = g_.neighbors(i);
    auto b = g_.neighbors(j);
    auto p = a.begin();
    auto q = b.begin();
    while (p != a.end() && q != b.end()) {
      if (*p < *q) {
        ++p;
      } else if (*q < *p) {
        ++q;
      } else {
        if (z_.block(*p) == k_) f(*p);
        ++p;
        ++q;
      }
    }
  }
  std::size_t common_count(NodeId i, NodeId j) const {
    std::size_t c = 0;
    for_each_common(i, j, [&](NodeId) { ++c; });
    return c;
  }

 private:
  const Graph& g_;
  const Membership& z_;
  int k_;
};

}  // namespace lergm
