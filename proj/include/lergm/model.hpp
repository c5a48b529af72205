#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "lergm/block_graph.hpp"
#include "lergm/graph.hpp"

namespace lergm {

enum class TermKind {
  WithinEdges,
  WithinTransitiveEdges,
  WithinGwDegree,
  WithinGwesp,
  BetweenEdges,
};

struct Term {
  TermKind kind = TermKind::WithinEdges;
  int truncation = 0;  // GW terms only: number of decay indices t = 1..truncation

  /// Number of sufficient-statistic coordinates per block (0 for between).
  std::size_t stat_dim() const;
  /// Number of theta coordinates.
  std::size_t theta_dim() const;
  std::string name() const;
};

/// Sufficient statistics. Layout for K blocks: K consecutive per-block
/// segments of within_dim() coordinates (terms in model order, GW terms
/// binned t = 1..T), then one between-edge count.
using StatVector = std::vector<double>;

/// Ordered ERGM term list with size-dependent natural parameter maps.
///   within edges        eta = theta * log n_k
///   transitive edges    eta = theta * log n_k
///   GW degree / GWESP   eta_t = theta_a * log n_k * exp(theta_b) * [1 - (1 - exp(-theta_b))^t]
///   between edges       eta = theta * log n
class ModelSpec {
 public:
  explicit ModelSpec(std::vector<Term> terms);

  static ModelSpec edges_only();
  static ModelSpec edge_transitive();
  static ModelSpec curved(int gwd_truncation = 20, int gwesp_truncation = 12);
  /// Parses a comma-separated list of term names:
  /// edges, transitive, gwdegree, gwesp, between.
  static ModelSpec from_names(const std::string& names, int gwd_truncation = 20,
                              int gwesp_truncation = 12);

  const std::vector<Term>& terms() const { return terms_; }
  std::size_t theta_dim() const { return theta_dim_; }
  std::size_t within_dim() const { return within_dim_; }
  std::size_t stat_dim(int num_blocks) const { return num_blocks * within_dim_ + 1; }
  std::size_t theta_offset(std::size_t term) const { return theta_offsets_[term]; }
  /// Offset of a within term inside a block segment.
  std::size_t stat_offset(std::size_t term) const { return stat_offsets_[term]; }
  std::size_t between_theta_index() const { return theta_offsets_[between_term_]; }
  /// True for the theta coordinates of edge terms (within and between);
  /// all other coordinates are the dependence parameters.
  std::vector<bool> edge_coordinates() const;
  std::vector<std::string> theta_names() const;
  std::string term_list() const;

  bool has(TermKind kind) const;
  int max_truncation(TermKind kind) const;

  friend bool operator==(const ModelSpec& a, const ModelSpec& b);

 private:
  std::vector<Term> terms_;
  std::vector<std::size_t> theta_offsets_;
  std::vector<std::size_t> stat_offsets_;
  std::size_t theta_dim_ = 0;
  std::size_t within_dim_ = 0;
  std::size_t between_term_ = 0;
};

inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
inline double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
inline double logit(double p) { return std::log(p) - std::log1p(-p); }

/// Geometric weight exp(decay) * [1 - (1 - exp(-decay))^t] for t <= truncation, else 0.
double gw_weight(double decay, int t, int truncation);

/// Checks theta length and finiteness; throws ValidationError.
void validate_theta(std::span<const double> theta, const ModelSpec& m);

/// Within-block natural parameters for a block of the given size; all zero
/// when the block has at most one node.
std::vector<double> within_eta(std::span<const double> theta, std::size_t block_size, const ModelSpec& m);
double between_eta(std::span<const double> theta, std::size_t num_nodes, const ModelSpec& m);

/// Full eta(theta, z) aligned with the StatVector layout.
std::vector<double> natural_parameters(std::span<const double> theta, const Membership& z, const ModelSpec& m);

/// d within_eta / d theta as a within_dim x theta_dim row-major matrix.
std::vector<double> within_jacobian(std::span<const double> theta, std::size_t block_size, const ModelSpec& m);

/// Within statistics of a single block given as a graph (all nodes in the block).
StatVector block_statistics(const Graph& block, const ModelSpec& m);
StatVector block_statistics(const BlockAdjacency& block, const ModelSpec& m);

StatVector sufficient_statistics(const Graph& g, const Membership& z, const ModelSpec& m);

/// s(x with (i,j) present) - s(x with (i,j) absent), computed from the
/// neighborhoods of i and j only.
StatVector change_statistics(const Graph& g, const Membership& z, const ModelSpec& m, NodeId i, NodeId j);

/// Within-block change statistics for the block held in `block`; writes
/// within_dim() coordinates into `delta`.
void block_change_statistics(const BlockAdjacency& block, const ModelSpec& m, NodeId i, NodeId j,
                             std::span<double> delta);

/// <eta(theta, z), s(x)>.
double log_unnormalized(const Graph& g, const Membership& z, const ModelSpec& m, std::span<const double> theta);

/// Copy of theta with every non-edge within-term coordinate set to zero.
std::vector<double> zero_dependence_terms(std::span<const double> theta, const ModelSpec& m);

}  // namespace lergm
