#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lergm/block_graph.hpp"
#include "lergm/graph.hpp"
#include "lergm/model.hpp"

namespace lergm {

/// Metropolis-Hastings schedule. A sweep is one proposed toggle per
/// within-block dyad.
struct McmcConfig {
  std::size_t burn_in = 200;
  std::size_t interval = 10;
  std::size_t num_samples = 1000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Retained within-block statistics of one chain (num_samples x dim, row-major).
struct BlockSamples {
  int block = 0;
  std::size_t block_size = 0;
  std::uint64_t seed = 0;
  std::size_t dim = 0;
  std::vector<double> stats;
  double acceptance_rate = 0.0;
  double seconds = 0.0;
  BlockAdjacency final_state;

  std::size_t count() const { return dim == 0 ? 0 : stats.size() / dim; }
  std::span<const double> sample(std::size_t s) const { return {stats.data() + s * dim, dim}; }
};

/// Called on every retained state with its statistics.
using SampleObserver = std::function<void(const BlockAdjacency&, std::span<const double>)>;

/// Runs one MH chain over the dyads of a block of `block_size` nodes. The
/// chain starts from `initial` when given, otherwise from the empty graph.
BlockSamples sample_within(std::size_t block_size, std::span<const double> within_eta, const ModelSpec& m,
                           const McmcConfig& cfg, const BlockAdjacency* initial = nullptr,
                           const SampleObserver& observer = {});

/// n iid Multinomial(1, pi) draws; pi must lie on the simplex within 1e-10.
Membership sample_memberships(std::span<const double> pi, std::size_t n, std::uint64_t seed);

/// Independent Bernoulli(logistic(theta_between * log n)) edges on all
/// cross-block dyads. Uses geometric skipping when p < 1e-3.
std::vector<Edge> sample_between(const Membership& z, double theta_between, std::uint64_t seed);

/// MC sample of within-block statistics at theta0, one chain per block of
/// size >= 2. Seeds derive from (config.seed, "within", block).
struct SampleBatch {
  std::vector<double> theta0;
  Membership z;
  McmcConfig config;
  std::vector<BlockSamples> blocks;  // indexed by block id; empty when the block has < 2 nodes
};

/// When `observed` is given, each chain starts from the observed block subgraph.
SampleBatch draw_sample_batch(const Membership& z, const ModelSpec& m, std::span<const double> theta0,
                              const McmcConfig& cfg, const Graph* observed = nullptr, int workers = 1);

/// Draws a graph given z: between edges from the ("between") substream and
/// one retained state per block chain (num_samples is ignored; the state after
/// burn_in + interval sweeps is used).
Graph simulate_graph(const Membership& z, std::span<const double> theta, const ModelSpec& m,
                     const McmcConfig& cfg, int workers = 1);

struct SimulatedNetwork {
  Graph graph;
  Membership z;
};

/// Draws z ~ Multinomial(pi) from the ("membership") substream, then a graph.
SimulatedNetwork simulate_graph(std::span<const double> pi, std::size_t n, std::span<const double> theta,
                                const ModelSpec& m, const McmcConfig& cfg, int workers = 1);

}  // namespace lergm
