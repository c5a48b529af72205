#include "lergm/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include "lergm/error.hpp"
#include "lergm/parallel.hpp"
#include "lergm/rng.hpp"

namespace lergm {

void McmcConfig::validate() const {
  if (burn_in < 1 || interval < 1 || num_samples < 1) {
    throw ValidationError("MCMC burn_in, interval and num_samples must all be >= 1");
  }
}

BlockSamples sample_within(std::size_t block_size, std::span<const double> within_eta, const ModelSpec& m,
                           const McmcConfig& cfg, const BlockAdjacency* initial, const SampleObserver& observer) {
  cfg.validate();
  if (block_size < 2) throw ValidationError("within-block sampling needs at least two nodes");
  const std::size_t w = m.within_dim();
  if (within_eta.size() != w) throw ValidationError("within eta has the wrong length");
  if (initial && initial->size() != block_size) throw ValidationError("initial state has the wrong size");

  std::vector<std::pair<NodeId, NodeId>> pairs;
  pairs.reserve(block_size * (block_size - 1) / 2);
  for (std::size_t i = 0; i < block_size; ++i) {
    for (std::size_t j = i + 1; j < block_size; ++j) pairs.emplace_back(i, j);
  }
  const std::size_t sweep = pairs.size();

  BlockSamples out;
  out.block_size = block_size;
  out.seed = cfg.seed;
  out.dim = w;
  out.stats.reserve(cfg.num_samples * w);
  BlockAdjacency state = initial ? *initial : BlockAdjacency(block_size);
  StatVector current = block_statistics(state, m);
  std::vector<double> delta(w);
  Rng rng(cfg.seed);
  std::size_t proposals = 0, accepted = 0;

  auto step = [&] {
    const auto [i, j] = pairs[rng.below(sweep)];
    block_change_statistics(state, m, i, j, delta);
    double change = 0.0;
    for (std::size_t c = 0; c < w; ++c) change += within_eta[c] * delta[c];
    const double sign = state.has(i, j) ? -1.0 : 1.0;
    const double log_ratio = sign * change;
    ++proposals;
    if (log_ratio >= 0.0 || std::log(rng.uniform_open()) < log_ratio) {
      state.toggle(i, j);
      for (std::size_t c = 0; c < w; ++c) current[c] += sign * delta[c];
      ++accepted;
    }
  };

  for (std::size_t s = 0; s < cfg.burn_in * sweep; ++s) step();
  for (std::size_t k = 0; k < cfg.num_samples; ++k) {
    for (std::size_t s = 0; s < cfg.interval * sweep; ++s) step();
    out.stats.insert(out.stats.end(), current.begin(), current.end());
    if (observer) observer(state, current);
  }
  out.acceptance_rate = proposals ? static_cast<double>(accepted) / proposals : 0.0;
  out.final_state = std::move(state);
  return out;
}

Membership sample_memberships(std::span<const double> pi, std::size_t n, std::uint64_t seed) {
  if (pi.empty()) throw ValidationError("pi is empty");
  double total = 0.0;
  for (double p : pi) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("pi has a negative or non-finite entry");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-10) throw ValidationError("pi does not sum to 1");
  std::vector<double> cdf(pi.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) cdf[k] = (acc += pi[k]);
  Rng rng(seed);
  std::vector<int> z(n);
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    if (pi[k] > 0.0) last_positive = k;
  }
  for (auto& zi : z) {
    const double u = rng.uniform() * acc;
    auto k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    zi = static_cast<int>(std::min(k, last_positive));
  }
  return Membership(std::move(z), static_cast<int>(pi.size()));
}

std::vector<Edge> sample_between(const Membership& z, double theta_between, std::uint64_t seed) {
  const std::size_t n = z.num_nodes();
  std::vector<Edge> edges;
  if (n < 2) return edges;
  const double eta = theta_between * std::log(static_cast<double>(n));
  const double p = logistic(eta);
  if (p <= 0.0) return edges;
  Rng rng(seed);
  if (p >= 1e-3) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (z.block(i) == z.block(j)) continue;
        if (rng.uniform() < p) edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
      }
    }
    return edges;
  }
  // Geometric skipping over the lexicographic dyad index; within-block hits
  // are discarded, which leaves every cross-block dyad Bernoulli(p).
  const double log_q = std::log1p(-p);
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  std::uint64_t index = 0;
  std::uint64_t row = 0, row_start = 0, row_len = n - 1;
  for (;;) {
    const double skip = std::floor(std::log(rng.uniform_open()) / log_q);
    if (skip >= static_cast<double>(total - index)) break;
    index += static_cast<std::uint64_t>(skip);
    while (index >= row_start + row_len) {
      row_start += row_len;
      ++row;
      --row_len;
    }
    const auto i = static_cast<NodeId>(row);
    const auto j = static_cast<NodeId>(row + 1 + (index - row_start));
    if (z.block(i) != z.block(j)) edges.push_back({i, j});
    if (++index >= total) break;
  }
  return edges;
}

SampleBatch draw_sample_batch(const Membership& z, const ModelSpec& m, std::span<const double> theta0,
                              const McmcConfig& cfg, const Graph* observed, int workers) {
  cfg.validate();
  validate_theta(theta0, m);
  SampleBatch batch;
  batch.theta0.assign(theta0.begin(), theta0.end());
  batch.z = z;
  batch.config = cfg;
  batch.blocks.resize(z.num_blocks());
  const auto sizes = neighborhood_sizes(z);
  parallel_for(batch.blocks.size(), workers, [&](std::size_t k) {
    if (sizes[k] < 2) {
      batch.blocks[k].block = static_cast<int>(k);
      batch.blocks[k].block_size = sizes[k];
      batch.blocks[k].dim = m.within_dim();
      return;
    }
    const auto began = std::chrono::steady_clock::now();
    McmcConfig block_cfg = cfg;
    block_cfg.seed = derive_seed(cfg.seed, {tag("within"), k});
    const auto eta = within_eta(theta0, sizes[k], m);
    std::optional<BlockAdjacency> start;
    if (observed) start.emplace(within_subgraph(*observed, z, static_cast<int>(k)).graph);
    batch.blocks[k] = sample_within(sizes[k], eta, m, block_cfg, start ? &*start : nullptr);
    batch.blocks[k].block = static_cast<int>(k);
    batch.blocks[k].seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - began).count();
  });
  return batch;
}

Graph simulate_graph(const Membership& z, std::span<const double> theta, const ModelSpec& m,
                     const McmcConfig& cfg, int workers) {
  cfg.validate();
  validate_theta(theta, m);
  McmcConfig one = cfg;
  one.num_samples = 1;
  const auto sizes = neighborhood_sizes(z);
  std::vector<std::vector<Edge>> block_edges(z.num_blocks());
  parallel_for(block_edges.size(), workers, [&](std::size_t k) {
    if (sizes[k] < 2) return;
    McmcConfig block_cfg = one;
    block_cfg.seed = derive_seed(cfg.seed, {tag("within"), k});
    const auto chain = sample_within(sizes[k], within_eta(theta, sizes[k], m), m, block_cfg);
    const auto members = z.members(static_cast<int>(k));
    chain.final_state.for_each_edge(
        [&](NodeId a, NodeId b) { block_edges[k].push_back({members[a], members[b]}); });
  });
  auto edges = sample_between(z, theta[m.between_theta_index()], derive_seed(cfg.seed, {tag("between")}));
  for (const auto& be : block_edges) edges.insert(edges.end(), be.begin(), be.end());
  return Graph(z.num_nodes(), std::move(edges));
}

SimulatedNetwork simulate_graph(std::span<const double> pi, std::size_t n, std::span<const double> theta,
                                const ModelSpec& m, const McmcConfig& cfg, int workers) {
  SimulatedNetwork out;
  out.z = sample_memberships(pi, n, derive_seed(cfg.seed, {tag("membership")}));
  out.graph = simulate_graph(out.z, theta, m, cfg, workers);
  return out;
}

}  // namespace lergm
