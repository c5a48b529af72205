#pragma once

#include <span>
#include <vector>

#include "lergm/graph.hpp"
#include "lergm/model.hpp"

namespace lergm {

/// Limits brute-force enumeration to blocks of at most max_within_nodes
/// nodes, i.e. at most 2^21 within-block graphs.
struct EnumerationBudget {
  int max_within_nodes = 7;
  void validate() const;
};

/// Distinct within-block statistic vectors over all 2^(m choose 2) graphs on
/// m nodes, with log multiplicities. Graph index bit b is the b-th dyad in
/// lexicographic (i, j) order.
struct StatSpectrum {
  std::size_t block_size = 0;
  std::vector<StatVector> stats;
  std::vector<double> log_counts;
};

/// Cached per (block size, model).
const StatSpectrum& stat_spectrum(std::size_t block_size, const ModelSpec& m, const EnumerationBudget& budget = {});

struct ExactMoments {
  double log_normalizer = 0.0;
  StatVector mean;
  std::vector<double> covariance;  // within_dim x within_dim, row-major
};

ExactMoments exact_moments(std::size_t block_size, std::span<const double> within_eta, const ModelSpec& m,
                           const EnumerationBudget& budget = {});

/// psi = log sum_x exp(<eta, s(x)>) over all graphs on block_size nodes.
double exact_log_normalizer(std::size_t block_size, std::span<const double> within_eta, const ModelSpec& m,
                            const EnumerationBudget& budget = {});

StatVector exact_expected_stats(std::size_t block_size, std::span<const double> within_eta, const ModelSpec& m,
                                const EnumerationBudget& budget = {});

/// log p_{eta(theta, z)}(x) using the local-dependence product form: exact
/// within-block likelihoods plus independent Bernoulli between dyads.
double exact_loglik(const Graph& g, const Membership& z, const ModelSpec& m, std::span<const double> theta,
                    const EnumerationBudget& budget = {}, int workers = 1);

/// log p_{eta(theta,z)}(x) - log p_{eta(theta with dependence terms zeroed, z)}(x).
double exact_deviation(const Graph& g, const Membership& z, const ModelSpec& m, std::span<const double> theta,
                       const EnumerationBudget& budget = {});

/// The same deviation for one block graph in isolation.
double exact_block_deviation(const Graph& block, const ModelSpec& m, std::span<const double> theta,
                             const EnumerationBudget& budget = {});

/// Observed-data log-likelihood of a stochastic block model with block-pair
/// natural parameters `pair_eta` (K x K, row-major, symmetric) and prior pi,
/// summed over all K^n memberships. Refuses when K^n exceeds 2^24.
double exact_sbm_observed_loglik(const Graph& g, std::span<const double> pair_eta, std::span<const double> pi);

/// Number of dyads on which two graphs over the same node set differ.
std::size_t hamming_distance(const Graph& a, const Graph& b);

}  // namespace lergm
