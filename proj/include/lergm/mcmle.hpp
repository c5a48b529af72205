#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lergm/graph.hpp"
#include "lergm/model.hpp"
#include "lergm/sampler.hpp"

namespace lergm {

/// Importance-sampling approximation of log p_theta(x) - log p_theta0(x)
/// given z, evaluated block by block, with derivatives.
struct McObjective {
  double value = 0.0;
  std::vector<double> block_values;  // within contribution of every block (0 when size < 2)
  double between_value = 0.0;
  std::vector<double> gradient;      // theta_dim
  std::vector<double> hessian;       // theta_dim^2, -J^T Cov_w J (between part exact)
  double min_ess_fraction = 1.0;     // smallest per-block (sum w)^2 / (S * sum w^2)
};

/// Between-block dyad count: C(n,2) minus within-block dyads.
double between_dyads(const Membership& z);

/// Checks that `observed` and `batch` match z and the model layout.
void check_batch_layout(const StatVector& observed, const SampleBatch& batch, const Membership& z,
                        const ModelSpec& m);

McObjective mc_objective(std::span<const double> theta, const StatVector& observed, const SampleBatch& batch,
                         const ModelSpec& m, bool derivatives = true, int workers = 1);

/// Value of the approximate log-likelihood ratio; 0 at theta == batch.theta0.
double mc_loglik_ratio(std::span<const double> theta, std::span<const double> theta0, const StatVector& observed,
                       const SampleBatch& batch, const Membership& z, const ModelSpec& m);

struct Step2Config {
  std::vector<double> theta0;  // empty: edge coordinates from a tied SBM fit given z, others 0
  McmcConfig mcmc;
  std::size_t max_outer_iters = 20;
  double trust_radius = 0.5;
  double tol = 1e-2;             // outer stop on |theta_hat - theta0|_inf
  double min_ess_fraction = 0.05;
  std::uint64_t seed = 1;
  int workers = 1;

  void validate() const;
};

struct StandardErrors {
  std::vector<double> se;
  std::vector<bool> rank_deficient;
};

struct Step2Result {
  std::vector<double> theta_hat;
  std::vector<double> standard_errors;
  std::vector<bool> rank_deficient;
  std::vector<double> fisher;                   // theta_dim^2
  std::vector<std::vector<double>> theta_trace; // theta0 of every outer iteration, then theta_hat
  std::vector<double> ess_trace;                // min per-block ESS fraction at each accepted theta
  std::vector<double> block_seconds;            // sampling wall time per block, summed over batches
  std::size_t outer_iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
  double seconds = 0.0;
};

/// Step 2: trust-region MC-MLE of theta given z, then Fisher information
/// from a fresh batch at theta_hat.
Step2Result run_step2(const Graph& g, const Membership& z, const ModelSpec& m, const Step2Config& cfg);

/// Fisher information J^T Cov(s) J over blocks plus the exact between term.
std::vector<double> fisher_information(std::span<const double> theta, const SampleBatch& batch, const ModelSpec& m);

/// SE_j = sqrt((I^+)_jj) using the eigen-decomposition pseudo-inverse.
/// Coordinates touching the numerical null space are flagged.
StandardErrors standard_errors(std::span<const double> fisher, std::size_t dim);

}  // namespace lergm
