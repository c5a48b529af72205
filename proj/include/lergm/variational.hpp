#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lergm/graph.hpp"

namespace lergm {

/// How the Step 1 stochastic block model parameterizes block-pair dyads.
///   Tied:   eta_kk = within * log(n_k~), eta_kl = between * log n, where n_k~
///           are the soft block sizes recorded when the parameters were fitted.
///   Untied: one free natural parameter per unordered block pair.
enum class SbmMode { Tied, Untied };

/// Step 1 SBM parameters (theta_1). The block-pair natural parameters are a
/// fixed function of the stored fields, so lower bound, minorizer and the
/// observed-data likelihood all see the same dyad probabilities.
struct Theta1 {
  SbmMode mode = SbmMode::Tied;
  std::size_t num_nodes = 0;
  int num_blocks = 1;
  double within = 0.0;
  double between = 0.0;
  std::vector<double> block_sizes;  // tied: soft sizes n_k~ (each >= 2)
  std::vector<double> pair;         // untied: K x K symmetric natural parameters

  static Theta1 tied(double within, double between, std::vector<double> block_sizes, std::size_t num_nodes);
  static Theta1 untied(std::vector<double> pair, int num_blocks, std::size_t num_nodes);

  double eta(int k, int l) const;
  /// Dense K x K natural parameter matrix.
  std::vector<double> pair_eta() const;
};

/// Variational lower bound on the SBM observed-data log-likelihood:
///   sum_{i<j} sum_{k,l} a_ik a_jl log p_kl(x_ij) + sum_i sum_k a_ik (log pi_k - log a_ik).
/// Cost O(|E| K + n K^2); O(n K) in tied mode.
double lower_bound(const SoftMembership& alpha, const Theta1& theta1, std::span<const double> pi, const Graph& g,
                   int workers = 1);

/// MM surrogate of the lower bound at alpha_t (quadratic in alpha, separable
/// over nodes). Requires every alpha_t entry >= floor.
double minorizer_value(const SoftMembership& alpha, const Theta1& theta1, std::span<const double> pi_t,
                       const SoftMembership& alpha_t, const Graph& g, double floor = 1e-6, int workers = 1);

/// Maximizes sum_k quad[k] x_k^2 + lin[k] x_k over {x : x_k >= floor, sum x_k = 1}
/// by KKT water-filling on the equality multiplier. quad[k] must be <= 0;
/// zero entries are handled as linear coordinates.
std::vector<double> solve_simplex_qp(std::span<const double> quad, std::span<const double> lin, double floor,
                                     double tol = 1e-10);

struct AlphaUpdateOptions {
  double qp_tol = 1e-10;
  double floor = 1e-6;
  int workers = 1;
};

/// One MM step: every node's row maximizes its part of the minorizer built
/// at alpha_t (Jacobi style, all rows read the same snapshot).
SoftMembership update_alpha(const SoftMembership& alpha_t, const Theta1& theta1, std::span<const double> pi,
                            const Graph& g, const AlphaUpdateOptions& options = {});

/// Column means of alpha.
std::vector<double> update_pi(const SoftMembership& alpha);

struct Theta1Update {
  Theta1 theta1;
  std::vector<std::string> warnings;
};

/// argmax over theta_1 of the lower bound for fixed alpha. Coordinates whose
/// weighted cell is empty or completely separated are clamped to +-cap
/// (tied: 10 / log n; untied: 10 on the natural scale) with a warning; cells
/// with no weighted dyads keep the value from `previous` (or 0).
Theta1Update update_theta1(const SoftMembership& alpha, const Graph& g, SbmMode mode,
                           const Theta1* previous = nullptr);

/// Random: uniform rows. DegreeQuantile: half the mass on a degree-rank
/// group. Clustered: a hard partition from seed_partition (see seeding.hpp),
/// mixed with the uniform row by init_smoothing.
enum class WarmStart { Random, DegreeQuantile, Clustered };

struct Step1Config {
  int num_blocks = 1;
  double gamma = 1e-6;
  std::size_t max_iters = 500;
  double qp_tol = 1e-10;
  int num_restarts = 5;
  std::uint64_t seed = 1;
  SbmMode mode = SbmMode::Tied;
  WarmStart warm_start = WarmStart::Clustered;
  double init_threshold = 0.1;  // label-propagation density penalty (Clustered)
  double init_smoothing = 0.0;  // weight of the uniform row mixed into a Clustered start
  std::size_t init_random_starts = 20;  // refined random partitions competing with the propagated one
  double alpha_floor = 1e-6;
  int workers = 1;
  bool record_iterates = false;

  void validate() const;
};

struct Step1Iterate {
  Theta1 theta1;
  std::vector<double> pi;
};

struct Step1Result {
  SoftMembership alpha;
  Membership z_hat;
  std::vector<double> pi;
  Theta1 theta1;
  std::vector<double> trace;            // lower bound after init and after every iteration
  std::vector<Step1Iterate> iterates;   // aligned with trace when record_iterates is set
  std::size_t iterations = 0;
  bool converged = false;
  int best_restart = 0;
  std::vector<double> restart_bounds;   // final lower bound of every restart
  std::vector<int> empty_blocks;        // blocks with no node after hardening
  std::vector<std::string> warnings;
  double seconds = 0.0;
};

/// Step 1: MM variational estimation of (alpha, pi, theta_1) with restarts,
/// then hardening by row-wise argmax (lowest index on ties).
Step1Result run_step1(const Graph& g, const Step1Config& cfg);

}  // namespace lergm
