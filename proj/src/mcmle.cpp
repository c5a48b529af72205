#include "lergm/mcmle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "lergm/error.hpp"
#include "lergm/parallel.hpp"
#include "lergm/rng.hpp"
#include "lergm/variational.hpp"

namespace lergm {

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct BlockTerm {
  double value = 0.0;
  double ess = 1.0;
  std::vector<double> grad;
  std::vector<double> hess;
};

BlockTerm block_term(std::span<const double> theta, std::span<const double> theta0, std::size_t size,
                     std::span<const double> obs, const BlockSamples& samples, const ModelSpec& m,
                     bool derivatives) {
  const std::size_t w = m.within_dim();
  const std::size_t d = m.theta_dim();
  const auto eta = within_eta(theta, size, m);
  const auto eta0 = within_eta(theta0, size, m);
  std::vector<double> delta(w);
  for (std::size_t c = 0; c < w; ++c) delta[c] = eta[c] - eta0[c];

  const std::size_t count = samples.count();
  std::vector<double> logw(count);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < count; ++s) {
    const auto x = samples.sample(s);
    double v = 0.0;
    for (std::size_t c = 0; c < w; ++c) v += delta[c] * x[c];
    logw[s] = v;
    mx = std::max(mx, v);
  }
  double sum_w = 0.0, sum_w2 = 0.0;
  for (auto& v : logw) {
    v = std::exp(v - mx);
    sum_w += v;
    sum_w2 += v * v;
  }
  BlockTerm out;
  double inner = 0.0;
  for (std::size_t c = 0; c < w; ++c) inner += delta[c] * obs[c];
  out.value = inner - (mx + std::log(sum_w / static_cast<double>(count)));
  out.ess = sum_w * sum_w / (static_cast<double>(count) * sum_w2);
  if (!derivatives) return out;

  std::vector<double> mean(w, 0.0);
  for (std::size_t s = 0; s < count; ++s) {
    const auto x = samples.sample(s);
    for (std::size_t c = 0; c < w; ++c) mean[c] += logw[s] * x[c];
  }
  for (auto& v : mean) v /= sum_w;
  Matrix cov = Matrix::Zero(w, w);
  Vector dev(w);
  for (std::size_t s = 0; s < count; ++s) {
    const auto x = samples.sample(s);
    for (std::size_t c = 0; c < w; ++c) dev[c] = x[c] - mean[c];
    cov.noalias() += (logw[s] / sum_w) * dev * dev.transpose();
  }
  const auto jac = within_jacobian(theta, size, m);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> j(jac.data(), w,
                                                                                                   d);
  Vector resid(w);
  for (std::size_t c = 0; c < w; ++c) resid[c] = obs[c] - mean[c];
  const Vector grad = j.transpose() * resid;
  const Matrix hess = -(j.transpose() * cov * j);
  out.grad.assign(grad.data(), grad.data() + d);
  out.hess.resize(d * d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) out.hess[a * d + b] = hess(a, b);
  }
  return out;
}

std::vector<double> default_theta0(const Graph& g, const Membership& z, const ModelSpec& m) {
  std::vector<double> theta(m.theta_dim(), 0.0);
  const auto fit = update_theta1(SoftMembership::from_hard(z), g, SbmMode::Tied).theta1;
  for (std::size_t t = 0; t < m.terms().size(); ++t) {
    if (m.terms()[t].kind == TermKind::WithinEdges) theta[m.theta_offset(t)] = fit.within;
  }
  theta[m.between_theta_index()] = fit.between;
  return theta;
}

double inf_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) d = std::max(d, std::abs(a[c] - b[c]));
  return d;
}

}  // namespace

double between_dyads(const Membership& z) {
  const double n = static_cast<double>(z.num_nodes());
  double within = 0.0;
  for (auto s : neighborhood_sizes(z)) within += static_cast<double>(s) * (static_cast<double>(s) - 1.0) / 2.0;
  return n * (n - 1.0) / 2.0 - within;
}

void check_batch_layout(const StatVector& observed, const SampleBatch& batch, const Membership& z,
                        const ModelSpec& m) {
  if (!(batch.z == z)) throw ValidationError("sample batch was drawn under a different membership");
  if (observed.size() != m.stat_dim(z.num_blocks())) throw ValidationError("observed statistics layout mismatch");
  if (batch.theta0.size() != m.theta_dim()) throw ValidationError("batch theta0 has the wrong length");
  if (batch.blocks.size() != static_cast<std::size_t>(z.num_blocks())) {
    throw ValidationError("sample batch has the wrong number of blocks");
  }
  const auto sizes = neighborhood_sizes(z);
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] < 2) continue;
    if (batch.blocks[k].dim != m.within_dim() || batch.blocks[k].count() == 0) {
      throw ValidationError("sample batch block " + std::to_string(k + 1) + " does not match the model");
    }
  }
}

McObjective mc_objective(std::span<const double> theta, const StatVector& observed, const SampleBatch& batch,
                         const ModelSpec& m, bool derivatives, int workers) {
  validate_theta(theta, m);
  const Membership& z = batch.z;
  check_batch_layout(observed, batch, z, m);
  const std::size_t w = m.within_dim();
  const std::size_t d = m.theta_dim();
  const auto sizes = neighborhood_sizes(z);
  std::vector<BlockTerm> terms(sizes.size());
  parallel_for(sizes.size(), workers, [&](std::size_t k) {
    if (sizes[k] < 2) return;
    terms[k] = block_term(theta, batch.theta0, sizes[k], {observed.data() + k * w, w}, batch.blocks[k], m,
                          derivatives);
  });

  McObjective out;
  out.block_values.assign(sizes.size(), 0.0);
  if (derivatives) {
    out.gradient.assign(d, 0.0);
    out.hessian.assign(d * d, 0.0);
  }
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] < 2) continue;
    out.block_values[k] = terms[k].value;
    out.value += terms[k].value;
    out.min_ess_fraction = std::min(out.min_ess_fraction, terms[k].ess);
    if (derivatives) {
      for (std::size_t a = 0; a < d; ++a) out.gradient[a] += terms[k].grad[a];
      for (std::size_t a = 0; a < d * d; ++a) out.hessian[a] += terms[k].hess[a];
    }
  }

  const std::size_t n = z.num_nodes();
  const double nb = between_dyads(z);
  const double sb = observed.back();
  const double eb = between_eta(theta, n, m);
  const double eb0 = between_eta(batch.theta0, n, m);
  out.between_value = sb * (eb - eb0) - nb * (softplus(eb) - softplus(eb0));
  out.value += out.between_value;
  if (derivatives && n > 1) {
    const std::size_t b = m.between_theta_index();
    const double log_n = std::log(static_cast<double>(n));
    const double p = logistic(eb);
    out.gradient[b] += log_n * (sb - nb * p);
    out.hessian[b * d + b] -= log_n * log_n * nb * p * (1.0 - p);
  }
  return out;
}

double mc_loglik_ratio(std::span<const double> theta, std::span<const double> theta0, const StatVector& observed,
                       const SampleBatch& batch, const Membership& z, const ModelSpec& m) {
  check_batch_layout(observed, batch, z, m);
  if (theta0.size() != batch.theta0.size() || !std::equal(theta0.begin(), theta0.end(), batch.theta0.begin())) {
    throw ValidationError("theta0 differs from the parameter the batch was drawn at");
  }
  return mc_objective(theta, observed, batch, m, false).value;
}

void Step2Config::validate() const {
  mcmc.validate();
  if (!(trust_radius > 0.0)) throw ValidationError("step2: trust_radius must be > 0");
  if (!(tol > 0.0)) throw ValidationError("step2: tol must be > 0");
  if (max_outer_iters < 1) throw ValidationError("step2: max_outer_iters must be >= 1");
  if (!(min_ess_fraction >= 0.0 && min_ess_fraction < 1.0)) {
    throw ValidationError("step2: min_ess_fraction must be in [0, 1)");
  }
  if (workers < 1) throw ValidationError("step2: workers must be >= 1");
}

std::vector<double> fisher_information(std::span<const double> theta, const SampleBatch& batch, const ModelSpec& m) {
  validate_theta(theta, m);
  const Membership& z = batch.z;
  const std::size_t w = m.within_dim();
  const std::size_t d = m.theta_dim();
  const auto sizes = neighborhood_sizes(z);
  Matrix info = Matrix::Zero(d, d);
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] < 2) continue;
    const auto& bs = batch.blocks[k];
    const std::size_t count = bs.count();
    if (count < 2) throw ValidationError("Fisher information needs at least two samples per block");
    Vector mean = Vector::Zero(w);
    for (std::size_t s = 0; s < count; ++s) {
      mean += Eigen::Map<const Vector>(bs.sample(s).data(), w);
    }
    mean /= static_cast<double>(count);
    Matrix cov = Matrix::Zero(w, w);
    for (std::size_t s = 0; s < count; ++s) {
      const Vector dev = Eigen::Map<const Vector>(bs.sample(s).data(), w) - mean;
      cov.noalias() += dev * dev.transpose();
    }
    cov /= static_cast<double>(count - 1);
    const auto jac = within_jacobian(theta, sizes[k], m);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> j(jac.data(), w,
                                                                                                     d);
    info.noalias() += j.transpose() * cov * j;
  }
  const std::size_t n = z.num_nodes();
  if (n > 1) {
    const std::size_t b = m.between_theta_index();
    const double log_n = std::log(static_cast<double>(n));
    const double p = logistic(between_eta(theta, n, m));
    info(b, b) += log_n * log_n * between_dyads(z) * p * (1.0 - p);
  }
  std::vector<double> out(d * d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t c = 0; c < d; ++c) out[a * d + c] = 0.5 * (info(a, c) + info(c, a));
  }
  return out;
}

StandardErrors standard_errors(std::span<const double> fisher, std::size_t dim) {
  if (fisher.size() != dim * dim) throw ValidationError("Fisher matrix has the wrong size");
  Matrix f(dim, dim);
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = 0; b < dim; ++b) f(a, b) = fisher[a * dim + b];
  }
  if (!f.allFinite()) throw NumericalError("Fisher matrix has non-finite entries");
  const double scale = std::max(1.0, f.cwiseAbs().maxCoeff());
  if ((f - f.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw ValidationError("Fisher matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (f + f.transpose()));
  if (eig.info() != Eigen::Success) throw NumericalError("eigen-decomposition of the Fisher matrix failed");
  const Vector& lambda = eig.eigenvalues();
  const Matrix& vec = eig.eigenvectors();
  const double top = dim ? std::max(0.0, lambda.maxCoeff()) : 0.0;
  if (dim && lambda.minCoeff() < -1e-8 * std::max(1.0, top)) {
    throw ValidationError("Fisher matrix is not positive semidefinite");
  }
  const double cut = 1e-10 * std::max(top, std::numeric_limits<double>::min());
  StandardErrors out;
  out.se.assign(dim, 0.0);
  out.rank_deficient.assign(dim, false);
  for (std::size_t j = 0; j < dim; ++j) {
    double var = 0.0, null_weight = 0.0;
    for (std::size_t e = 0; e < dim; ++e) {
      const double v2 = vec(j, e) * vec(j, e);
      if (lambda[e] > cut) {
        var += v2 / lambda[e];
      } else {
        null_weight += v2;
      }
    }
    if (var < 0.0 || !std::isfinite(var)) throw NumericalError("negative variance after inversion");
    out.se[j] = std::sqrt(var);
    out.rank_deficient[j] = null_weight > 1e-8;
  }
  return out;
}

Step2Result run_step2(const Graph& g, const Membership& z, const ModelSpec& m, const Step2Config& cfg) {
  cfg.validate();
  if (g.num_nodes() != z.num_nodes()) throw ValidationError("graph and membership sizes differ");
  if (g.num_nodes() < 2) throw ValidationError("step2: graph needs at least two nodes");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t d = m.theta_dim();
  const std::size_t bidx = m.between_theta_index();
  const std::size_t n = g.num_nodes();
  const double log_n = std::log(static_cast<double>(n));
  const auto observed = sufficient_statistics(g, z, m);

  Step2Result out;
  std::vector<double> theta0 = cfg.theta0.empty() ? default_theta0(g, z, m) : cfg.theta0;
  validate_theta(theta0, m);
  out.block_seconds.assign(z.num_blocks(), 0.0);

  // Between coordinate: exact Bernoulli MLE, outside the trust region.
  const double nb = between_dyads(z);
  const double sb = observed.back();
  const double cap = 10.0 / log_n;
  if (nb <= 0.0) {
    out.warnings.push_back("no between-block dyads; between parameter left at its starting value");
  } else if (sb <= 0.0) {
    out.warnings.push_back("no between-block edges; between parameter clamped to -cap");
    theta0[bidx] = -cap;
  } else if (sb >= nb) {
    out.warnings.push_back("every between-block dyad is an edge; between parameter clamped to +cap");
    theta0[bidx] = cap;
  } else {
    theta0[bidx] = logit(sb / nb) / log_n;
  }

  const auto sizes = neighborhood_sizes(z);
  const bool any_within = std::any_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s >= 2; });
  bool ess_limited = false;

  for (std::size_t it = 0; it < cfg.max_outer_iters && any_within; ++it) {
    out.theta_trace.push_back(theta0);
    McmcConfig mc = cfg.mcmc;
    mc.seed = derive_seed(cfg.seed, {tag("step2-batch"), it});
    const auto batch = draw_sample_batch(z, m, theta0, mc, &g, cfg.workers);
    for (std::size_t k = 0; k < batch.blocks.size(); ++k) out.block_seconds[k] += batch.blocks[k].seconds;

    std::vector<double> theta = theta0;
    std::vector<double> lo(d), hi(d);
    for (std::size_t c = 0; c < d; ++c) {
      lo[c] = theta0[c] - cfg.trust_radius;
      hi[c] = theta0[c] + cfg.trust_radius;
    }
    auto obj = mc_objective(theta, observed, batch, m, true, cfg.workers);
    for (int inner = 0; inner < 100; ++inner) {
      std::vector<std::size_t> free;
      for (std::size_t c = 0; c < d; ++c) {
        if (c == bidx) continue;
        const double gc = obj.gradient[c];
        if ((theta[c] <= lo[c] && gc < 0.0) || (theta[c] >= hi[c] && gc > 0.0)) continue;
        free.push_back(c);
      }
      double gmax = 0.0;
      for (auto c : free) gmax = std::max(gmax, std::abs(obj.gradient[c]));
      if (free.empty() || gmax < 1e-9) break;

      const std::size_t f = free.size();
      Matrix neg_h(f, f);
      Vector grad(f);
      for (std::size_t a = 0; a < f; ++a) {
        grad[a] = obj.gradient[free[a]];
        for (std::size_t b = 0; b < f; ++b) neg_h(a, b) = -obj.hessian[free[a] * d + free[b]];
      }
      Eigen::SelfAdjointEigenSolver<Matrix> eig(neg_h);
      Vector lambda = eig.eigenvalues();
      const double floor = 1e-8 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
      for (Eigen::Index e = 0; e < lambda.size(); ++e) lambda[e] = std::max(lambda[e], floor);
      const Vector step = eig.eigenvectors() * (eig.eigenvectors().transpose() * grad).cwiseQuotient(lambda);

      double t = 1.0;
      bool accepted = false;
      std::vector<double> cand = theta;
      for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
        cand = theta;
        for (std::size_t a = 0; a < f; ++a) {
          const std::size_t c = free[a];
          cand[c] = std::clamp(theta[c] + t * step[a], lo[c], hi[c]);
        }
        double gain = 0.0;
        for (std::size_t c = 0; c < d; ++c) gain += obj.gradient[c] * (cand[c] - theta[c]);
        const auto trial = mc_objective(cand, observed, batch, m, false, cfg.workers);
        if (!std::isfinite(trial.value)) continue;
        if (trial.min_ess_fraction < cfg.min_ess_fraction) {
          ess_limited = true;
          continue;
        }
        if (trial.value >= obj.value + 1e-4 * gain) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      const double moved = inf_distance(cand, theta);
      theta = cand;
      obj = mc_objective(theta, observed, batch, m, true, cfg.workers);
      if (moved < 1e-10) break;
    }
    if (!std::isfinite(obj.value)) throw NumericalError("step2: objective is non-finite at the accepted point");
    out.ess_trace.push_back(obj.min_ess_fraction);
    const double moved = inf_distance(theta, theta0);
    theta0 = theta;
    out.outer_iterations = it + 1;
    if (moved < cfg.tol) {
      out.converged = true;
      break;
    }
  }
  if (!any_within) out.converged = true;
  if (!out.converged) {
    out.warnings.push_back("step2 stopped after " + std::to_string(cfg.max_outer_iters) +
                           " outer iterations without meeting the tolerance");
  }
  if (ess_limited) out.warnings.push_back("some trial steps were rejected for low effective sample size");
  out.theta_hat = theta0;
  out.theta_trace.push_back(theta0);

  McmcConfig mc = cfg.mcmc;
  mc.seed = derive_seed(cfg.seed, {tag("step2-fisher")});
  const auto fresh = draw_sample_batch(z, m, out.theta_hat, mc, &g, cfg.workers);
  for (std::size_t k = 0; k < fresh.blocks.size(); ++k) out.block_seconds[k] += fresh.blocks[k].seconds;
  out.fisher = fisher_information(out.theta_hat, fresh, m);
  const auto se = standard_errors(out.fisher, d);
  out.standard_errors = se.se;
  out.rank_deficient = se.rank_deficient;
  for (std::size_t c = 0; c < d; ++c) {
    if (se.rank_deficient[c]) {
      out.warnings.push_back("Fisher information is rank deficient along " + m.theta_names()[c]);
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace lergm
