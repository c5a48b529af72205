#include "lergm/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "lergm/error.hpp"
#include "lergm/parallel.hpp"

namespace lergm {

namespace {

constexpr int kMaxEnumeratedDyads = 21;

std::size_t dyads(std::size_t m) { return m * (m - 1) / 2; }

struct VectorHash {
  std::size_t operator()(const std::vector<int>& v) const {
    std::size_t h = 1469598103934665603ULL;
    for (int x : v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ULL;
    return h;
  }
};

std::unique_ptr<StatSpectrum> enumerate_spectrum(std::size_t m, const ModelSpec& model) {
  const std::size_t d = dyads(m);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
  }
  std::unordered_map<std::vector<int>, std::uint64_t, VectorHash> counts;
  std::vector<int> key(model.within_dim());
  BlockAdjacency adj(m);
  const std::uint64_t total = std::uint64_t{1} << d;
  for (std::uint64_t index = 0; index < total; ++index) {
    for (std::size_t b = 0; b < d; ++b) adj.set(pairs[b].first, pairs[b].second, (index >> b) & 1U);
    const auto s = block_statistics(adj, model);
    for (std::size_t c = 0; c < s.size(); ++c) key[c] = static_cast<int>(s[c]);
    ++counts[key];
  }
  std::vector<std::pair<std::vector<int>, std::uint64_t>> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());
  auto spectrum = std::make_unique<StatSpectrum>();
  spectrum->block_size = m;
  for (const auto& [k, c] : sorted) {
    spectrum->stats.emplace_back(k.begin(), k.end());
    spectrum->log_counts.push_back(std::log(static_cast<double>(c)));
  }
  return spectrum;
}

void check_budget(std::size_t block_size, const EnumerationBudget& budget) {
  budget.validate();
  if (block_size > static_cast<std::size_t>(budget.max_within_nodes)) {
    throw BudgetExceeded("exact enumeration of a block with " + std::to_string(block_size) +
                             " nodes needs max_within_nodes >= " + std::to_string(block_size) + " (2^" +
                             std::to_string(dyads(block_size)) + " graphs)",
                         static_cast<int>(block_size));
  }
}

// Exponents log_count + <eta, s> for every spectrum entry, and their maximum.
std::vector<double> exponents(const StatSpectrum& sp, std::span<const double> eta, double& max_out) {
  std::vector<double> e(sp.stats.size());
  max_out = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < sp.stats.size(); ++g) {
    double v = sp.log_counts[g];
    for (std::size_t c = 0; c < eta.size(); ++c) v += eta[c] * sp.stats[g][c];
    e[g] = v;
    max_out = std::max(max_out, v);
  }
  return e;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) s += a[c] * b[c];
  return s;
}

double block_loglik(const Graph& block, const ModelSpec& m, std::span<const double> theta,
                    const EnumerationBudget& budget) {
  if (block.num_nodes() <= 1) return 0.0;
  check_budget(block.num_nodes(), budget);
  const auto eta = within_eta(theta, block.num_nodes(), m);
  const auto s = block_statistics(block, m);
  return dot(eta, s) - exact_log_normalizer(block.num_nodes(), eta, m, budget);
}

}  // namespace

void EnumerationBudget::validate() const {
  if (max_within_nodes < 1 || dyads(static_cast<std::size_t>(max_within_nodes)) > kMaxEnumeratedDyads) {
    throw ValidationError("enumeration budget must satisfy 2^(m choose 2) <= 2^21 (m <= 7)");
  }
}

const StatSpectrum& stat_spectrum(std::size_t block_size, const ModelSpec& m, const EnumerationBudget& budget) {
  check_budget(block_size, budget);
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, std::string>, std::unique_ptr<StatSpectrum>> cache;
  std::string key = m.term_list();
  for (const auto& t : m.terms()) key += ":" + std::to_string(t.truncation);
  std::lock_guard lock(mutex);
  auto& slot = cache[{block_size, key}];
  if (!slot) slot = enumerate_spectrum(block_size, m);
  return *slot;
}

ExactMoments exact_moments(std::size_t block_size, std::span<const double> within_eta, const ModelSpec& m,
                           const EnumerationBudget& budget) {
  if (within_eta.size() != m.within_dim()) throw ValidationError("within eta has the wrong length");
  const std::size_t w = m.within_dim();
  ExactMoments out;
  out.mean.assign(w, 0.0);
  out.covariance.assign(w * w, 0.0);
  if (block_size <= 1) return out;
  const auto& sp = stat_spectrum(block_size, m, budget);
  double mx = 0.0;
  const auto e = exponents(sp, within_eta, mx);
  double z = 0.0;
  for (std::size_t g = 0; g < e.size(); ++g) {
    const double p = std::exp(e[g] - mx);
    z += p;
    for (std::size_t a = 0; a < w; ++a) {
      out.mean[a] += p * sp.stats[g][a];
      for (std::size_t b = 0; b < w; ++b) out.covariance[a * w + b] += p * sp.stats[g][a] * sp.stats[g][b];
    }
  }
  out.log_normalizer = mx + std::log(z);
  for (auto& v : out.mean) v /= z;
  for (std::size_t a = 0; a < w; ++a) {
    for (std::size_t b = 0; b < w; ++b) {
      out.covariance[a * w + b] = out.covariance[a * w + b] / z - out.mean[a] * out.mean[b];
    }
  }
  return out;
}

double exact_log_normalizer(std::size_t block_size, std::span<const double> within_eta, const ModelSpec& m,
                            const EnumerationBudget& budget) {
  if (within_eta.size() != m.within_dim()) throw ValidationError("within eta has the wrong length");
  if (block_size <= 1) return 0.0;
  const auto& sp = stat_spectrum(block_size, m, budget);
  double mx = 0.0;
  const auto e = exponents(sp, within_eta, mx);
  double z = 0.0;
  for (double v : e) z += std::exp(v - mx);
  return mx + std::log(z);
}

StatVector exact_expected_stats(std::size_t block_size, std::span<const double> within_eta, const ModelSpec& m,
                                const EnumerationBudget& budget) {
  return exact_moments(block_size, within_eta, m, budget).mean;
}

double exact_loglik(const Graph& g, const Membership& z, const ModelSpec& m, std::span<const double> theta,
                    const EnumerationBudget& budget, int workers) {
  if (g.num_nodes() != z.num_nodes()) throw ValidationError("graph and membership sizes differ");
  validate_theta(theta, m);
  const auto sizes = neighborhood_sizes(z);
  for (auto s : sizes) {
    if (s > 1) check_budget(s, budget);
  }
  std::vector<double> per_block(z.num_blocks(), 0.0);
  parallel_for(per_block.size(), workers, [&](std::size_t k) {
    per_block[k] = block_loglik(within_subgraph(g, z, static_cast<int>(k)).graph, m, theta, budget);
  });
  double total = 0.0;
  for (double v : per_block) total += v;

  const std::size_t n = g.num_nodes();
  std::size_t within_pairs = 0;
  for (auto s : sizes) within_pairs += dyads(s);
  const double between_pairs = static_cast<double>(dyads(n) - within_pairs);
  const double eta_b = between_eta(theta, n, m);
  const double s_b = static_cast<double>(between_edge_count(g, z));
  total += s_b * eta_b - between_pairs * softplus(eta_b);
  return total;
}

double exact_deviation(const Graph& g, const Membership& z, const ModelSpec& m, std::span<const double> theta,
                       const EnumerationBudget& budget) {
  const auto reduced = zero_dependence_terms(theta, m);
  return exact_loglik(g, z, m, theta, budget) - exact_loglik(g, z, m, reduced, budget);
}

double exact_block_deviation(const Graph& block, const ModelSpec& m, std::span<const double> theta,
                             const EnumerationBudget& budget) {
  const auto reduced = zero_dependence_terms(theta, m);
  return block_loglik(block, m, theta, budget) - block_loglik(block, m, reduced, budget);
}

double exact_sbm_observed_loglik(const Graph& g, std::span<const double> pair_eta, std::span<const double> pi) {
  const std::size_t n = g.num_nodes();
  const std::size_t k = pi.size();
  if (k == 0 || pair_eta.size() != k * k) throw ValidationError("pair parameters do not match pi");
  const double states = std::pow(static_cast<double>(k), static_cast<double>(n));
  if (states > 16777216.0) {
    throw BudgetExceeded("membership enumeration over " + std::to_string(k) + "^" + std::to_string(n) +
                             " states exceeds 2^24",
                         static_cast<int>(n));
  }
  std::vector<double> softplus_eta(k * k);
  for (std::size_t c = 0; c < k * k; ++c) softplus_eta[c] = softplus(pair_eta[c]);
  std::vector<int> z(n, 0);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(states));
  for (;;) {
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += std::log(pi[z[i]]);
    if (std::isfinite(v)) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const std::size_t c = z[i] * k + z[j];
          v -= softplus_eta[c];
        }
      }
      for (const auto& e : g.edges()) v += pair_eta[z[e.u] * k + z[e.v]];
      terms.push_back(v);
    }
    std::size_t pos = 0;
    while (pos < n && ++z[pos] == static_cast<int>(k)) z[pos++] = 0;
    if (pos == n) break;
  }
  const double mx = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double v : terms) sum += std::exp(v - mx);
  return mx + std::log(sum);
}

std::size_t hamming_distance(const Graph& a, const Graph& b) {
  if (a.num_nodes() != b.num_nodes()) throw ValidationError("graphs have different node sets");
  const auto& ea = a.edges();
  const auto& eb = b.edges();
  std::vector<Edge> diff;
  std::set_symmetric_difference(ea.begin(), ea.end(), eb.begin(), eb.end(), std::back_inserter(diff));
  return diff.size();
}

}  // namespace lergm
