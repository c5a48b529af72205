#pragma once

// Independent reference computations for the test suites. Everything here is
// written from the definitions with dense matrices and brute-force loops and
// shares no code with the library beyond the Graph/Membership containers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lergm/graph.hpp"
#include "lergm/rng.hpp"

namespace oracle {

using lergm::Edge;
using lergm::Graph;
using lergm::Membership;
using lergm::NodeId;
using lergm::SoftMembership;

using Dense = std::vector<std::vector<int>>;

inline Dense dense(const Graph& g) {
  const std::size_t n = g.num_nodes();
  Dense a(n, std::vector<int>(n, 0));
  for (const auto& e : g.edges()) a[e.u][e.v] = a[e.v][e.u] = 1;
  return a;
}

inline Graph random_graph(std::size_t n, double p, lergm::Rng& rng) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < p) edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
    }
  }
  return Graph(n, std::move(edges));
}

inline Membership random_membership(std::size_t n, int k, lergm::Rng& rng) {
  std::vector<int> z(n);
  for (auto& x : z) x = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  return Membership(std::move(z), k);
}

inline Graph planted_sbm(const Membership& z, double p_in, double p_out, lergm::Rng& rng) {
  std::vector<Edge> edges;
  const std::size_t n = z.num_nodes();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = z.block(static_cast<NodeId>(i)) == z.block(static_cast<NodeId>(j)) ? p_in : p_out;
      if (rng.uniform() < p) edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
    }
  }
  return Graph(n, std::move(edges));
}

inline SoftMembership random_soft(std::size_t n, int k, double floor, lergm::Rng& rng) {
  SoftMembership a(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    std::vector<double> r(k);
    for (auto& v : r) {
      v = -std::log(rng.uniform_open());
      total += v;
    }
    for (int c = 0; c < k; ++c) a(i, c) = floor + (1.0 - k * floor) * r[c] / total;
  }
  return a;
}

// Within-block counts for one block under z: edges, transitive edges (edge
// whose endpoints share a partner in the block), degree histogram and
// edgewise shared-partner histogram.
struct BlockCounts {
  double edges = 0;
  double transitive = 0;
  std::vector<double> degree;  // degree[t] = nodes with within degree t
  std::vector<double> esp;     // esp[t] = within edges with t shared partners
};

inline BlockCounts block_counts(const Dense& a, const Membership& z, int k) {
  const std::size_t n = a.size();
  BlockCounts c;
  c.degree.assign(n + 1, 0);
  c.esp.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (z.block(i) != k) continue;
    int d = 0;
    for (std::size_t j = 0; j < n; ++j) d += j != i && z.block(j) == k && a[i][j];
    c.degree[d] += 1;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (z.block(j) != k || !a[i][j]) continue;
      c.edges += 1;
      int sp = 0;
      for (std::size_t h = 0; h < n; ++h) sp += h != i && h != j && z.block(h) == k && a[i][h] && a[j][h];
      c.esp[sp] += 1;
      if (sp > 0) c.transitive += 1;
    }
  }
  return c;
}

inline double between_count(const Dense& a, const Membership& z) {
  double b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) b += a[i][j] && z.block(i) != z.block(j);
  }
  return b;
}

inline double log1pexp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// Bernoulli log-probability of x under natural parameter eta.
inline double bern(int x, double eta) { return x * eta - log1pexp(eta); }

// Variational lower bound as the literal double sum over pairs i<j and
// block pairs (k, l), with a K x K natural-parameter table.
inline double lower_bound_direct(const SoftMembership& al, const std::vector<double>& eta, const std::vector<double>& pi,
                                 const Graph& g) {
  const Dense a = dense(g);
  const std::size_t n = g.num_nodes();
  const int k = al.num_blocks();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (int p = 0; p < k; ++p) {
        for (int q = 0; q < k; ++q) total += al(i, p) * al(j, q) * bern(a[i][j], eta[p * k + q]);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (int p = 0; p < k; ++p) {
      if (al(i, p) > 0) total += al(i, p) * (std::log(pi[p]) - std::log(al(i, p)));
    }
  }
  return total;
}

// Minorizer of the lower bound at alpha_t, written term by term from its
// definition: the pair products a_ik a_jl are bounded below by
//   -(a_ik^2 t_jl / t_ik + a_jl^2 t_ik / t_jl) / 2 for nonpositive weights,
// and -a log a by a (1 - log t - a/t) ... plus the exact pi term.
inline double minorizer_direct(const SoftMembership& al, const std::vector<double>& eta, const std::vector<double>& pi,
                               const SoftMembership& t, const Graph& g) {
  const Dense a = dense(g);
  const std::size_t n = g.num_nodes();
  const int k = al.num_blocks();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (int p = 0; p < k; ++p) {
        for (int q = 0; q < k; ++q) {
          const double w = bern(a[i][j], eta[p * k + q]);  // <= 0
          total += w * 0.5 *
                   (al(i, p) * al(i, p) * t(j, q) / t(i, p) + al(j, q) * al(j, q) * t(i, p) / t(j, q));
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (int p = 0; p < k; ++p) {
      total += al(i, p) * (std::log(pi[p]) - std::log(t(i, p)) + 1.0 - al(i, p) / t(i, p));
    }
  }
  return total;
}

// Observed-data SBM log-likelihood by enumerating all K^n memberships.
inline double sbm_observed_direct(const Graph& g, const std::vector<double>& eta, const std::vector<double>& pi) {
  const Dense a = dense(g);
  const std::size_t n = g.num_nodes();
  const int k = static_cast<int>(pi.size());
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= k;
  std::vector<int> z(n, 0);
  double mx = -INFINITY;
  std::vector<double> terms;
  terms.reserve(total);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = static_cast<int>(c % k);
      c /= k;
    }
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += std::log(pi[z[i]]);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) v += bern(a[i][j], eta[z[i] * k + z[j]]);
    }
    terms.push_back(v);
    mx = std::max(mx, v);
  }
  double s = 0.0;
  for (double v : terms) s += std::exp(v - mx);
  return mx + std::log(s);
}

inline double choose2(double m) { return m * (m - 1) / 2; }

}  // namespace oracle
