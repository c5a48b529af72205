#include "lergm/variational.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "lergm/error.hpp"
#include "lergm/model.hpp"
#include "lergm/parallel.hpp"
#include "lergm/rng.hpp"
#include "lergm/seeding.hpp"

namespace lergm {

namespace {

constexpr double kNaturalCap = 10.0;
constexpr std::size_t kChunk = 64;

// K x K block-pair table; tied tables are "diagonal + constant off-diagonal"
// and are applied in O(K).
struct PairTable {
  int k = 1;
  bool structured = false;
  double off = 0.0;
  std::vector<double> diag;
  std::vector<double> dense;

  double at(int a, int b) const {
    if (structured) return a == b ? diag[a] : off;
    return dense[static_cast<std::size_t>(a) * k + b];
  }

  // y = T x
  void apply(const double* x, double* y) const {
    if (structured) {
      double total = 0.0;
      for (int a = 0; a < k; ++a) total += x[a];
      for (int a = 0; a < k; ++a) y[a] = off * total + (diag[a] - off) * x[a];
      return;
    }
    for (int a = 0; a < k; ++a) {
      const double* r = &dense[static_cast<std::size_t>(a) * k];
      double s = 0.0;
      for (int b = 0; b < k; ++b) s += r[b] * x[b];
      y[a] = s;
    }
  }
};

PairTable eta_table(const Theta1& t) {
  PairTable p;
  p.k = t.num_blocks;
  if (t.mode == SbmMode::Tied) {
    p.structured = true;
    p.off = t.between * std::log(static_cast<double>(t.num_nodes));
    p.diag.resize(p.k);
    for (int a = 0; a < p.k; ++a) p.diag[a] = t.within * std::log(t.block_sizes[a]);
  } else {
    p.dense = t.pair;
  }
  return p;
}

PairTable softplus_table(const PairTable& h) {
  PairTable p = h;
  if (p.structured) {
    p.off = softplus(p.off);
    for (auto& v : p.diag) v = softplus(v);
  } else {
    for (auto& v : p.dense) v = softplus(v);
  }
  return p;
}

void check_theta1(const Theta1& t, const Graph& g) {
  if (t.num_nodes != g.num_nodes()) throw ValidationError("theta_1 was built for a different node count");
  if (t.num_blocks < 1) throw ValidationError("theta_1 needs at least one block");
  if (t.mode == SbmMode::Tied) {
    if (t.block_sizes.size() != static_cast<std::size_t>(t.num_blocks)) {
      throw ValidationError("tied theta_1 needs one soft size per block");
    }
  } else if (t.pair.size() != static_cast<std::size_t>(t.num_blocks) * t.num_blocks) {
    throw ValidationError("untied theta_1 needs a K x K matrix");
  }
}

void check_pi(std::span<const double> pi, int k) {
  if (pi.size() != static_cast<std::size_t>(k)) throw ValidationError("pi has the wrong length");
  double total = 0.0;
  for (double p : pi) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("pi has a negative or non-finite entry");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("pi does not sum to 1");
}

void check_floor(const SoftMembership& a, double floor) {
  const double limit = floor * (1.0 - 1e-9);
  for (double v : a.values()) {
    if (!(v > 0.0) || v < limit) throw ValidationError("alpha_t has an entry below the floor");
  }
}

std::vector<double> column_sums(const SoftMembership& a) {
  const int k = a.num_blocks();
  std::vector<double> s(k, 0.0);
  for (std::size_t i = 0; i < a.num_nodes(); ++i) {
    const auto r = a.row(i);
    for (int c = 0; c < k; ++c) s[c] += r[c];
  }
  return s;
}

void neighbor_sum(const SoftMembership& a, const Graph& g, NodeId i, double* out) {
  const int k = a.num_blocks();
  std::fill(out, out + k, 0.0);
  for (NodeId j : g.neighbors(i)) {
    const auto r = a.row(j);
    for (int c = 0; c < k; ++c) out[c] += r[c];
  }
}

// body(i, scratch) over all nodes, in fixed-size chunks.
template <typename Body>
void for_nodes(std::size_t n, int workers, std::size_t scratch, Body&& body) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_for(chunks, workers, [&](std::size_t c) {
    std::vector<double> buf(scratch);
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) body(static_cast<NodeId>(i), buf.data());
  });
}

double ordered_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double xlogy_ratio(double a, double log_pi) {
  if (a <= 0.0) return 0.0;
  return a * (log_pi - std::log(a));
}

}  // namespace

Theta1 Theta1::tied(double within, double between, std::vector<double> block_sizes, std::size_t num_nodes) {
  Theta1 t;
  t.mode = SbmMode::Tied;
  t.num_nodes = num_nodes;
  t.num_blocks = static_cast<int>(block_sizes.size());
  t.within = within;
  t.between = between;
  for (auto& s : block_sizes) s = std::max(2.0, s);
  t.block_sizes = std::move(block_sizes);
  return t;
}

Theta1 Theta1::untied(std::vector<double> pair, int num_blocks, std::size_t num_nodes) {
  if (pair.size() != static_cast<std::size_t>(num_blocks) * num_blocks) {
    throw ValidationError("untied theta_1 needs a K x K matrix");
  }
  Theta1 t;
  t.mode = SbmMode::Untied;
  t.num_nodes = num_nodes;
  t.num_blocks = num_blocks;
  t.pair = std::move(pair);
  return t;
}

double Theta1::eta(int k, int l) const { return eta_table(*this).at(k, l); }

std::vector<double> Theta1::pair_eta() const {
  const auto t = eta_table(*this);
  std::vector<double> out(static_cast<std::size_t>(num_blocks) * num_blocks);
  for (int a = 0; a < num_blocks; ++a) {
    for (int b = 0; b < num_blocks; ++b) out[static_cast<std::size_t>(a) * num_blocks + b] = t.at(a, b);
  }
  return out;
}

double lower_bound(const SoftMembership& alpha, const Theta1& theta1, std::span<const double> pi, const Graph& g,
                   int workers) {
  if (alpha.num_nodes() != g.num_nodes()) throw ValidationError("alpha and graph sizes differ");
  alpha.validate(1e-10);
  const int k = alpha.num_blocks();
  if (theta1.num_blocks != k) throw ValidationError("theta_1 and alpha disagree on K");
  check_theta1(theta1, g);
  check_pi(pi, k);
  const auto h = eta_table(theta1);
  const auto a = softplus_table(h);
  const auto s = column_sums(alpha);
  std::vector<double> log_pi(k);
  for (int c = 0; c < k; ++c) log_pi[c] = std::log(pi[c]);

  const std::size_t n = g.num_nodes();
  std::vector<double> per_node(n);
  for_nodes(n, workers, 3 * static_cast<std::size_t>(k), [&](NodeId i, double* buf) {
    double* v = buf;
    double* hv = buf + k;
    double* aa = buf + 2 * k;
    const auto r = alpha.row(i);
    neighbor_sum(alpha, g, i, v);
    h.apply(v, hv);
    a.apply(r.data(), aa);
    double val = 0.0;
    for (int c = 0; c < k; ++c) {
      val += 0.5 * r[c] * hv[c] + 0.5 * r[c] * aa[c] + xlogy_ratio(r[c], log_pi[c]);
    }
    per_node[i] = val;
  });
  std::vector<double> as(k);
  a.apply(s.data(), as.data());
  double sas = 0.0;
  for (int c = 0; c < k; ++c) sas += s[c] * as[c];
  return ordered_sum(per_node) - 0.5 * sas;
}

double minorizer_value(const SoftMembership& alpha, const Theta1& theta1, std::span<const double> pi_t,
                       const SoftMembership& alpha_t, const Graph& g, double floor, int workers) {
  if (alpha.num_nodes() != g.num_nodes() || alpha_t.num_nodes() != g.num_nodes()) {
    throw ValidationError("alpha and graph sizes differ");
  }
  const int k = alpha_t.num_blocks();
  if (alpha.num_blocks() != k || theta1.num_blocks != k) throw ValidationError("inputs disagree on K");
  alpha.validate(1e-10);
  alpha_t.validate(1e-10);
  check_floor(alpha_t, floor);
  check_theta1(theta1, g);
  check_pi(pi_t, k);
  const auto h = eta_table(theta1);
  const auto a = softplus_table(h);
  const auto s = column_sums(alpha_t);

  const std::size_t n = g.num_nodes();
  std::vector<double> per_node(n);
  for_nodes(n, workers, 4 * static_cast<std::size_t>(k), [&](NodeId i, double* buf) {
    double* v = buf;
    double* hv = buf + k;
    double* rest = buf + 2 * k;
    double* arest = buf + 3 * k;
    const auto rt = alpha_t.row(i);
    const auto r = alpha.row(i);
    neighbor_sum(alpha_t, g, i, v);
    h.apply(v, hv);
    for (int c = 0; c < k; ++c) rest[c] = s[c] - rt[c];
    a.apply(rest, arest);
    double val = 0.0;
    for (int c = 0; c < k; ++c) {
      const double b = hv[c] - arest[c];
      const double x = r[c];
      val += x * x * b / (2.0 * rt[c]) + x * (std::log(pi_t[c]) - std::log(rt[c]) + 1.0 - x / rt[c]);
    }
    per_node[i] = val;
  });
  return ordered_sum(per_node);
}

std::vector<double> solve_simplex_qp(std::span<const double> quad, std::span<const double> lin, double floor,
                                     double tol) {
  const std::size_t k = quad.size();
  if (k == 0 || lin.size() != k) throw ValidationError("QP coefficient vectors must be nonempty and equal length");
  if (!(floor >= 0.0) || floor * static_cast<double>(k) > 1.0) throw ValidationError("infeasible floor");
  for (double q : quad) {
    if (q > 0.0) throw NumericalError("positive quadratic coefficient in the alpha update (log p > 0?)");
    if (!std::isfinite(q)) throw NumericalError("non-finite quadratic coefficient in the alpha update");
  }
  std::vector<double> x(k, floor);
  if (k == 1) return {1.0};

  // x_k(lambda) = max(floor, (b_k - lambda) / c_k) with c_k = -2 a_k. Linear
  // coordinates (c_k = 0) sit at the floor unless lambda equals their b_k.
  std::vector<std::size_t> curved, linear;
  std::size_t pinned = 0;  // b_k = -inf: always at the floor
  for (std::size_t c = 0; c < k; ++c) {
    if (std::isinf(lin[c]) && lin[c] < 0) {
      ++pinned;
    } else if (std::isnan(lin[c]) || std::isinf(lin[c])) {
      throw NumericalError("non-finite linear coefficient in the alpha update");
    } else if (quad[c] < 0.0) {
      curved.push_back(c);
    } else {
      linear.push_back(c);
    }
  }
  if (curved.empty() && linear.empty()) throw NumericalError("every block has zero prior mass");
  auto curved_mass = [&](double lambda) {
    double m = 0.0;
    for (auto c : curved) m += std::max(floor, (lin[c] - lambda) / (-2.0 * quad[c]));
    return m;
  };
  const double budget = 1.0 - floor * static_cast<double>(pinned + linear.size());

  if (!linear.empty()) {
    std::size_t top = linear.front();
    for (auto c : linear) {
      if (lin[c] > lin[top]) top = c;
    }
    const double lambda = lin[top];
    const double m = curved_mass(lambda);
    if (m <= budget) {
      for (auto c : curved) x[c] = std::max(floor, (lin[c] - lambda) / (-2.0 * quad[c]));
      x[top] = floor + (budget - m);
      return x;
    }
  }

  // Water-filling over the curved coordinates: sort breakpoints descending,
  // grow the free set until the multiplier falls below the next breakpoint.
  std::vector<double> bp(k);
  for (auto c : curved) bp[c] = lin[c] + 2.0 * quad[c] * floor;
  std::sort(curved.begin(), curved.end(), [&](std::size_t p, std::size_t q) { return bp[p] > bp[q]; });
  const double remaining = budget;
  double sum_b = 0.0, sum_inv = 0.0;
  double lambda = 0.0;
  for (std::size_t j = 0; j < curved.size(); ++j) {
    const double ck = -2.0 * quad[curved[j]];
    sum_b += lin[curved[j]] / ck;
    sum_inv += 1.0 / ck;
    const double fixed = floor * static_cast<double>(curved.size() - j - 1);
    lambda = (sum_b + fixed - remaining) / sum_inv;
    const double next = j + 1 < curved.size() ? bp[curved[j + 1]] : -std::numeric_limits<double>::infinity();
    if (lambda >= next) break;
  }
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (quad[c] < 0.0 && !(std::isinf(lin[c]))) x[c] = std::max(floor, (lin[c] - lambda) / (-2.0 * quad[c]));
    total += x[c];
  }
  if (!std::isfinite(total) || std::abs(total - 1.0) > std::max(tol, 1e-12)) {
    throw NumericalError("simplex QP did not reach the equality constraint");
  }
  for (auto& v : x) v /= total;
  return x;
}

SoftMembership update_alpha(const SoftMembership& alpha_t, const Theta1& theta1, std::span<const double> pi,
                            const Graph& g, const AlphaUpdateOptions& options) {
  if (alpha_t.num_nodes() != g.num_nodes()) throw ValidationError("alpha and graph sizes differ");
  const int k = alpha_t.num_blocks();
  if (theta1.num_blocks != k) throw ValidationError("theta_1 and alpha disagree on K");
  alpha_t.validate(1e-10);
  check_theta1(theta1, g);
  check_pi(pi, k);
  if (k == 1) return alpha_t;
  check_floor(alpha_t, options.floor);
  const auto h = eta_table(theta1);
  const auto a = softplus_table(h);
  const auto s = column_sums(alpha_t);
  std::vector<double> log_pi(k);
  for (int c = 0; c < k; ++c) log_pi[c] = pi[c] > 0.0 ? std::log(pi[c]) : -std::numeric_limits<double>::infinity();

  const std::size_t n = g.num_nodes();
  SoftMembership next(n, k);
  for_nodes(n, options.workers, 6 * static_cast<std::size_t>(k), [&](NodeId i, double* buf) {
    double* v = buf;
    double* hv = buf + k;
    double* rest = buf + 2 * k;
    double* arest = buf + 3 * k;
    double* quad = buf + 4 * k;
    double* lin = buf + 5 * k;
    const auto rt = alpha_t.row(i);
    neighbor_sum(alpha_t, g, i, v);
    h.apply(v, hv);
    for (int c = 0; c < k; ++c) rest[c] = s[c] - rt[c];
    a.apply(rest, arest);
    for (int c = 0; c < k; ++c) {
      const double b = hv[c] - arest[c];
      quad[c] = b / (2.0 * rt[c]) - 1.0 / rt[c];
      lin[c] = log_pi[c] - std::log(rt[c]) + 1.0;
    }
    const auto row = solve_simplex_qp({quad, static_cast<std::size_t>(k)}, {lin, static_cast<std::size_t>(k)},
                                      options.floor, options.qp_tol);
    std::copy(row.begin(), row.end(), next.row(i).begin());
  });
  return next;
}

std::vector<double> update_pi(const SoftMembership& alpha) {
  alpha.validate(1e-10);
  auto s = column_sums(alpha);
  const double n = static_cast<double>(alpha.num_nodes());
  for (auto& v : s) v /= n;
  return s;
}

Theta1Update update_theta1(const SoftMembership& alpha, const Graph& g, SbmMode mode, const Theta1* previous) {
  const std::size_t n = g.num_nodes();
  if (n < 2) throw ValidationError("theta_1 needs at least two nodes");
  if (alpha.num_nodes() != n) throw ValidationError("alpha and graph sizes differ");
  alpha.validate(1e-10);
  const int k = alpha.num_blocks();
  const auto s = column_sums(alpha);

  // Weighted edge counts E (k,l) and dyad counts P (k,l), both symmetric.
  std::vector<double> e(static_cast<std::size_t>(k) * k, 0.0), p(e.size(), 0.0);
  std::vector<double> v(k);
  std::vector<double> self(e.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    neighbor_sum(alpha, g, static_cast<NodeId>(i), v.data());
    const auto r = alpha.row(i);
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        e[static_cast<std::size_t>(a) * k + b] += r[a] * v[b];
        self[static_cast<std::size_t>(a) * k + b] += r[a] * r[b];
      }
    }
  }
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const std::size_t c = static_cast<std::size_t>(a) * k + b;
      double pv = s[a] * s[b] - self[c];
      if (a == b) {
        pv *= 0.5;
        e[c] *= 0.5;
      }
      p[c] = std::max(0.0, pv);
    }
  }

  Theta1Update out;
  const double log_n = std::log(static_cast<double>(n));
  auto clamp_cell = [&](double edges, double pairs, double cap, double scale, double keep,
                        const std::string& what) {
    if (pairs <= 1e-12) return keep;
    if (edges <= 1e-12 * pairs) {
      out.warnings.push_back(what + ": no weighted edges, clamped to -cap");
      return -cap;
    }
    if (edges >= pairs * (1.0 - 1e-12)) {
      out.warnings.push_back(what + ": every weighted dyad is an edge, clamped to +cap");
      return cap;
    }
    const double raw = logit(edges / pairs) / scale;
    if (std::abs(raw) > cap) {
      out.warnings.push_back(what + ": estimate beyond cap, clamped");
      return std::clamp(raw, -cap, cap);
    }
    return raw;
  };

  if (mode == SbmMode::Untied) {
    std::vector<double> eta(e.size(), 0.0);
    for (int a = 0; a < k; ++a) {
      for (int b = a; b < k; ++b) {
        const std::size_t c = static_cast<std::size_t>(a) * k + b;
        const double keep =
            previous && previous->mode == SbmMode::Untied && previous->num_blocks == k ? previous->pair[c] : 0.0;
        const double val = clamp_cell(e[c], p[c], kNaturalCap, 1.0, keep,
                                      "block pair (" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ")");
        eta[c] = val;
        eta[static_cast<std::size_t>(b) * k + a] = val;
      }
    }
    out.theta1 = Theta1::untied(std::move(eta), k, n);
    return out;
  }

  const double cap = kNaturalCap / log_n;
  const bool prev_tied = previous && previous->mode == SbmMode::Tied && previous->num_blocks == k;
  double e_within = 0.0, p_within = 0.0;
  for (int a = 0; a < k; ++a) {
    e_within += e[static_cast<std::size_t>(a) * k + a];
    p_within += p[static_cast<std::size_t>(a) * k + a];
  }
  const double all_pairs = static_cast<double>(n) * (n - 1) / 2.0;
  const double e_between = std::max(0.0, static_cast<double>(g.num_edges()) - e_within);
  const double p_between = std::max(0.0, all_pairs - p_within);
  const double between =
      clamp_cell(e_between, p_between, cap, log_n, prev_tied ? previous->between : 0.0, "between");

  std::vector<double> sizes(k), scale(k);
  for (int a = 0; a < k; ++a) {
    sizes[a] = std::max(2.0, s[a]);
    scale[a] = std::log(sizes[a]);
  }
  double within = prev_tied ? previous->within : 0.0;
  if (p_within > 1e-12) {
    auto score = [&](double t) {
      double g1 = 0.0, g2 = 0.0;
      for (int a = 0; a < k; ++a) {
        const std::size_t c = static_cast<std::size_t>(a) * k + a;
        const double q = logistic(scale[a] * t);
        g1 += scale[a] * (e[c] - p[c] * q);
        g2 -= scale[a] * scale[a] * p[c] * q * (1.0 - q);
      }
      return std::pair{g1, g2};
    };
    double lo = -cap, hi = cap;
    if (score(lo).first <= 0.0) {
      out.warnings.push_back("within: no weighted edges, clamped to -cap");
      within = lo;
    } else if (score(hi).first >= 0.0) {
      out.warnings.push_back("within: every weighted dyad is an edge, clamped to +cap");
      within = hi;
    } else {
      // Safeguarded Newton on a concave objective; falls back to bisection.
      double t = std::clamp(within, lo, hi);
      for (int it = 0; it < 200; ++it) {
        const auto [g1, g2] = score(t);
        if (std::abs(g1) < 1e-8) break;
        if (g1 > 0.0) lo = t; else hi = t;
        double step = g2 < 0.0 ? t - g1 / g2 : 0.5 * (lo + hi);
        if (!(step > lo && step < hi)) step = 0.5 * (lo + hi);
        if (hi - lo < 1e-15) break;
        t = step;
      }
      within = t;
    }
  }
  out.theta1 = Theta1::tied(within, between, std::move(sizes), n);
  return out;
}

void Step1Config::validate() const {
  if (num_blocks < 1) throw ValidationError("step1: K must be >= 1");
  if (!(gamma > 0.0)) throw ValidationError("step1: gamma must be > 0");
  if (max_iters < 1) throw ValidationError("step1: max_iters must be >= 1");
  if (!(qp_tol > 0.0)) throw ValidationError("step1: qp_tol must be > 0");
  if (num_restarts < 1) throw ValidationError("step1: num_restarts must be >= 1");
  if (!(alpha_floor > 0.0) || alpha_floor * num_blocks >= 1.0) {
    throw ValidationError("step1: alpha floor must be in (0, 1/K)");
  }
  if (workers < 1) throw ValidationError("step1: workers must be >= 1");
  if (!(init_threshold > 0.0)) throw ValidationError("step1: init threshold must be > 0");
  if (!(init_smoothing >= 0.0 && init_smoothing <= 1.0)) throw ValidationError("step1: init smoothing must be in [0, 1]");
}

namespace {

SoftMembership initial_alpha(const Graph& g, const Step1Config& cfg, int restart) {
  const std::size_t n = g.num_nodes();
  const int k = cfg.num_blocks;
  Rng rng(derive_seed(cfg.seed, {tag("step1-init"), static_cast<std::uint64_t>(restart)}));
  std::vector<double> values(n * k);
  for (auto& v : values) v = rng.uniform_open();
  if (cfg.warm_start == WarmStart::Clustered && k > 1) {
    const auto z = seed_partition(g, k, cfg.init_threshold, cfg.init_random_starts, rng.next());
    const double s = cfg.init_smoothing;
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < k; ++c) values[i * k + c] = (1.0 - s) * (z[i] == c ? 1.0 : 0.0) + s / k;
    }
  }
  if (cfg.warm_start == WarmStart::DegreeQuantile) {
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return g.degree(a) < g.degree(b); });
    for (std::size_t rank = 0; rank < n; ++rank) {
      const std::size_t group = rank * static_cast<std::size_t>(k) / n;
      double* r = &values[order[rank] * k];
      double total = 0.0;
      for (int c = 0; c < k; ++c) total += r[c];
      for (int c = 0; c < k; ++c) r[c] = 0.5 * r[c] / total + (static_cast<std::size_t>(c) == group ? 0.5 : 0.0);
    }
  }
  const double spread = 1.0 - k * cfg.alpha_floor;
  for (std::size_t i = 0; i < n; ++i) {
    double* r = &values[i * k];
    double total = 0.0;
    for (int c = 0; c < k; ++c) total += r[c];
    for (int c = 0; c < k; ++c) r[c] = cfg.alpha_floor + spread * r[c] / total;
  }
  return SoftMembership(n, k, std::move(values));
}

struct RestartRun {
  SoftMembership alpha;
  std::vector<double> pi;
  Theta1 theta1;
  std::vector<double> trace;
  std::vector<Step1Iterate> iterates;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

RestartRun run_restart(const Graph& g, const Step1Config& cfg, int restart, int workers) {
  RestartRun run;
  run.alpha = initial_alpha(g, cfg, restart);
  run.pi = update_pi(run.alpha);
  auto upd = update_theta1(run.alpha, g, cfg.mode);
  run.theta1 = upd.theta1;
  run.warnings = upd.warnings;
  double bound = lower_bound(run.alpha, run.theta1, run.pi, g, workers);
  run.trace.push_back(bound);
  if (cfg.record_iterates) run.iterates.push_back({run.theta1, run.pi});

  const AlphaUpdateOptions opts{cfg.qp_tol, cfg.alpha_floor, workers};
  for (std::size_t t = 0; t < cfg.max_iters; ++t) {
    run.alpha = update_alpha(run.alpha, run.theta1, run.pi, g, opts);
    run.pi = update_pi(run.alpha);
    upd = update_theta1(run.alpha, g, cfg.mode, &run.theta1);
    double next = lower_bound(run.alpha, upd.theta1, run.pi, g, workers);
    if (cfg.mode == SbmMode::Tied) {
      // The candidate refits soft sizes too; keep the old within part when that scores higher.
      Theta1 keep = run.theta1;
      keep.between = upd.theta1.between;
      const double kept = lower_bound(run.alpha, keep, run.pi, g, workers);
      if (kept > next) {
        upd.theta1 = keep;
        next = kept;
      }
    }
    run.theta1 = upd.theta1;
    run.warnings = upd.warnings;
    run.trace.push_back(next);
    if (cfg.record_iterates) run.iterates.push_back({run.theta1, run.pi});
    run.iterations = t + 1;
    if (!std::isfinite(next)) throw NumericalError("step1: lower bound became non-finite");
    if (std::abs(next - bound) <= cfg.gamma * std::abs(next)) {
      run.converged = true;
      break;
    }
    bound = next;
  }
  return run;
}

}  // namespace

Step1Result run_step1(const Graph& g, const Step1Config& cfg) {
  cfg.validate();
  if (g.num_nodes() < 2) throw ValidationError("step1: graph needs at least two nodes");
  const auto start = std::chrono::steady_clock::now();
  const int restarts = cfg.num_restarts;
  const int outer = std::min(cfg.workers, restarts);
  const int inner = std::max(1, cfg.workers / std::max(1, outer));
  std::vector<RestartRun> runs(restarts);
  parallel_for(runs.size(), outer,
               [&](std::size_t r) { runs[r] = run_restart(g, cfg, static_cast<int>(r), inner); });

  Step1Result out;
  int best = 0;
  for (int r = 0; r < restarts; ++r) {
    out.restart_bounds.push_back(runs[r].trace.back());
    if (runs[r].trace.back() > runs[best].trace.back()) best = r;
  }
  auto& run = runs[best];
  out.best_restart = best;
  out.alpha = std::move(run.alpha);
  out.pi = std::move(run.pi);
  out.theta1 = std::move(run.theta1);
  out.trace = std::move(run.trace);
  out.iterates = std::move(run.iterates);
  out.iterations = run.iterations;
  out.converged = run.converged;
  out.warnings = std::move(run.warnings);
  out.z_hat = out.alpha.harden();
  const auto sizes = neighborhood_sizes(out.z_hat);
  for (int k = 0; k < cfg.num_blocks; ++k) {
    if (sizes[k] == 0) out.empty_blocks.push_back(k);
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace lergm
