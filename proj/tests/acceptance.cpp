// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "helpers.hpp"
#include "json.hpp"
#include "lergm/cli.hpp"
#include "lergm/evaluation.hpp"
#include "lergm/exact.hpp"
#include "lergm/mcmle.hpp"
#include "lergm/pipeline.hpp"
#include "lergm/sampler.hpp"
#include "lergm/variational.hpp"

using namespace lergm;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("CRITERION %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

int workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 4u));
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

std::vector<double> random_pi(int k, Rng& rng) {
  std::vector<double> pi(k);
  double s = 0;
  for (auto& p : pi) s += (p = 0.05 + rng.uniform());
  for (auto& p : pi) p /= s;
  return pi;
}

// ---- 1 ----
void minorization() {
  const auto t0 = Clock::now();
  Rng rng(1001);
  const double floor = 1e-6;
  double worst_gap = -INFINITY, worst_touch = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 2 + rng.below(14);
    const int k = 1 + static_cast<int>(rng.below(4));
    const Graph g = oracle::random_graph(n, 0.1 + 0.7 * rng.uniform(), rng);
    const auto pi = random_pi(k, rng);
    std::vector<double> eta(static_cast<std::size_t>(k) * k);
    Theta1 theta;
    if (rep % 2 == 0) {
      const double w = 3 * rng.uniform() - 1.5, b = 3 * rng.uniform() - 2;
      std::vector<double> sizes(k);
      for (auto& s : sizes) s = 2 + (n - 2.0) * rng.uniform();
      theta = Theta1::tied(w, b, sizes, n);
      for (int p = 0; p < k; ++p) {
        for (int q = 0; q < k; ++q) eta[p * k + q] = p == q ? w * std::log(sizes[p]) : b * std::log(double(n));
      }
    } else {
      for (int p = 0; p < k; ++p) {
        for (int q = p; q < k; ++q) eta[p * k + q] = eta[q * k + p] = 8 * rng.uniform() - 4;
      }
      theta = Theta1::untied(eta, k, n);
    }
    const auto t = oracle::random_soft(n, k, floor, rng);
    const auto al = oracle::random_soft(n, k, 0.0, rng);
    const double m = minorizer_value(al, theta, pi, t, g, floor);
    worst_gap = std::max(worst_gap, m - oracle::lower_bound_direct(al, eta, pi, g));
    worst_touch = std::max(worst_touch, std::abs(minorizer_value(t, theta, pi, t, g, floor) -
                                                 oracle::lower_bound_direct(t, eta, pi, g)));
  }
  const double secs = seconds_since(t0);
  report(1, worst_gap <= 1e-9 && worst_touch <= 1e-9 && secs < 60,
         fmt("max(M - lb) = %.3g, max |M(a_t) - lb(a_t)| = %.3g, %.1f s", worst_gap, worst_touch, secs));
}

// ---- 2 ----
void ascent() {
  Rng rng(2002);
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 10 + rng.below(51);
    const int k = 2 + static_cast<int>(rng.below(3));
    const Membership z = oracle::random_membership(n, k, rng);
    const Graph g = oracle::planted_sbm(z, 0.3 + 0.4 * rng.uniform(), 0.02 + 0.1 * rng.uniform(), rng);
    Step1Config cfg;
    cfg.num_blocks = k;
    cfg.seed = rng.next();
    cfg.mode = rep % 2 ? SbmMode::Tied : SbmMode::Untied;
    cfg.warm_start = rep % 3 == 0 ? WarmStart::Random : WarmStart::Clustered;
    const auto res = run_step1(g, cfg);
    for (std::size_t t = 1; t < res.trace.size(); ++t) worst = std::max(worst, res.trace[t - 1] - res.trace[t]);
  }
  report(2, worst <= 1e-8, fmt("largest decrease over 100 runs = %.3g", worst));
}

// ---- 3 ----
// Exact MLE by damped Newton on exact_loglik with finite-difference derivatives.
std::vector<double> exact_mle(const Graph& g, const Membership& z, const ModelSpec& m, std::vector<double> th) {
  const std::size_t d = th.size();
  auto f = [&](const std::vector<double>& x) { return exact_loglik(g, z, m, x); };
  const double h = 1e-4;
  for (int it = 0; it < 100; ++it) {
    std::vector<double> grad(d), hess(d * d);
    const double f0 = f(th);
    for (std::size_t a = 0; a < d; ++a) {
      auto up = th, dn = th;
      up[a] += h;
      dn[a] -= h;
      grad[a] = (f(up) - f(dn)) / (2 * h);
      hess[a * d + a] = (f(up) - 2 * f0 + f(dn)) / (h * h);
      for (std::size_t b = a + 1; b < d; ++b) {
        auto pp = th, pm = th, mp = th, mm = th;
        pp[a] += h, pp[b] += h, pm[a] += h, pm[b] -= h, mp[a] -= h, mp[b] += h, mm[a] -= h, mm[b] -= h;
        hess[a * d + b] = hess[b * d + a] = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * h * h);
      }
    }
    // Solve (-H) step = grad by Gaussian elimination (d is tiny).
    std::vector<double> a(d * d), step = grad;
    for (std::size_t c = 0; c < d * d; ++c) a[c] = -hess[c];
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t r = p + 1; r < d; ++r) {
        const double mult = a[r * d + p] / a[p * d + p];
        for (std::size_t c = p; c < d; ++c) a[r * d + c] -= mult * a[p * d + c];
        step[r] -= mult * step[p];
      }
    }
    for (std::size_t p = d; p-- > 0;) {
      for (std::size_t c = p + 1; c < d; ++c) step[p] -= a[p * d + c] * step[c];
      step[p] /= a[p * d + p];
    }
    double t = 1;
    std::vector<double> cand(d);
    for (int bt = 0; bt < 30; ++bt, t *= 0.5) {
      for (std::size_t c = 0; c < d; ++c) cand[c] = th[c] + t * step[c];
      if (f(cand) >= f0) break;
    }
    double moved = 0;
    for (std::size_t c = 0; c < d; ++c) moved = std::max(moved, std::abs(cand[c] - th[c]));
    th = cand;
    if (moved < 1e-8) break;
  }
  return th;
}

void exact_equivalence() {
  const auto t0 = Clock::now();
  const auto m = ModelSpec::edge_transitive();

  // (a) sampler means against enumeration, 3 batch-means standard errors.
  int a_checks = 0, a_pass = 0;
  double a_worst = 0;
  const std::vector<std::pair<std::size_t, std::vector<double>>> cases{
      {3, {0.0, 1.0}}, {4, {-0.5, 0.4}}, {5, {-0.3, 0.2}}, {6, {-0.8, 0.5}}, {7, {-1.0, 0.3}}};
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const auto& [size, eta] = cases[c];
    const auto b = sample_within(size, eta, m, McmcConfig{500, 5, 40000, 3000 + c});
    const auto exact = exact_expected_stats(size, eta, m);
    for (std::size_t coord = 0; coord < 2; ++coord) {
      const std::size_t batches = 40, per = b.count() / batches;
      std::vector<double> means;
      for (std::size_t q = 0; q < batches; ++q) {
        double s = 0;
        for (std::size_t t = q * per; t < (q + 1) * per; ++t) s += b.sample(t)[coord];
        means.push_back(s / per);
      }
      double mean = 0, var = 0;
      for (double v : means) mean += v / batches;
      for (double v : means) var += (v - mean) * (v - mean) / (batches - 1);
      const double se = std::sqrt(var / batches);
      const double z = std::abs(mean - exact[coord]) / std::max(se, 1e-12);
      a_worst = std::max(a_worst, z);
      ++a_checks;
      a_pass += z <= 3;
    }
  }

  // A 7-node graph with blocks of 4 and 3 whose MLE is interior.
  const Membership z({0, 0, 0, 0, 1, 1, 1}, 2);
  const Graph g(7, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {4, 5}, {0, 4}, {3, 6}, {1, 5}});
  const std::vector<double> theta0{-0.3, 0.4, -0.6};

  // (b) MC log-likelihood ratio at 1e5 samples against exact differences.
  McmcConfig mc{500, 3, 100000, 3100};
  const auto batch = draw_sample_batch(z, m, theta0, mc, &g, workers());
  const auto obs = sufficient_statistics(g, z, m);
  const double base = exact_loglik(g, z, m, theta0);
  double b_worst = 0;
  Rng rng(3200);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> th = theta0;
    for (auto& v : th) v += 0.6 * rng.uniform() - 0.3;
    const double approx = mc_loglik_ratio(th, theta0, obs, batch, z, m);
    b_worst = std::max(b_worst, std::abs(approx - (exact_loglik(g, z, m, th) - base)));
  }

  // (c) Step 2 against the exact MLE.
  const auto mle = exact_mle(g, z, m, theta0);
  Step2Config s2;
  s2.theta0 = theta0;
  s2.mcmc = McmcConfig{500, 3, 50000, 0};
  s2.seed = 3300;
  s2.tol = 1e-3;
  s2.workers = workers();
  const auto fit = run_step2(g, z, m, s2);
  double c_worst = 0;
  for (std::size_t c = 0; c < mle.size(); ++c) c_worst = std::max(c_worst, std::abs(fit.theta_hat[c] - mle[c]));

  const double secs = seconds_since(t0);
  report(3, a_pass == a_checks && b_worst <= 0.05 && c_worst <= 0.05 && secs < 600,
         fmt("(a) worst |z| = %.2f over sampler means; (b) max ratio error = %.4f; (c) max |theta - MLE| = %.4f; %.0f s",
             a_worst, b_worst, c_worst, secs));
}

// ---- 4 ----
void deviation_structure() {
  const auto m = ModelSpec::edge_transitive();
  Rng rng(4004);
  double worst = 0;
  bool ok = true;
  for (int rep = 0; rep < 200; ++rep) {
    const int k = 1 + static_cast<int>(rng.below(3));
    const std::size_t n = 3 + rng.below(std::min<std::size_t>(10, 6 * k - 2));
    Membership z;
    do {
      z = oracle::random_membership(n, k, rng);
    } while (std::ranges::max(neighborhood_sizes(z)) > 6);
    const Graph g = oracle::random_graph(n, 0.2 + 0.5 * rng.uniform(), rng);
    std::vector<double> theta{2 * rng.uniform() - 1.5, 2 * rng.uniform() - 1, 2 * rng.uniform() - 1.5};
    const double dev = exact_deviation(g, z, m, theta);
    double per_block = 0;
    for (int b = 0; b < k; ++b) per_block += exact_block_deviation(within_subgraph(g, z, b).graph, m, theta);
    worst = std::max(worst, std::abs(dev - per_block));
    ok = ok && std::abs(dev - per_block) <= 1e-9 * std::max(1.0, std::abs(dev));
    for (NodeId i = 0; i < static_cast<NodeId>(n); ++i) {
      for (NodeId j = i + 1; j < static_cast<NodeId>(n); ++j) {
        if (z.block(i) == z.block(j)) continue;
        std::vector<Edge> edges;
        bool had = false;
        for (const auto& e : g.edges()) {
          if (e.u == i && e.v == j) {
            had = true;
          } else {
            edges.push_back(e);
          }
        }
        if (!had) edges.push_back({i, j});
        const double toggled = exact_deviation(Graph(n, edges), z, m, theta);
        worst = std::max(worst, std::abs(toggled - dev));
        ok = ok && std::abs(toggled - dev) <= 1e-9 * std::max(1.0, std::abs(dev));
      }
    }
  }
  report(4, ok, fmt("200 graphs; largest discrepancy = %.3g", worst));
}

// ---- 5 ----
void jensen() {
  Rng rng(5005);
  double worst = -INFINITY;
  std::size_t iterates = 0;
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 3 + rng.below(5);
    const Graph g = oracle::random_graph(n, 0.2 + 0.6 * rng.uniform(), rng);
    Step1Config cfg;
    cfg.num_blocks = 2;
    cfg.seed = rng.next();
    cfg.num_restarts = 2;
    cfg.record_iterates = true;
    cfg.mode = rep % 2 ? SbmMode::Tied : SbmMode::Untied;
    cfg.warm_start = rep % 3 == 0 ? WarmStart::Random : WarmStart::Clustered;
    const auto res = run_step1(g, cfg);
    for (std::size_t t = 0; t < res.trace.size(); ++t) {
      const auto& it = res.iterates[t];
      worst = std::max(worst, res.trace[t] - oracle::sbm_observed_direct(g, it.theta1.pair_eta(), it.pi));
      ++iterates;
    }
  }
  report(5, worst <= 1e-9,
         fmt("%.0f iterates; max(lower bound - exact observed loglik) = %.3g", double(iterates), worst));
}

// ---- 6, 7 ----
void small_study() {
  const auto t0 = Clock::now();
  ReplicateConfig rc;
  rc.design = design_by_name("small-balanced");
  rc.replicates = 50;
  rc.seed = 6006;
  rc.workers = workers();
  const auto rows = replicate_study(rc);
  const double secs = seconds_since(t0);
  std::vector<double> phi, base;
  std::vector<std::vector<double>> theta(3);
  std::size_t na = 0, failed = 0;
  for (const auto& r : rows) {
    if (r.status == "failed") {
      ++failed;
      continue;
    }
    // An undefined phi counts as no agreement.
    phi.push_back(r.phi.value_or(0.0));
    base.push_back(r.phi_baseline.value_or(0.0));
    na += !r.phi.has_value();
    for (std::size_t c = 0; c < 3; ++c) theta[c].push_back(r.theta_hat[c]);
  }
  const bool enough = phi.size() >= 45;
  const double mphi = enough ? median(phi) : 0, mbase = enough ? median(base) : 0;
  report(6, enough && mphi >= 0.7 && mphi - mbase >= 0.5,
         fmt("median phi = %.3f, baseline median = %.3f, %.0f failed replicates, %.0f s", mphi, mbase, double(failed),
             secs) +
             fmt(" (%.0f undefined phi, %.0f worker(s))", double(na), double(workers())));
  const std::vector<double> truth{-0.434, 0.217, -0.882};
  double worst = enough ? 0 : INFINITY;
  std::vector<double> med(3, NAN);
  for (std::size_t c = 0; c < 3 && enough; ++c) {
    med[c] = median(theta[c]);
    worst = std::max(worst, std::abs(med[c] - truth[c]));
  }
  report(7, worst <= 0.2, fmt("median theta = (%.3f, %.3f, %.3f); max deviation %.3f", med[0], med[1], med[2], worst));
}

// ---- 8 ----
void large_smoke() {
  ReplicateConfig rc;
  rc.design = design_by_name("large-balanced");
  rc.seed = 8008;
  const auto t0 = Clock::now();
  const auto row = run_replicate(rc, 0, derive_seed(rc.seed, {tag("replicate"), 0}), workers());
  const double secs = seconds_since(t0);
  const double phi = row.phi.value_or(0.0);
  report(8, row.status != "failed" && phi >= 0.6 && secs < 900,
         fmt("phi = %.3f, %.0f s total (step 1 %.0f s, step 2 %.0f s)", phi, secs, row.step1_seconds,
             row.step2_seconds) +
             fmt(" on %.0f worker(s), %.0f edges", double(workers()), double(row.num_edges)) +
             (row.status == "ok" ? "" : ", status " + row.status + ": " + row.message));
}

// ---- 9 ----
void phi_suite() {
  Rng rng(9009);
  bool ok = true;
  for (int rep = 0; rep < 200; ++rep) {
    const int k = 2 + static_cast<int>(rng.below(4));
    const Membership z = oracle::random_membership(25, k, rng);
    const Membership w = oracle::random_membership(25, 1 + static_cast<int>(rng.below(4)), rng);
    if (const auto self = yule_phi(z, z)) ok = ok && std::abs(*self - 1.0) < 1e-12;
    std::vector<int> relabelled = z.assignment();
    for (auto& x : relabelled) x = k - 1 - x;
    const auto p1 = yule_phi(w, z), p2 = yule_phi(w, Membership(relabelled, k));
    ok = ok && p1.has_value() == p2.has_value() && (!p1 || std::abs(*p1 - *p2) < 1e-12);
  }
  const auto zero = yule_phi(Membership({0, 0, 1, 1}, 2), Membership({0, 0, 0, 1}, 2));
  ok = ok && zero && std::abs(*zero) < 1e-12;
  ok = ok && !yule_phi(Membership({0, 0, 0, 0}, 1), Membership({0, 1, 0, 1}, 2));
  ok = ok && !yule_phi(Membership({0, 1, 2, 3}, 4), Membership({0, 1, 0, 1}, 2));
  report(9, ok, "identity, relabelling, hand-counted zero, undefined marginals");
}

// ---- 10 ----
// Optional: the 10,448-node product network with its category labels.
void product_network() {
  const char* graph_path = std::getenv("LERGM_AMAZON_GRAPH");
  const char* truth_path = std::getenv("LERGM_AMAZON_MEMBERSHIP");
  if (!graph_path || !truth_path || !fs::exists(graph_path) || !fs::exists(truth_path)) {
    std::printf("CRITERION 10: SKIP  product-network integration (set LERGM_AMAZON_GRAPH and LERGM_AMAZON_MEMBERSHIP)\n");
    return;
  }
  const auto t0 = Clock::now();
  std::ifstream gin(graph_path), zin(truth_path);
  const Graph g = load_edge_list(gin);
  const Membership truth = load_membership(zin);
  EstimateConfig ec;
  ec.model = ModelSpec::curved(20, 12);
  ec.step1.num_blocks = truth.num_blocks();
  ec.step1.seed = derive_seed(10011, {tag("step1")});
  ec.step2.seed = derive_seed(10011, {tag("step2")});
  ec.step1.workers = ec.step2.workers = workers();
  const auto fit = estimate(g, ec);
  const double phi = yule_phi(truth, fit.z_hat).value_or(0.0);
  const std::vector<double> table{-1.403, 1.086, 0.760, 0.291, 1.161, -1.197};
  bool within = fit.step2.has_value();
  double worst = 0;
  for (std::size_t c = 0; within && c < table.size(); ++c) {
    const double z = std::abs(fit.step2->theta_hat[c] - table[c]) / fit.step2->standard_errors[c];
    worst = std::max(worst, z);
    within = within && z <= 3;
  }
  report(10, phi >= 0.9 && within,
         fmt("product network: phi = %.3f, worst |theta - table| / SE = %.2f, %.0f s", phi, worst, seconds_since(t0)));
}

void gof_calibration() {
  const auto t0 = Clock::now();
  const auto design = design_by_name("small-balanced");
  const Membership truth = membership_from_sizes(design.block_sizes);
  const auto m = ModelSpec::edge_transitive();
  std::size_t flagged = 0, active = 0, fits = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    McmcConfig sim;
    sim.seed = derive_seed(10010, {tag("simulate"), s});
    const Graph g = simulate_graph(truth, design.theta, m, sim, workers());
    EstimateConfig ec;
    ec.step1.num_blocks = 3;
    ec.step1.seed = derive_seed(10010, {tag("step1"), s});
    ec.step2.seed = derive_seed(10010, {tag("step2"), s});
    ec.step1.workers = ec.step2.workers = workers();
    const auto fit = estimate(g, ec);
    if (!fit.step2) continue;
    ++fits;
    const GofConfig gc;
    const auto observed = gof_statistics(g, fit.z_hat, gc);
    std::vector<GofSummary> sims(100);
    for (std::size_t r = 0; r < sims.size(); ++r) {
      McmcConfig mc;
      mc.seed = derive_seed(10010, {tag("gof"), s, r});
      sims[r] = gof_statistics(simulate_graph(fit.z_hat, fit.step2->theta_hat, m, mc, workers()), fit.z_hat, gc);
    }
    const auto env = gof_envelope(observed, sims);
    flagged += env.flagged;
    active += env.active;
  }
  const double rate = active ? double(flagged) / double(active) : 1.0;
  report(10, fits == 20 && rate <= 0.10,
         fmt("%.0f of %.0f active bins flagged (%.1f%%) over 20 seeds, %.0f s", double(flagged), double(active),
             100 * rate, seconds_since(t0)));
  product_network();
}

// ---- 11 ----
struct CliRun {
  int code = 0;
  fs::path dir;
};

CliRun cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "lergm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  const std::string text = err.str(), marker = "run directory: ";
  const auto at = text.find(marker);
  if (at != std::string::npos) r.dir = text.substr(at + marker.size(), text.find('\n', at) - at - marker.size());
  return r;
}

nlohmann::json load(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

void determinism() {
  const fs::path root = fs::temp_directory_path() / "lergm-acceptance-determinism";
  fs::remove_all(root);
  const std::string out = root.string();
  const auto sim = cli_run({"simulate", "--outdir", out, "--seed", "11", "--set", "sim.design=small-balanced"});
  const std::string graph = (sim.dir / "graph.tsv").string();
  auto estimate_with = [&](int w) {
    return cli_run({"estimate", "--outdir", out, "--seed", "12", "--graph", graph, "--workers", std::to_string(w),
                    "--set", "step1.K=3"});
  };
  const auto a = estimate_with(1), b = estimate_with(1), c = estimate_with(3);
  bool ok = sim.code == 0 && a.code == 0 && b.code == 0 && c.code == 0;
  double across = INFINITY;
  if (ok) {
    auto ma = load(a.dir / "manifest.json"), mb = load(b.dir / "manifest.json");
    ma.erase("timings");
    mb.erase("timings");
    const auto ta = load(a.dir / "theta.json"), tb = load(b.dir / "theta.json"), tc = load(c.dir / "theta.json");
    ok = ma == mb && ta["theta_hat"] == tb["theta_hat"] && ta["standard_errors"] == tb["standard_errors"];
    ok = ok && load(a.dir / "step1.json") == load(b.dir / "step1.json");
    across = 0;
    for (const auto& [name, v] : ta["theta_hat"].items()) {
      across = std::max(across, std::abs(v.get<double>() - tc["theta_hat"][name].get<double>()));
    }
    ok = ok && across <= 0.01;
  }
  report(11, ok,
         fmt("repeat run: identical manifests (timings excluded) and bitwise theta; 1 vs 3 workers: max |diff| = %.3g",
             across));
  fs::remove_all(root);
}

}  // namespace

int main(int argc, char** argv) {
  // Optional argument: comma-separated criterion numbers to run.
  std::vector<int> only;
  if (argc > 1) {
    std::stringstream ss(argv[1]);
    std::string part;
    while (std::getline(ss, part, ',')) only.push_back(std::stoi(part));
  }
  auto want = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };
  if (want(1)) minorization();
  if (want(2)) ascent();
  if (want(3)) exact_equivalence();
  if (want(4)) deviation_structure();
  if (want(5)) jensen();
  if (want(6) || want(7)) small_study();
  if (want(8)) large_smoke();
  if (want(9)) phi_suite();
  if (want(10)) gof_calibration();
  if (want(11)) determinism();
  std::printf("%d criterion line(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
