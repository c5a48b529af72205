#include <cmath>
#include <bit>
#include <map>

#include "doctest.h"
#include "helpers.hpp"
#include "lergm/error.hpp"
#include "lergm/exact.hpp"
#include "lergm/sampler.hpp"

using namespace lergm;

namespace {

struct MeanSe {
  double mean = 0, se = 0;
};

// Mean with a batch-means standard error (20 batches).
MeanSe batch_mean(const BlockSamples& b, std::size_t coord) {
  const std::size_t count = b.count(), batches = 20, per = count / batches;
  std::vector<double> means;
  double total = 0;
  for (std::size_t q = 0; q < batches; ++q) {
    double s = 0;
    for (std::size_t t = q * per; t < (q + 1) * per; ++t) s += b.sample(t)[coord];
    means.push_back(s / per);
    total += s / per;
  }
  const double mean = total / batches;
  double var = 0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= (batches - 1);
  return {mean, std::sqrt(var / batches)};
}

}  // namespace

TEST_CASE("memberships: degenerate, determinism, law of large numbers, validation") {
  const auto all_first = sample_memberships(std::vector<double>{1, 0, 0}, 50, 3);
  CHECK(neighborhood_sizes(all_first) == std::vector<std::size_t>{50, 0, 0});
  CHECK(sample_memberships(std::vector<double>{.2, .8}, 100, 9) == sample_memberships(std::vector<double>{.2, .8}, 100, 9));
  const auto z = sample_memberships(std::vector<double>{.5, .5}, 10000, 4);
  CHECK(std::abs(neighborhood_sizes(z)[0] / 1e4 - 0.5) < 0.02);
  CHECK_THROWS_AS(sample_memberships(std::vector<double>{.5, .6}, 10, 1), ValidationError);
  CHECK_THROWS_AS(sample_memberships(std::vector<double>{1.5, -.5}, 10, 1), ValidationError);
}

TEST_CASE("between edges: cross-block only, Bernoulli rate, both sampling paths") {
  const Membership z = sample_memberships(std::vector<double>{.3, .3, .4}, 400, 5);
  double cross = 0;
  for (std::size_t i = 0; i < 400; ++i) {
    for (std::size_t j = i + 1; j < 400; ++j) cross += z.block(i) != z.block(j);
  }
  CHECK(sample_between(z, -50.0, 1).empty());
  for (double theta : {0.0, -0.3, -1.6}) {  // p = .5, ~.166, ~6.8e-5 (skipping path)
    const double p = 1.0 / (1.0 + std::exp(-theta * std::log(400.0)));
    double total = 0;
    const int reps = theta < -1 ? 200 : 5;
    for (int r = 0; r < reps; ++r) {
      const auto e = sample_between(z, theta, 100 + r);
      for (const auto& x : e) {
        CHECK(x.u < x.v);
        CHECK(z.block(x.u) != z.block(x.v));
      }
      total += static_cast<double>(e.size());
    }
    const double expected = reps * cross * p;
    CHECK(std::abs(total - expected) < 4 * std::sqrt(expected * (1 - p)) + 1);
  }
  CHECK(sample_between(z, -0.3, 8) == sample_between(z, -0.3, 8));
  // The rate used for the large product network.
  CHECK(1.0 / (1.0 + std::exp(1.197 * std::log(10448.0))) == doctest::Approx(1.55e-5).epsilon(0.01));
}

TEST_CASE("within chain: uniform case has mean half the dyads") {
  const auto m = ModelSpec::edges_only();
  McmcConfig cfg{200, 5, 4000, 77};
  const auto b = sample_within(8, std::vector<double>{0.0}, m, cfg);
  const auto ms = batch_mean(b, 0);
  CHECK(std::abs(ms.mean - 14.0) < 3 * ms.se + 1e-9);
  CHECK(b.count() == 4000);
}

TEST_CASE("within chain: transitive expectation matches enumeration") {
  const auto m = ModelSpec::edge_transitive();
  const std::vector<double> eta{0.0, 1.0};
  McmcConfig cfg{200, 10, 20000, 78};
  const auto b = sample_within(3, eta, m, cfg);
  const auto exact = exact_expected_stats(3, eta, m);
  CHECK(exact[1] == doctest::Approx(3 * std::exp(3.0) / (7 + std::exp(3.0))));
  for (std::size_t c = 0; c < 2; ++c) {
    const auto ms = batch_mean(b, c);
    CHECK(std::abs(ms.mean - exact[c]) < 3 * ms.se);
  }
}

TEST_CASE("within chain: state frequencies match Boltzmann probabilities") {
  const auto m = ModelSpec::edge_transitive();
  const std::vector<double> eta{-0.4, 0.6};
  std::map<std::uint32_t, double> freq;
  McmcConfig cfg{100, 3, 40000, 79};
  const auto b = sample_within(3, eta, m, cfg, nullptr, [&](const BlockAdjacency& x, std::span<const double>) {
    freq[(x.has(0, 1) ? 1u : 0u) | (x.has(0, 2) ? 2u : 0u) | (x.has(1, 2) ? 4u : 0u)] += 1;
  });
  const double psi = exact_log_normalizer(3, eta, m);
  double chi2 = 0;
  for (std::uint32_t code = 0; code < 8; ++code) {
    const int edges = std::popcount(code);
    const double s1 = edges, s2 = edges == 3 ? 3 : 0;
    const double p = std::exp(eta[0] * s1 + eta[1] * s2 - psi);
    const double expected = p * b.count();
    chi2 += (freq[code] - expected) * (freq[code] - expected) / expected;
  }
  // 7 degrees of freedom; the 99.99% point is about 29.9. Thinning makes draws nearly independent.
  CHECK(chi2 < 29.9);
}

TEST_CASE("within chain: retained statistics match recomputation; determinism") {
  const auto m = ModelSpec::curved(5, 4);
  std::vector<double> eta(m.within_dim());
  for (std::size_t c = 0; c < eta.size(); ++c) eta[c] = c == 0 ? -1.0 : 0.1;
  McmcConfig cfg{20, 2, 50, 80};
  std::size_t seen = 0;
  const auto a = sample_within(9, eta, m, cfg, nullptr, [&](const BlockAdjacency& x, std::span<const double> s) {
    const auto ref = block_statistics(x.to_graph(), m);
    CHECK(std::vector<double>(s.begin(), s.end()) == ref);
    ++seen;
  });
  CHECK(seen == 50);
  const auto b = sample_within(9, eta, m, cfg);
  CHECK(a.stats == b.stats);
  CHECK(a.final_state == b.final_state);
  CHECK(a.acceptance_rate > 0.0);
  McmcConfig bad{0, 0, 1, 1};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("simulation: degenerate parameters and substream independence") {
  const auto m = ModelSpec::edge_transitive();
  const Membership z({0, 0, 0, 1, 1, 1, 1, 2, 2, 2}, 3);
  McmcConfig cfg{50, 5, 1, 81};
  CHECK(simulate_graph(z, std::vector<double>{-60, 0, -60}, m, cfg).num_edges() == 0);

  const Membership one(std::vector<int>(8, 0), 1);
  const Graph solo = simulate_graph(one, std::vector<double>{0.2, 0.1, -1.0}, m, cfg);
  CHECK(solo.num_nodes() == 8);

  // Changing the within parameters leaves the between edges untouched.
  const Graph g1 = simulate_graph(z, std::vector<double>{-0.5, 0.2, 0.0}, m, cfg);
  const Graph g2 = simulate_graph(z, std::vector<double>{0.8, -0.2, 0.0}, m, cfg);
  auto between = [&](const Graph& g) {
    std::vector<Edge> out;
    for (const auto& e : g.edges()) {
      if (z.block(e.u) != z.block(e.v)) out.push_back(e);
    }
    return out;
  };
  CHECK(between(g1) == between(g2));
  CHECK(simulate_graph(z, std::vector<double>{-0.5, 0.2, 0.0}, m, cfg, 3) == g1);

  const auto net = simulate_graph(std::vector<double>{.5, .5}, 12, std::vector<double>{0, 0, -1}, m, cfg);
  CHECK(net.z.num_nodes() == 12);
  CHECK(net.graph.num_nodes() == 12);
}

TEST_CASE("sample batch: layout, provenance, worker independence") {
  const auto m = ModelSpec::edge_transitive();
  const Membership z({0, 0, 0, 0, 1, 2, 2, 2}, 3);
  const std::vector<double> theta{-0.5, 0.3, -1.0};
  McmcConfig cfg{30, 2, 40, 82};
  const auto a = draw_sample_batch(z, m, theta, cfg, nullptr, 1);
  const auto b = draw_sample_batch(z, m, theta, cfg, nullptr, 4);
  REQUIRE(a.blocks.size() == 3);
  CHECK(a.blocks[1].count() == 0);
  CHECK(a.blocks[0].count() == 40);
  CHECK(a.blocks[0].dim == m.within_dim());
  CHECK(a.theta0 == theta);
  CHECK(a.z == z);
  for (int k = 0; k < 3; ++k) {
    CHECK(a.blocks[k].stats == b.blocks[k].stats);
    CHECK(a.blocks[k].seed == b.blocks[k].seed);
  }
  CHECK(a.blocks[0].seed == derive_seed(82, {tag("within"), 0}));
}
