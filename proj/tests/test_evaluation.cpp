#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "lergm/error.hpp"
#include "lergm/evaluation.hpp"

using namespace lergm;

namespace {

// All-pairs distances by Floyd-Warshall on one block; -1 means unreachable.
GofSummary gof_direct(const Graph& g, const Membership& z, const GofConfig& cfg) {
  const auto a = oracle::dense(g);
  const std::size_t n = g.num_nodes();
  GofSummary s;
  s.geodesic.assign(cfg.geodesic_cap + 2, 0);
  s.dsp.assign(cfg.dsp_cap + 2, 0);
  s.esp.assign(cfg.esp_cap + 2, 0);
  const int inf = 1 << 20;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (std::size_t i = 0; i < n; ++i) {
    d[i][i] = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (a[i][j] && z.block(i) == z.block(j)) d[i][j] = 1;
    }
  }
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][h] + d[h][j]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (z.block(i) != z.block(j)) continue;
      if (d[i][j] >= inf) {
        s.geodesic[cfg.geodesic_cap + 1] += 1;
      } else {
        s.geodesic[std::min(d[i][j], cfg.geodesic_cap + 1) - 1] += 1;
      }
      int shared = 0;
      for (std::size_t h = 0; h < n; ++h) {
        shared += h != i && h != j && z.block(h) == z.block(i) && a[i][h] && a[j][h];
      }
      s.dsp[std::min(shared, cfg.dsp_cap + 1)] += 1;
      if (a[i][j]) {
        s.esp[std::min(shared, cfg.esp_cap + 1)] += 1;
        s.transitive += shared > 0;
      }
    }
  }
  return s;
}

bool same(const GofSummary& a, const GofSummary& b) {
  return a.geodesic == b.geodesic && a.dsp == b.dsp && a.esp == b.esp && a.transitive == b.transitive;
}

}  // namespace

TEST_CASE("phi: identical partitions, relabelling, hand-counted zero, degenerate marginals") {
  Rng rng(71);
  for (int rep = 0; rep < 30; ++rep) {
    const Membership z = oracle::random_membership(20, 2 + static_cast<int>(rng.below(3)), rng);
    const auto self = yule_phi(z, z);
    if (!self) continue;
    CHECK(*self == doctest::Approx(1.0));
    std::vector<int> perm(z.num_blocks());
    for (int c = 0; c < z.num_blocks(); ++c) perm[c] = (c + 1) % z.num_blocks();
    std::vector<int> relabelled(z.assignment());
    for (auto& x : relabelled) x = perm[x];
    const Membership w = oracle::random_membership(20, 3, rng);
    const auto p1 = yule_phi(w, z), p2 = yule_phi(w, Membership(relabelled, z.num_blocks()));
    REQUIRE(p1.has_value() == p2.has_value());
    if (p1) CHECK(*p1 == *p2);
  }
  const Membership star({0, 0, 1, 1}, 2), est({0, 0, 0, 1}, 2);
  const auto c = pair_counts(star, est);
  CHECK(c.n00 == 2);
  CHECK(c.n01 == 2);
  CHECK(c.n10 == 1);
  CHECK(c.n11 == 1);
  CHECK(*yule_phi(star, est) == doctest::Approx(0.0));
  CHECK(*yule_phi(Membership({0, 0, 1, 1}, 2), Membership({0, 1, 0, 1}, 2)) == doctest::Approx(-0.5));
  CHECK_FALSE(yule_phi(Membership({0, 0, 0}, 1), Membership({0, 1, 0}, 2)).has_value());
  CHECK_FALSE(yule_phi(Membership({0, 1, 2}, 3), Membership({0, 1, 0}, 2)).has_value());
  CHECK_THROWS_AS(pair_counts(Membership({0, 0}, 1), Membership({0}, 1)), ValidationError);
}

TEST_CASE("GOF statistics: hand-counted triangle, path and empty block") {
  GofConfig cfg;
  cfg.geodesic_cap = 3;
  cfg.dsp_cap = 2;
  cfg.esp_cap = 2;
  const Membership one({0, 0, 0}, 1);
  const auto tri = gof_statistics(Graph(3, {{0, 1}, {1, 2}, {0, 2}}), one, cfg);
  CHECK(tri.geodesic == std::vector<double>{3, 0, 0, 0, 0});
  CHECK(tri.dsp == std::vector<double>{0, 3, 0, 0});
  CHECK(tri.esp == std::vector<double>{0, 3, 0, 0});
  CHECK(tri.transitive == 3);
  const auto path = gof_statistics(Graph(3, {{0, 1}, {1, 2}}), one, cfg);
  CHECK(path.geodesic == std::vector<double>{2, 1, 0, 0, 0});
  CHECK(path.dsp == std::vector<double>{2, 1, 0, 0});
  CHECK(path.esp == std::vector<double>{2, 0, 0, 0});
  CHECK(path.transitive == 0);
  const auto empty = gof_statistics(Graph(3, {}), one, cfg);
  CHECK(empty.geodesic == std::vector<double>{0, 0, 0, 0, 3});
  CHECK(empty.dsp == std::vector<double>{3, 0, 0, 0});
  // Between edges are ignored.
  const auto split = gof_statistics(Graph(3, {{0, 1}, {1, 2}}), Membership({0, 0, 1}, 2), cfg);
  CHECK(split.geodesic == std::vector<double>{1, 0, 0, 0, 0});
  GofConfig bad;
  bad.geodesic_cap = 0;
  CHECK_THROWS_AS(gof_statistics(Graph(3, {}), one, bad), ValidationError);
}

TEST_CASE("GOF statistics agree with dense all-pairs computation") {
  Rng rng(72);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t n = 2 + rng.below(30);
    const Graph g = oracle::random_graph(n, 0.05 + 0.4 * rng.uniform(), rng);
    const Membership z = oracle::random_membership(n, 1 + static_cast<int>(rng.below(3)), rng);
    GofConfig cfg;
    cfg.geodesic_cap = 1 + static_cast<int>(rng.below(4));
    cfg.dsp_cap = static_cast<int>(rng.below(4));
    cfg.esp_cap = static_cast<int>(rng.below(4));
    CHECK(same(gof_statistics(g, z, cfg), gof_direct(g, z, cfg)));
    CHECK(same(gof_statistics(g, z, cfg, 3), gof_direct(g, z, cfg)));
  }
}

TEST_CASE("quantiles and envelopes") {
  CHECK(quantile({4, 1, 3, 2}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({4, 1, 3, 2}, 0.025) == doctest::Approx(1.075));
  CHECK(quantile({7}, 0.975) == 7);
  CHECK_THROWS_AS(quantile({}, 0.5), ValidationError);

  GofConfig cfg;
  cfg.geodesic_cap = 2;
  cfg.dsp_cap = 1;
  cfg.esp_cap = 1;
  const Membership one({0, 0, 0, 0}, 1);
  std::vector<GofSummary> sims;
  for (const Graph& g : {Graph(4, {{0, 1}, {1, 2}}), Graph(4, {{0, 1}, {2, 3}}), Graph(4, {{0, 1}, {1, 2}, {0, 2}})}) {
    sims.push_back(gof_statistics(g, one, cfg));
  }
  const auto inside = gof_envelope(sims[0], sims);
  const auto clique = gof_statistics(Graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}), one, cfg);
  const auto outside = gof_envelope(clique, sims);
  CHECK(outside.flagged > 0);
  CHECK(outside.flagged <= outside.active);
  const auto& first = outside.bins.front();
  CHECK(first.statistic == "geodesic");
  CHECK(first.bin == "1");
  CHECK(first.observed == 6);
  CHECK(first.flag == '+');
  CHECK(inside.bins.size() == outside.bins.size());
  for (const auto& b : inside.bins) CHECK((b.flag == ' ' || b.observed < b.q025 || b.observed > b.q975));
  CHECK(inside.bins.back().statistic == "transitive");
  // Bins nobody touches are inactive.
  const auto it = std::find_if(outside.bins.begin(), outside.bins.end(),
                               [](const EnvelopeBin& b) { return b.statistic == "geodesic" && b.bin == ">2"; });
  REQUIRE(it != outside.bins.end());
  CHECK_FALSE(it->active);

  const auto csv = envelope_csv(outside);
  std::istringstream in(csv);
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "statistic,bin,observed,min,q025,median,q975,max,flag");
  std::getline(in, row);
  CHECK(row.rfind("geodesic,1,6,", 0) == 0);
  CHECK(row.back() == '+');
  CHECK_FALSE(envelope_table(outside).empty());
  CHECK_THROWS_AS(gof_envelope(clique, {sims[0]}), ValidationError);
}
