#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lergm/graph.hpp"

namespace lergm {

/// Pair classification of two partitions: n_ab counts node pairs with
/// a = [same block under z_star], b = [same block under z].
struct PairCounts {
  std::uint64_t n00 = 0, n01 = 0, n10 = 0, n11 = 0;
};

PairCounts pair_counts(const Membership& z_star, const Membership& z);

/// Yule's phi between co-membership indicators; nullopt when a marginal
/// in the denominator is zero.
std::optional<double> yule_phi(const Membership& z_star, const Membership& z);

struct GofConfig {
  int geodesic_cap = 20;
  int dsp_cap = 25;
  int esp_cap = 25;
  void validate() const;
};

/// Within-block goodness-of-fit statistics.
///   geodesic[d-1] for d = 1..cap, then one bin for d > cap, then one for unreachable
///   dsp[t] for t = 0..cap shared partners over all within dyads, then overflow
///   esp[t] likewise over within edges
struct GofSummary {
  std::vector<double> geodesic;
  std::vector<double> dsp;
  std::vector<double> esp;
  double transitive = 0.0;
};

GofSummary gof_statistics(const Graph& g, const Membership& z, const GofConfig& cfg = {}, int workers = 1);

struct EnvelopeBin {
  std::string statistic;
  std::string bin;
  double observed = 0.0;
  double min = 0.0, q025 = 0.0, median = 0.0, q975 = 0.0, max = 0.0;
  char flag = ' ';  // '+' above the 97.5% quantile, '-' below the 2.5% quantile
  bool active = false;  // observed or some simulated value is nonzero
};

struct EnvelopeReport {
  std::vector<EnvelopeBin> bins;
  std::size_t flagged = 0;  // flagged active bins
  std::size_t active = 0;
};

/// Type-7 sample quantile of unsorted values.
double quantile(std::vector<double> values, double p);

EnvelopeReport gof_envelope(const GofSummary& observed, const std::vector<GofSummary>& simulated);

/// Columns: statistic,bin,observed,min,q025,median,q975,max,flag
std::string envelope_csv(const EnvelopeReport& report);
std::string envelope_table(const EnvelopeReport& report);

}  // namespace lergm
