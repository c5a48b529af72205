#include "lergm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>

#include "lergm/block_graph.hpp"
#include "lergm/error.hpp"
#include "lergm/parallel.hpp"

namespace lergm {

namespace {

std::uint64_t choose2(std::uint64_t m) { return m < 2 ? 0 : m * (m - 1) / 2; }

void add_block(const Graph& block, const GofConfig& cfg, GofSummary& out) {
  const std::size_t m = block.num_nodes();
  const BlockAdjacency adj(block);
  const std::size_t gcap = cfg.geodesic_cap;
  std::vector<int> dist(m);
  for (std::size_t s = 0; s < m; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    std::queue<NodeId> q;
    q.push(static_cast<NodeId>(s));
    while (!q.empty()) {
      const NodeId u = q.front();
      q.pop();
      for (NodeId v : block.neighbors(u)) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
      }
    }
    for (std::size_t t = s + 1; t < m; ++t) {
      if (dist[t] < 0) {
        out.geodesic[gcap + 1] += 1.0;
      } else if (static_cast<std::size_t>(dist[t]) > gcap) {
        out.geodesic[gcap] += 1.0;
      } else {
        out.geodesic[dist[t] - 1] += 1.0;
      }
      const std::size_t c = adj.common_count(static_cast<NodeId>(s), static_cast<NodeId>(t));
      out.dsp[std::min<std::size_t>(c, cfg.dsp_cap + 1)] += 1.0;
    }
  }
  for (const auto& e : block.edges()) {
    const std::size_t c = adj.common_count(e.u, e.v);
    out.esp[std::min<std::size_t>(c, cfg.esp_cap + 1)] += 1.0;
    if (c > 0) out.transitive += 1.0;
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

PairCounts pair_counts(const Membership& z_star, const Membership& z) {
  if (z_star.num_nodes() != z.num_nodes()) throw ValidationError("memberships have different lengths");
  const int ka = z_star.num_blocks();
  const int kb = z.num_blocks();
  std::vector<std::uint64_t> table(static_cast<std::size_t>(ka) * kb, 0), rows(ka, 0), cols(kb, 0);
  for (std::size_t i = 0; i < z.num_nodes(); ++i) {
    const int a = z_star.block(static_cast<NodeId>(i));
    const int b = z.block(static_cast<NodeId>(i));
    ++table[static_cast<std::size_t>(a) * kb + b];
    ++rows[a];
    ++cols[b];
  }
  std::uint64_t both = 0, same_star = 0, same_z = 0;
  for (auto c : table) both += choose2(c);
  for (auto c : rows) same_star += choose2(c);
  for (auto c : cols) same_z += choose2(c);
  PairCounts pc;
  pc.n11 = both;
  pc.n10 = same_star - both;
  pc.n01 = same_z - both;
  pc.n00 = choose2(z.num_nodes()) - both - pc.n10 - pc.n01;
  return pc;
}

std::optional<double> yule_phi(const Membership& z_star, const Membership& z) {
  const auto c = pair_counts(z_star, z);
  const double n00 = static_cast<double>(c.n00), n01 = static_cast<double>(c.n01);
  const double n10 = static_cast<double>(c.n10), n11 = static_cast<double>(c.n11);
  const double den = (n00 + n01) * (n10 + n11) * (n00 + n10) * (n01 + n11);
  if (den <= 0.0) return std::nullopt;
  const double phi = (n00 * n11 - n01 * n10) / std::sqrt(den);
  return std::clamp(phi, -1.0, 1.0);
}

void GofConfig::validate() const {
  if (geodesic_cap < 1 || dsp_cap < 0 || esp_cap < 0) throw ValidationError("invalid GOF histogram caps");
}

GofSummary gof_statistics(const Graph& g, const Membership& z, const GofConfig& cfg, int workers) {
  cfg.validate();
  if (g.num_nodes() != z.num_nodes()) throw ValidationError("graph and membership sizes differ");
  auto empty = [&] {
    GofSummary s;
    s.geodesic.assign(cfg.geodesic_cap + 2, 0.0);
    s.dsp.assign(cfg.dsp_cap + 2, 0.0);
    s.esp.assign(cfg.esp_cap + 2, 0.0);
    return s;
  };
  std::vector<GofSummary> parts(z.num_blocks());
  parallel_for(parts.size(), workers, [&](std::size_t k) {
    parts[k] = empty();
    add_block(within_subgraph(g, z, static_cast<int>(k)).graph, cfg, parts[k]);
  });
  GofSummary out = empty();
  for (const auto& p : parts) {
    for (std::size_t b = 0; b < out.geodesic.size(); ++b) out.geodesic[b] += p.geodesic[b];
    for (std::size_t b = 0; b < out.dsp.size(); ++b) out.dsp[b] += p.dsp[b];
    for (std::size_t b = 0; b < out.esp.size(); ++b) out.esp[b] += p.esp[b];
    out.transitive += p.transitive;
  }
  return out;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

EnvelopeReport gof_envelope(const GofSummary& observed, const std::vector<GofSummary>& simulated) {
  if (simulated.size() < 2) throw ValidationError("a GOF envelope needs at least two simulated summaries");
  for (const auto& s : simulated) {
    if (s.geodesic.size() != observed.geodesic.size() || s.dsp.size() != observed.dsp.size() ||
        s.esp.size() != observed.esp.size()) {
      throw ValidationError("GOF summaries use different histogram caps");
    }
  }
  EnvelopeReport report;
  auto add = [&](const std::string& stat, const std::string& bin, double obs, auto&& pick) {
    std::vector<double> v;
    v.reserve(simulated.size());
    for (const auto& s : simulated) v.push_back(pick(s));
    EnvelopeBin b;
    b.statistic = stat;
    b.bin = bin;
    b.observed = obs;
    b.min = *std::min_element(v.begin(), v.end());
    b.max = *std::max_element(v.begin(), v.end());
    b.q025 = quantile(v, 0.025);
    b.median = quantile(v, 0.5);
    b.q975 = quantile(v, 0.975);
    if (obs > b.q975) b.flag = '+';
    if (obs < b.q025) b.flag = '-';
    b.active = obs != 0.0 || b.max != 0.0 || b.min != 0.0;
    if (b.active) {
      ++report.active;
      if (b.flag != ' ') ++report.flagged;
    }
    report.bins.push_back(std::move(b));
  };
  const std::size_t gcap = observed.geodesic.size() - 2;
  for (std::size_t d = 0; d < observed.geodesic.size(); ++d) {
    const std::string label = d < gcap ? std::to_string(d + 1) : d == gcap ? ">" + std::to_string(gcap) : "inf";
    add("geodesic", label, observed.geodesic[d], [d](const GofSummary& s) { return s.geodesic[d]; });
  }
  const std::size_t dcap = observed.dsp.size() - 2;
  for (std::size_t t = 0; t < observed.dsp.size(); ++t) {
    const std::string label = t <= dcap ? std::to_string(t) : ">" + std::to_string(dcap);
    add("dsp", label, observed.dsp[t], [t](const GofSummary& s) { return s.dsp[t]; });
  }
  const std::size_t ecap = observed.esp.size() - 2;
  for (std::size_t t = 0; t < observed.esp.size(); ++t) {
    const std::string label = t <= ecap ? std::to_string(t) : ">" + std::to_string(ecap);
    add("esp", label, observed.esp[t], [t](const GofSummary& s) { return s.esp[t]; });
  }
  add("transitive", "total", observed.transitive, [](const GofSummary& s) { return s.transitive; });
  return report;
}

std::string envelope_csv(const EnvelopeReport& report) {
  std::ostringstream os;
  os << "statistic,bin,observed,min,q025,median,q975,max,flag\n";
  for (const auto& b : report.bins) {
    os << b.statistic << ',' << b.bin << ',' << fmt(b.observed) << ',' << fmt(b.min) << ',' << fmt(b.q025) << ','
       << fmt(b.median) << ',' << fmt(b.q975) << ',' << fmt(b.max) << ',' << (b.flag == ' ' ? "" : std::string(1, b.flag))
       << '\n';
  }
  return os.str();
}

std::string envelope_table(const EnvelopeReport& report) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-6s %10s %10s %10s %10s %10s %10s  %s\n", "statistic", "bin", "observed",
                "min", "q2.5", "median", "q97.5", "max", "flag");
  os << line;
  for (const auto& b : report.bins) {
    if (!b.active) continue;
    std::snprintf(line, sizeof line, "%-10s %-6s %10.6g %10.6g %10.6g %10.6g %10.6g %10.6g  %c\n",
                  b.statistic.c_str(), b.bin.c_str(), b.observed, b.min, b.q025, b.median, b.q975, b.max, b.flag);
    os << line;
  }
  os << "flagged " << report.flagged << " of " << report.active << " active bins\n";
  return os.str();
}

}  // namespace lergm
