#include "lergm/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "lergm/error.hpp"
#include "lergm/evaluation.hpp"
#include "lergm/parallel.hpp"
#include "lergm/rng.hpp"

namespace lergm {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Design design_by_name(const std::string& name) {
  Design d;
  d.name = name;
  if (name == "small-balanced") {
    d.block_sizes = {10, 10, 10};
    d.theta = {-0.434, 0.217, -0.882};
  } else if (name == "small-unbalanced") {
    d.block_sizes = {5, 10, 15};
    d.theta = {-0.434, 0.217, -0.882};
  } else if (name == "large-balanced") {
    d.block_sizes.assign(100, 25);
    d.theta = {-0.621, 0.311, -0.511};
  } else if (name == "large-unbalanced") {
    for (std::size_t size : {15, 20, 25, 30, 35}) d.block_sizes.insert(d.block_sizes.end(), 20, size);
    d.theta = {-0.621, 0.311, -0.511};
  } else {
    throw ValidationError("unknown design '" + name + "'");
  }
  return d;
}

std::vector<std::string> design_names() {
  return {"small-balanced", "small-unbalanced", "large-balanced", "large-unbalanced"};
}

Membership membership_from_sizes(const std::vector<std::size_t>& sizes) {
  std::vector<int> z;
  for (std::size_t k = 0; k < sizes.size(); ++k) z.insert(z.end(), sizes[k], static_cast<int>(k));
  return Membership(std::move(z), static_cast<int>(sizes.size()));
}

EstimationResult estimate(const Graph& g, const EstimateConfig& cfg, const Membership* membership) {
  EstimationResult out;
  if (membership) {
    if (membership->num_nodes() != g.num_nodes()) throw ValidationError("membership and graph sizes differ");
    out.z_hat = *membership;
  } else {
    out.step1 = run_step1(g, cfg.step1);
    out.z_hat = out.step1->z_hat;
  }
  if (cfg.step1_only) return out;

  Step2Config s2 = cfg.step2;
  if (s2.theta0.empty() && out.step1 && out.step1->theta1.mode == SbmMode::Tied) {
    s2.theta0.assign(cfg.model.theta_dim(), 0.0);
    for (std::size_t t = 0; t < cfg.model.terms().size(); ++t) {
      if (cfg.model.terms()[t].kind == TermKind::WithinEdges) s2.theta0[cfg.model.theta_offset(t)] = out.step1->theta1.within;
    }
    s2.theta0[cfg.model.between_theta_index()] = out.step1->theta1.between;
  }
  out.step2 = run_step2(g, out.z_hat, cfg.model, s2);
  out.theta0 = out.step2->theta_trace.empty() ? s2.theta0 : out.step2->theta_trace.front();
  return out;
}

ReplicateRow run_replicate(const ReplicateConfig& cfg, std::size_t index, std::uint64_t seed, int workers) {
  ReplicateRow row;
  row.replicate = index;
  row.seed = seed;
  try {
    const ModelSpec& m = cfg.estimate.model;
    if (cfg.design.theta.size() != m.theta_dim()) throw ValidationError("design theta does not match the model");
    const Membership truth = membership_from_sizes(cfg.design.block_sizes);
    McmcConfig sim = cfg.simulation;
    sim.seed = derive_seed(seed, {tag("simulate")});
    const Graph g = simulate_graph(truth, cfg.design.theta, m, sim, workers);
    row.num_edges = g.num_edges();

    EstimateConfig ec = cfg.estimate;
    ec.step1.num_blocks = static_cast<int>(cfg.design.block_sizes.size());
    ec.step1.seed = derive_seed(seed, {tag("step1")});
    ec.step1.workers = workers;
    ec.step2.seed = derive_seed(seed, {tag("step2")});
    ec.step2.workers = workers;
    const auto fit = estimate(g, ec);
    row.phi = yule_phi(truth, fit.z_hat);

    // Baseline: the same block sizes as z_hat, assigned to random nodes.
    std::vector<int> shuffled = fit.z_hat.assignment();
    Rng rng(derive_seed(seed, {tag("baseline")}));
    for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    row.phi_baseline = yule_phi(truth, Membership(std::move(shuffled), fit.z_hat.num_blocks()));

    row.step1_iterations = fit.step1->iterations;
    row.step1_seconds = fit.step1->seconds;
    if (fit.step2) {
      row.theta_hat = fit.step2->theta_hat;
      row.standard_errors = fit.step2->standard_errors;
      row.step2_seconds = fit.step2->seconds;
      if (!fit.step2->converged) {
        row.status = "not-converged";
        row.message = fit.step2->warnings.empty() ? "" : fit.step2->warnings.front();
      }
    }
  } catch (const std::exception& e) {
    row.status = "failed";
    row.message = e.what();
  }
  return row;
}

std::vector<ReplicateRow> replicate_study(const ReplicateConfig& cfg) {
  if (cfg.replicates < 1) throw ValidationError("replicate count must be >= 1");
  std::vector<ReplicateRow> rows(cfg.replicates);
  // Spare workers go inside each replicate when there are fewer replicates than workers.
  const int outer = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(std::max(1, cfg.workers)), rows.size()));
  const int inner = std::max(1, cfg.workers / outer);
  parallel_for(rows.size(), outer, [&](std::size_t r) {
    rows[r] = run_replicate(cfg, r, derive_seed(cfg.seed, {tag("replicate"), r}), inner);
  });
  return rows;
}

std::string replicate_csv(const std::vector<ReplicateRow>& rows, const ModelSpec& m) {
  std::ostringstream os;
  const auto names = m.theta_names();
  os << "replicate,seed,status,edges,phi,phi_baseline";
  for (const auto& n : names) os << ",theta_" << n;
  for (const auto& n : names) os << ",se_" << n;
  os << ",step1_iterations,message\n";
  for (const auto& r : rows) {
    os << r.replicate + 1 << ',' << r.seed << ',' << r.status << ',' << r.num_edges << ','
       << (r.phi ? num(*r.phi) : "NA") << ',' << (r.phi_baseline ? num(*r.phi_baseline) : "NA");
    for (std::size_t c = 0; c < names.size(); ++c) os << ',' << (c < r.theta_hat.size() ? num(r.theta_hat[c]) : "NA");
    for (std::size_t c = 0; c < names.size(); ++c) {
      os << ',' << (c < r.standard_errors.size() ? num(r.standard_errors[c]) : "NA");
    }
    std::string msg = r.message;
    for (auto& ch : msg) {
      if (ch == ',' || ch == '\n' || ch == '"') ch = ';';
    }
    os << ',' << r.step1_iterations << ',' << msg << '\n';
  }
  return os.str();
}

}  // namespace lergm
