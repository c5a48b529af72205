#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lergm/graph.hpp"
#include "lergm/mcmle.hpp"
#include "lergm/model.hpp"
#include "lergm/sampler.hpp"
#include "lergm/variational.hpp"

namespace lergm {

/// A simulation design: fixed neighborhood sizes and a data-generating theta
/// for the edges + transitive edges + between edges model.
struct Design {
  std::string name;
  std::vector<std::size_t> block_sizes;
  std::vector<double> theta;
};

/// small-balanced, small-unbalanced, large-balanced, large-unbalanced.
Design design_by_name(const std::string& name);
std::vector<std::string> design_names();

/// Contiguous blocks: the first sizes[0] nodes form block 0, and so on.
Membership membership_from_sizes(const std::vector<std::size_t>& sizes);

struct EstimateConfig {
  ModelSpec model = ModelSpec::edge_transitive();
  Step1Config step1;
  Step2Config step2;
  bool step1_only = false;
};

struct EstimationResult {
  std::optional<Step1Result> step1;  // absent when the membership was supplied
  Membership z_hat;
  std::optional<Step2Result> step2;  // absent with step1_only
  std::vector<double> theta0;
};

/// Step 1 (unless `membership` is given), then Step 2 on the hardened
/// membership. Step 2 starts from Step 1's tied theta_1 on the edge
/// coordinates and 0 elsewhere unless step2.theta0 is set.
EstimationResult estimate(const Graph& g, const EstimateConfig& cfg, const Membership* membership = nullptr);

struct ReplicateConfig {
  Design design;
  std::size_t replicates = 1;
  std::uint64_t seed = 1;
  McmcConfig simulation;  // chain schedule used to draw each data set
  EstimateConfig estimate;
  int workers = 1;        // replicate-level parallelism
};

struct ReplicateRow {
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::string message;
  std::optional<double> phi;
  std::optional<double> phi_baseline;  // phi of a random relabeling of z_hat's nodes
  std::vector<double> theta_hat;
  std::vector<double> standard_errors;
  std::size_t step1_iterations = 0;
  double step1_seconds = 0.0;
  double step2_seconds = 0.0;
  std::size_t num_edges = 0;
};

/// Runs one replicate from its own seed with `workers` threads inside the
/// replicate. Deterministic given the seed and worker count.
ReplicateRow run_replicate(const ReplicateConfig& cfg, std::size_t index, std::uint64_t seed, int workers = 1);

/// Replicate r uses seed derive_seed(cfg.seed, {tag("replicate"), r}).
std::vector<ReplicateRow> replicate_study(const ReplicateConfig& cfg);

std::string replicate_csv(const std::vector<ReplicateRow>& rows, const ModelSpec& m);

}  // namespace lergm
