#pragma once

#include <cstdint>
#include <vector>

#include "lergm/graph.hpp"
#include "lergm/rng.hpp"

namespace lergm {

/// Adjacency restricted to edges whose endpoints share at least one neighbor.
std::vector<std::vector<NodeId>> supported_adjacency(const Graph& g);

/// Label propagation from singletons: a node joins the label k maximizing
/// (neighbors labelled k) - threshold * (other nodes labelled k); it moves
/// only on strict improvement. Sweeps visit nodes in random order until no
/// node moves. Returns labels 0..C-1 in order of first appearance.
std::vector<int> propagate_labels(const std::vector<std::vector<NodeId>>& adj, double threshold, Rng& rng,
                                  std::size_t max_sweeps = 100);

/// Coarsens or splits a labelling to exactly num_blocks labels. Merges take
/// the cluster pair with the highest edge density in g first; clusters with
/// no edges between them merge smallest first. Splits halve the largest.
std::vector<int> fit_block_count(const Graph& g, std::vector<int> labels, int num_blocks);

/// Greedy single-node moves under the tied block model with a one-hot
/// membership, refitting the two natural parameters after every sweep.
/// Returns the number of sweeps run.
std::size_t refine_partition(const Graph& g, int num_blocks, std::vector<int>& z, Rng& rng,
                             std::size_t max_sweeps = 50);

/// Lower bound of the tied block model at a floored one-hot membership with
/// fitted parameters and pi = block shares.
double partition_bound(const Graph& g, const std::vector<int>& z, int num_blocks);

/// supported_adjacency -> propagate_labels -> fit_block_count -> refine_partition,
/// plus `random_starts` refined uniform random partitions; returns the
/// candidate with the highest partition_bound (the propagated one on ties).
std::vector<int> seed_partition(const Graph& g, int num_blocks, double threshold, std::size_t random_starts,
                                std::uint64_t seed);

}  // namespace lergm
