#include "lergm/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <unordered_map>

#include "lergm/error.hpp"
#include "lergm/variational.hpp"

namespace lergm {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void shuffle(std::vector<NodeId>& order, Rng& rng) {
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
}

std::vector<int> relabel(std::vector<int> labels) {
  std::unordered_map<int, int> map;
  for (auto& x : labels) {
    auto [it, fresh] = map.try_emplace(x, static_cast<int>(map.size()));
    x = it->second;
  }
  return labels;
}

SoftMembership floored_one_hot(const std::vector<int>& z, int k) {
  constexpr double floor = 1e-6;
  SoftMembership a(z.size(), k);
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (int c = 0; c < k; ++c) a(i, c) = floor + (1.0 - k * floor) * (z[i] == c ? 1.0 : 0.0);
  }
  return a;
}

Theta1 fit_tied(const Graph& g, const std::vector<int>& z, int k, const Theta1* previous) {
  return update_theta1(floored_one_hot(z, k), g, SbmMode::Tied, previous).theta1;
}

}  // namespace

std::vector<std::vector<NodeId>> supported_adjacency(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<std::vector<NodeId>> adj(n);
  std::vector<char> mark(n, 0);
  for (const auto& e : g.edges()) {
    for (NodeId x : g.neighbors(e.u)) mark[x] = 1;
    bool shared = false;
    for (NodeId x : g.neighbors(e.v)) {
      if (mark[x]) {
        shared = true;
        break;
      }
    }
    for (NodeId x : g.neighbors(e.u)) mark[x] = 0;
    if (shared) {
      adj[e.u].push_back(e.v);
      adj[e.v].push_back(e.u);
    }
  }
  return adj;
}

std::vector<int> propagate_labels(const std::vector<std::vector<NodeId>>& adj, double threshold, Rng& rng,
                                  std::size_t max_sweeps) {
  const std::size_t n = adj.size();
  std::vector<int> z(n);
  std::iota(z.begin(), z.end(), 0);
  std::vector<double> count(n, 1.0), tally(n, 0.0);
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    shuffle(order, rng);
    std::size_t moves = 0;
    for (NodeId i : order) {
      for (NodeId j : adj[i]) tally[z[j]] += 1.0;
      count[z[i]] -= 1.0;
      int best = z[i];
      double best_gain = tally[best] - threshold * count[best];
      for (NodeId j : adj[i]) {
        const int k = z[j];
        const double gain = tally[k] - threshold * count[k];
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best = k;
        }
      }
      for (NodeId j : adj[i]) tally[z[j]] = 0.0;
      if (best != z[i]) ++moves;
      z[i] = best;
      count[best] += 1.0;
    }
    if (moves == 0) break;
  }
  return relabel(std::move(z));
}

std::vector<int> fit_block_count(const Graph& g, std::vector<int> labels, int num_blocks) {
  if (num_blocks < 1) throw ValidationError("block count must be >= 1");
  if (labels.size() != g.num_nodes()) throw ValidationError("labelling and graph sizes differ");
  labels = relabel(std::move(labels));
  int clusters = 0;
  for (int x : labels) clusters = std::max(clusters, x + 1);

  std::vector<double> size(clusters, 0.0);
  for (int x : labels) size[x] += 1.0;
  std::vector<std::unordered_map<int, double>> links(clusters);
  for (const auto& e : g.edges()) {
    const int a = labels[e.u], b = labels[e.v];
    if (a == b) continue;
    links[a][b] += 1.0;
    links[b][a] += 1.0;
  }
  std::vector<int> parent(clusters), version(clusters, 0);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<char> alive(clusters, 1);
  int live = clusters;

  struct Candidate {
    double density;
    int a, b, va, vb;
    bool operator<(const Candidate& o) const {
      if (density != o.density) return density < o.density;
      if (a != o.a) return a > o.a;
      return b > o.b;
    }
  };
  std::priority_queue<Candidate> heap;
  auto push = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    heap.push({links[a][b] / (size[a] * size[b]), a, b, version[a], version[b]});
  };
  for (int a = 0; a < clusters; ++a) {
    for (const auto& [b, w] : links[a]) {
      if (a < b) push(a, b);
    }
  }
  auto merge = [&](int a, int b) {
    if (links[a].size() < links[b].size()) std::swap(a, b);
    alive[b] = 0;
    parent[b] = a;
    size[a] += size[b];
    links[a].erase(b);
    for (const auto& [c, w] : links[b]) {
      if (c == a) continue;
      links[a][c] += w;
      auto& back = links[c];
      back.erase(b);
      back[a] += w;
    }
    links[b].clear();
    ++version[a];
    --live;
    for (const auto& [c, w] : links[a]) push(a, c);
  };
  while (live > num_blocks && !heap.empty()) {
    const auto top = heap.top();
    heap.pop();
    if (!alive[top.a] || !alive[top.b] || version[top.a] != top.va || version[top.b] != top.vb) continue;
    merge(top.a, top.b);
  }
  if (live > num_blocks) {
    // Remaining clusters share no edges: pair off the smallest.
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> small;
    for (int c = 0; c < clusters; ++c) {
      if (alive[c]) small.emplace(size[c], c);
    }
    while (live > num_blocks) {
      const int a = small.top().second;
      small.pop();
      const int b = small.top().second;
      small.pop();
      merge(a, b);
      const int kept = alive[a] ? a : b;
      small.emplace(size[kept], kept);
    }
  }
  auto root = [&](int c) {
    while (parent[c] != c) c = parent[c];
    return c;
  };
  for (auto& x : labels) x = root(x);
  labels = relabel(std::move(labels));

  int count = live;
  while (count < num_blocks) {
    std::vector<std::size_t> sizes(count, 0);
    for (int x : labels) ++sizes[x];
    const int big = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    std::size_t seen = 0;
    for (auto& x : labels) {
      if (x == big && (seen++ % 2 == 1)) x = count;
    }
    ++count;
  }
  return labels;
}

std::size_t refine_partition(const Graph& g, int num_blocks, std::vector<int>& z, Rng& rng, std::size_t max_sweeps) {
  const std::size_t n = g.num_nodes();
  const int k = num_blocks;
  if (z.size() != n) throw ValidationError("partition and graph sizes differ");
  if (k == 1 || n < 2) return 0;
  Theta1 theta = fit_tied(g, z, k, nullptr);
  const double log_n = std::log(static_cast<double>(n));
  std::vector<double> count(k), tally(k, 0.0);
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t sweep = 0;
  while (sweep < max_sweeps) {
    ++sweep;
    std::fill(count.begin(), count.end(), 0.0);
    for (int x : z) count[x] += 1.0;
    const double eta_b = theta.between * log_n;
    const double sp_b = softplus(eta_b);
    shuffle(order, rng);
    std::size_t moves = 0;
    for (NodeId i : order) {
      for (NodeId j : g.neighbors(i)) tally[z[j]] += 1.0;
      count[z[i]] -= 1.0;
      int best = z[i];
      double best_gain = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double eta_w = theta.within * std::log(std::max(2.0, count[c] + 1.0));
        const double gain = tally[c] * (eta_w - eta_b) - count[c] * (softplus(eta_w) - sp_b) +
                            std::log((count[c] + 1.0) / static_cast<double>(n));
        if (gain > best_gain + 1e-12 || (c == z[i] && gain >= best_gain - 1e-12)) {
          best_gain = gain;
          best = c;
        }
      }
      for (NodeId j : g.neighbors(i)) tally[z[j]] = 0.0;
      if (best != z[i]) ++moves;
      z[i] = best;
      count[best] += 1.0;
    }
    theta = fit_tied(g, z, k, &theta);
    if (moves == 0) break;
  }
  return sweep;
}

double partition_bound(const Graph& g, const std::vector<int>& z, int num_blocks) {
  const SoftMembership a = floored_one_hot(z, num_blocks);
  const Theta1 theta = update_theta1(a, g, SbmMode::Tied).theta1;
  return lower_bound(a, theta, update_pi(a), g);
}

std::vector<int> seed_partition(const Graph& g, int num_blocks, double threshold, std::size_t random_starts,
                                std::uint64_t seed) {
  Rng rng(seed);
  auto best = propagate_labels(supported_adjacency(g), threshold, rng);
  best = fit_block_count(g, std::move(best), num_blocks);
  if (num_blocks == 1) return best;
  refine_partition(g, num_blocks, best, rng);
  double best_bound = partition_bound(g, best, num_blocks);
  for (std::size_t s = 0; s < random_starts; ++s) {
    std::vector<int> z(g.num_nodes());
    for (auto& x : z) x = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_blocks)));
    refine_partition(g, num_blocks, z, rng);
    const double bound = partition_bound(g, z, num_blocks);
    if (bound > best_bound) {
      best_bound = bound;
      best = std::move(z);
    }
  }
  return best;
}

}  // namespace lergm
