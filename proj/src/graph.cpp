#include "lergm/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "lergm/error.hpp"

namespace lergm {

Graph::Graph(std::size_t num_nodes, std::vector<Edge> edges) : num_nodes_(num_nodes) {
  for (auto& e : edges) {
    if (e.u == e.v) throw ValidationError("self-loop on node " + std::to_string(e.u + 1));
    if (e.u < 0 || e.v < 0 || static_cast<std::size_t>(std::max(e.u, e.v)) >= num_nodes) {
      throw ValidationError("edge endpoint out of range");
    }
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  offsets_.assign(num_nodes_ + 1, 0);
  for (const auto& e : edges_) {
    ++offsets_[e.u + 1];
    ++offsets_[e.v + 1];
  }
  for (std::size_t i = 0; i < num_nodes_; ++i) offsets_[i + 1] += offsets_[i];
  adjacency_.resize(offsets_.back());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : edges_) {
    adjacency_[cursor[e.u]++] = e.v;
    adjacency_[cursor[e.v]++] = e.u;
  }
  for (std::size_t i = 0; i < num_nodes_; ++i) {
    std::sort(adjacency_.begin() + offsets_[i], adjacency_.begin() + offsets_[i + 1]);
  }
}

bool Graph::has_edge(NodeId i, NodeId j) const {
  auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

Membership::Membership(std::vector<int> assignment, int num_blocks)
    : assignment_(std::move(assignment)), num_blocks_(num_blocks) {
  if (num_blocks_ < 1) throw ValidationError("membership needs at least one block");
  for (int b : assignment_) {
    if (b < 0 || b >= num_blocks_) throw ValidationError("block id out of range");
  }
}

std::vector<NodeId> Membership::members(int k) const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    if (assignment_[i] == k) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

SoftMembership::SoftMembership(std::size_t num_nodes, int num_blocks)
    : num_nodes_(num_nodes), num_blocks_(num_blocks), values_(num_nodes * num_blocks, 0.0) {
  if (num_blocks < 1) throw ValidationError("soft membership needs at least one block");
}

SoftMembership::SoftMembership(std::size_t num_nodes, int num_blocks, std::vector<double> values)
    : num_nodes_(num_nodes), num_blocks_(num_blocks), values_(std::move(values)) {
  if (num_blocks < 1) throw ValidationError("soft membership needs at least one block");
  if (values_.size() != num_nodes * static_cast<std::size_t>(num_blocks)) {
    throw ValidationError("soft membership size mismatch");
  }
}

SoftMembership SoftMembership::from_hard(const Membership& z) {
  SoftMembership a(z.num_nodes(), z.num_blocks());
  for (std::size_t i = 0; i < z.num_nodes(); ++i) a(i, z.block(static_cast<NodeId>(i))) = 1.0;
  return a;
}

void SoftMembership::validate(double tol) const {
  for (std::size_t i = 0; i < num_nodes_; ++i) {
    double sum = 0.0;
    for (double v : row(i)) {
      if (!(v >= 0.0)) throw ValidationError("soft membership has a negative or NaN entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) {
      throw ValidationError("soft membership row " + std::to_string(i + 1) + " does not sum to 1");
    }
  }
}

Membership SoftMembership::harden() const {
  std::vector<int> z(num_nodes_);
  for (std::size_t i = 0; i < num_nodes_; ++i) {
    auto r = row(i);
    z[i] = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return Membership(std::move(z), num_blocks_);
}

std::vector<std::size_t> neighborhood_sizes(const Membership& z) {
  std::vector<std::size_t> sizes(z.num_blocks(), 0);
  for (int b : z.assignment()) ++sizes[b];
  return sizes;
}

Subgraph within_subgraph(const Graph& g, const Membership& z, int k) {
  Subgraph sub;
  sub.nodes = z.members(k);
  std::vector<NodeId> local(g.num_nodes(), -1);
  for (std::size_t a = 0; a < sub.nodes.size(); ++a) local[sub.nodes[a]] = static_cast<NodeId>(a);
  std::vector<Edge> edges;
  for (NodeId i : sub.nodes) {
    for (NodeId j : g.neighbors(i)) {
      if (j > i && local[j] >= 0) edges.push_back({local[i], local[j]});
    }
  }
  sub.graph = Graph(sub.nodes.size(), std::move(edges));
  return sub;
}

std::size_t between_edge_count(const Graph& g, const Membership& z) {
  std::size_t count = 0;
  for (const auto& e : g.edges()) count += z.block(e.u) != z.block(e.v);
  return count;
}

namespace {

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

bool parse_positive(const std::string& token, long long& value) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last && value >= 1;
}

// Splits on whitespace.
std::vector<std::string> tokens_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

// Recognizes `n=<count>` with optional spaces around '='.
bool parse_header(const std::string& text, long long& n, std::size_t line_no) {
  auto eq = text.find('=');
  if (eq == std::string::npos) return false;
  auto key = tokens_of(text.substr(0, eq));
  if (key.size() != 1 || key[0] != "n") throw ParseError("unknown header '" + text + "'", line_no);
  auto val = tokens_of(text.substr(eq + 1));
  if (val.size() != 1 || !parse_positive(val[0], n)) {
    throw ParseError("malformed node-count header", line_no);
  }
  return true;
}

}  // namespace

Graph load_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  long long max_id = 0;
  std::optional<long long> declared;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = strip_comment(line);
    long long header_n = 0;
    if (parse_header(body, header_n, line_no)) {
      declared = header_n;
      continue;
    }
    auto toks = tokens_of(body);
    if (toks.empty()) continue;
    long long a = 0, b = 0;
    if (toks.size() != 2 || !parse_positive(toks[0], a) || !parse_positive(toks[1], b)) {
      throw ParseError("expected two positive node ids", line_no);
    }
    if (a == b) throw ValidationError("self-loop at line " + std::to_string(line_no));
    if (a > (1LL << 30) || b > (1LL << 30)) throw ParseError("node id too large", line_no);
    max_id = std::max({max_id, a, b});
    edges.push_back({static_cast<NodeId>(a - 1), static_cast<NodeId>(b - 1)});
  }
  long long n = max_id;
  if (declared) {
    if (*declared < max_id) throw ValidationError("node id exceeds declared node count");
    n = *declared;
  }
  return Graph(static_cast<std::size_t>(n), std::move(edges));
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << "n=" << g.num_nodes() << '\n';
  for (const auto& e : g.edges()) out << e.u + 1 << ' ' << e.v + 1 << '\n';
}

Membership load_membership(std::istream& in, std::optional<int> num_blocks) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::pair<long long, long long>> rows;
  long long max_node = 0, max_block = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = tokens_of(strip_comment(line));
    if (toks.empty()) continue;
    long long node = 0, block = 0;
    if (toks.size() != 2 || !parse_positive(toks[0], node) || !parse_positive(toks[1], block)) {
      throw ParseError("expected `node_id block_id` with positive ids", line_no);
    }
    if (node > (1LL << 30) || block > (1LL << 30)) throw ParseError("id too large", line_no);
    rows.emplace_back(node, block);
    max_node = std::max(max_node, node);
    max_block = std::max(max_block, block);
  }
  const int k = num_blocks.value_or(static_cast<int>(max_block));
  if (max_block > k) throw ValidationError("block id exceeds the declared block count");
  std::vector<int> z(static_cast<std::size_t>(max_node), -1);
  for (auto [node, block] : rows) {
    if (z[node - 1] != -1) throw ValidationError("node " + std::to_string(node) + " listed twice");
    z[node - 1] = static_cast<int>(block - 1);
  }
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] < 0) throw ValidationError("node " + std::to_string(i + 1) + " has no block");
  }
  if (z.empty()) throw ValidationError("empty membership");
  return Membership(std::move(z), k);
}

void write_membership(std::ostream& out, const Membership& z) {
  for (std::size_t i = 0; i < z.num_nodes(); ++i) {
    out << i + 1 << ' ' << z.block(static_cast<NodeId>(i)) + 1 << '\n';
  }
}

}  // namespace lergm
