#include "lergm/model.hpp"

#include <algorithm>
#include <sstream>

#include "lergm/error.hpp"

namespace lergm {

std::size_t Term::stat_dim() const {
  switch (kind) {
    case TermKind::WithinEdges:
    case TermKind::WithinTransitiveEdges:
      return 1;
    case TermKind::WithinGwDegree:
    case TermKind::WithinGwesp:
      return static_cast<std::size_t>(truncation);
    case TermKind::BetweenEdges:
      return 0;
  }
  return 0;
}

std::size_t Term::theta_dim() const {
  return kind == TermKind::WithinGwDegree || kind == TermKind::WithinGwesp ? 2 : 1;
}

std::string Term::name() const {
  switch (kind) {
    case TermKind::WithinEdges: return "edges";
    case TermKind::WithinTransitiveEdges: return "transitive";
    case TermKind::WithinGwDegree: return "gwdegree";
    case TermKind::WithinGwesp: return "gwesp";
    case TermKind::BetweenEdges: return "between";
  }
  return "?";
}

ModelSpec::ModelSpec(std::vector<Term> terms) : terms_(std::move(terms)) {
  std::size_t between = 0, within_edges = 0;
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const auto& term = terms_[t];
    const auto dup = std::count_if(terms_.begin(), terms_.end(),
                                   [&](const Term& o) { return o.kind == term.kind; });
    if (dup > 1) throw ValidationError("term '" + term.name() + "' listed twice");
    if ((term.kind == TermKind::WithinGwDegree || term.kind == TermKind::WithinGwesp) &&
        term.truncation < 1) {
      throw ValidationError("geometrically weighted term needs truncation >= 1");
    }
    if (term.kind == TermKind::BetweenEdges) {
      ++between;
      between_term_ = t;
    }
    within_edges += term.kind == TermKind::WithinEdges;
    theta_offsets_.push_back(theta_dim_);
    stat_offsets_.push_back(within_dim_);
    theta_dim_ += term.theta_dim();
    within_dim_ += term.stat_dim();
  }
  if (between != 1) throw ValidationError("model needs exactly one between-edge term");
  if (within_edges != 1) throw ValidationError("model needs a within-edge term");
}

ModelSpec ModelSpec::edges_only() {
  return ModelSpec({{TermKind::WithinEdges}, {TermKind::BetweenEdges}});
}

ModelSpec ModelSpec::edge_transitive() {
  return ModelSpec({{TermKind::WithinEdges}, {TermKind::WithinTransitiveEdges}, {TermKind::BetweenEdges}});
}

ModelSpec ModelSpec::curved(int gwd_truncation, int gwesp_truncation) {
  return ModelSpec({{TermKind::WithinEdges},
                    {TermKind::WithinGwDegree, gwd_truncation},
                    {TermKind::WithinGwesp, gwesp_truncation},
                    {TermKind::BetweenEdges}});
}

ModelSpec ModelSpec::from_names(const std::string& names, int gwd_truncation, int gwesp_truncation) {
  std::vector<Term> terms;
  std::stringstream ss(names);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    if (item == "edges") terms.push_back({TermKind::WithinEdges});
    else if (item == "transitive") terms.push_back({TermKind::WithinTransitiveEdges});
    else if (item == "gwdegree") terms.push_back({TermKind::WithinGwDegree, gwd_truncation});
    else if (item == "gwesp") terms.push_back({TermKind::WithinGwesp, gwesp_truncation});
    else if (item == "between") terms.push_back({TermKind::BetweenEdges});
    else throw ValidationError("unknown model term '" + item + "'");
  }
  return ModelSpec(std::move(terms));
}

std::vector<bool> ModelSpec::edge_coordinates() const {
  std::vector<bool> out(theta_dim_, false);
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    if (terms_[t].kind == TermKind::WithinEdges || terms_[t].kind == TermKind::BetweenEdges) {
      out[theta_offsets_[t]] = true;
    }
  }
  return out;
}

std::vector<std::string> ModelSpec::theta_names() const {
  std::vector<std::string> out;
  for (const auto& term : terms_) {
    if (term.theta_dim() == 2) {
      out.push_back(term.name() + ".scale");
      out.push_back(term.name() + ".decay");
    } else {
      out.push_back(term.name());
    }
  }
  return out;
}

std::string ModelSpec::term_list() const {
  std::string out;
  for (const auto& term : terms_) {
    if (!out.empty()) out += ',';
    out += term.name();
  }
  return out;
}

bool ModelSpec::has(TermKind kind) const {
  return std::any_of(terms_.begin(), terms_.end(), [&](const Term& t) { return t.kind == kind; });
}

int ModelSpec::max_truncation(TermKind kind) const {
  for (const auto& t : terms_) {
    if (t.kind == kind) return t.truncation;
  }
  return 0;
}

bool operator==(const ModelSpec& a, const ModelSpec& b) {
  if (a.terms_.size() != b.terms_.size()) return false;
  for (std::size_t t = 0; t < a.terms_.size(); ++t) {
    if (a.terms_[t].kind != b.terms_[t].kind || a.terms_[t].truncation != b.terms_[t].truncation) {
      return false;
    }
  }
  return true;
}

double gw_weight(double decay, int t, int truncation) {
  if (t < 1 || t > truncation) return 0.0;
  const double r = -std::expm1(-decay);  // 1 - exp(-decay)
  return std::exp(decay) * (1.0 - std::pow(r, t));
}

void validate_theta(std::span<const double> theta, const ModelSpec& m) {
  if (theta.size() != m.theta_dim()) {
    throw ValidationError("theta has " + std::to_string(theta.size()) + " coordinates, model needs " +
                          std::to_string(m.theta_dim()));
  }
  for (double v : theta) {
    if (!std::isfinite(v)) throw ValidationError("theta has a non-finite coordinate");
  }
}

std::vector<double> within_eta(std::span<const double> theta, std::size_t block_size, const ModelSpec& m) {
  validate_theta(theta, m);
  std::vector<double> eta(m.within_dim(), 0.0);
  if (block_size <= 1) return eta;
  const double scale = std::log(static_cast<double>(block_size));
  for (std::size_t t = 0; t < m.terms().size(); ++t) {
    const auto& term = m.terms()[t];
    const std::size_t th = m.theta_offset(t);
    const std::size_t so = m.stat_offset(t);
    switch (term.kind) {
      case TermKind::WithinEdges:
      case TermKind::WithinTransitiveEdges:
        eta[so] = theta[th] * scale;
        break;
      case TermKind::WithinGwDegree:
      case TermKind::WithinGwesp:
        for (int d = 1; d <= term.truncation; ++d) {
          eta[so + d - 1] = theta[th] * scale * gw_weight(theta[th + 1], d, term.truncation);
        }
        break;
      case TermKind::BetweenEdges:
        break;
    }
  }
  return eta;
}

double between_eta(std::span<const double> theta, std::size_t num_nodes, const ModelSpec& m) {
  validate_theta(theta, m);
  if (num_nodes <= 1) return 0.0;
  return theta[m.between_theta_index()] * std::log(static_cast<double>(num_nodes));
}

std::vector<double> natural_parameters(std::span<const double> theta, const Membership& z, const ModelSpec& m) {
  const auto sizes = neighborhood_sizes(z);
  const std::size_t w = m.within_dim();
  std::vector<double> eta(m.stat_dim(z.num_blocks()), 0.0);
  for (int k = 0; k < z.num_blocks(); ++k) {
    const auto block = within_eta(theta, sizes[k], m);
    std::copy(block.begin(), block.end(), eta.begin() + k * w);
  }
  eta.back() = between_eta(theta, z.num_nodes(), m);
  return eta;
}

std::vector<double> within_jacobian(std::span<const double> theta, std::size_t block_size, const ModelSpec& m) {
  validate_theta(theta, m);
  const std::size_t p = m.theta_dim();
  std::vector<double> jac(m.within_dim() * p, 0.0);
  if (block_size <= 1) return jac;
  const double scale = std::log(static_cast<double>(block_size));
  for (std::size_t t = 0; t < m.terms().size(); ++t) {
    const auto& term = m.terms()[t];
    const std::size_t th = m.theta_offset(t);
    const std::size_t so = m.stat_offset(t);
    switch (term.kind) {
      case TermKind::WithinEdges:
      case TermKind::WithinTransitiveEdges:
        jac[so * p + th] = scale;
        break;
      case TermKind::WithinGwDegree:
      case TermKind::WithinGwesp: {
        const double a = theta[th];
        const double b = theta[th + 1];
        const double r = -std::expm1(-b);
        const double eb = std::exp(b);
        for (int d = 1; d <= term.truncation; ++d) {
          const double w = eb * (1.0 - std::pow(r, d));
          // d/db [e^b (1 - r^d)] = e^b (1 - r^d) - d r^(d-1)
          const double dw = w - d * std::pow(r, d - 1);
          const std::size_t row = so + d - 1;
          jac[row * p + th] = scale * w;
          jac[row * p + th + 1] = scale * a * dw;
        }
        break;
      }
      case TermKind::BetweenEdges:
        break;
    }
  }
  return jac;
}

namespace {

// Adjacency of a graph treated as one block.
class GraphAdjacency {
 public:
  explicit GraphAdjacency(const Graph& g) : g_(g) {}
  std::size_t degree(NodeId i) const { return g_.degree(i); }
  std::size_t common_count(NodeId i, NodeId j) const {
    auto a = g_.neighbors(i);
    auto b = g_.neighbors(j);
    std::size_t c = 0;
    auto p = a.begin();
    auto q = b.begin();
    while (p != a.end() && q != b.end()) {
      if (*p < *q) ++p;
      else if (*q < *p) ++q;
      else {
        ++c;
        ++p;
        ++q;
      }
    }
    return c;
  }
  template <typename F>
  void for_each_edge(F&& f) const {
    for (const auto& e : g_.edges()) f(e.u, e.v);
  }

 private:
  const Graph& g_;
};

template <typename Adj>
StatVector block_statistics_impl(const Adj& adj, std::size_t m_nodes, const ModelSpec& m) {
  StatVector s(m.within_dim(), 0.0);
  const bool need_sp = m.has(TermKind::WithinTransitiveEdges) || m.has(TermKind::WithinGwesp);
  for (std::size_t t = 0; t < m.terms().size(); ++t) {
    const auto& term = m.terms()[t];
    const std::size_t so = m.stat_offset(t);
    if (term.kind == TermKind::WithinGwDegree) {
      for (std::size_t i = 0; i < m_nodes; ++i) {
        const auto d = adj.degree(static_cast<NodeId>(i));
        if (d >= 1 && d <= static_cast<std::size_t>(term.truncation)) s[so + d - 1] += 1.0;
      }
    }
  }
  const auto edge_term = std::find_if(m.terms().begin(), m.terms().end(),
                                      [](const Term& t) { return t.kind == TermKind::WithinEdges; });
  const std::size_t edge_off = m.stat_offset(edge_term - m.terms().begin());
  std::size_t trans_off = 0, esp_off = 0;
  int esp_trunc = 0;
  for (std::size_t t = 0; t < m.terms().size(); ++t) {
    if (m.terms()[t].kind == TermKind::WithinTransitiveEdges) trans_off = m.stat_offset(t);
    if (m.terms()[t].kind == TermKind::WithinGwesp) {
      esp_off = m.stat_offset(t);
      esp_trunc = m.terms()[t].truncation;
    }
  }
  const bool has_trans = m.has(TermKind::WithinTransitiveEdges);
  const bool has_esp = m.has(TermKind::WithinGwesp);
  adj.for_each_edge([&](NodeId i, NodeId j) {
    s[edge_off] += 1.0;
    if (!need_sp) return;
    const auto sp = adj.common_count(i, j);
    if (has_trans && sp >= 1) s[trans_off] += 1.0;
    if (has_esp && sp >= 1 && sp <= static_cast<std::size_t>(esp_trunc)) s[esp_off + sp - 1] += 1.0;
  });
  return s;
}

inline void bump(std::span<double> out, std::size_t offset, std::size_t bin, int truncation, double by) {
  if (bin >= 1 && bin <= static_cast<std::size_t>(truncation)) out[offset + bin - 1] += by;
}

// Fills within coordinates of s(x + ij) - s(x - ij) for the block `adj`.
template <typename Adj>
void within_delta(const Adj& adj, const ModelSpec& m, NodeId i, NodeId j, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t present = adj.has(i, j) ? 1 : 0;
  const std::size_t deg_i = adj.degree(i) - present;
  const std::size_t deg_j = adj.degree(j) - present;

  bool need_sp = false;
  for (const auto& t : m.terms()) {
    need_sp |= t.kind == TermKind::WithinTransitiveEdges || t.kind == TermKind::WithinGwesp;
  }
  // Shared-partner counts (without edge ij) of the edges i-h and j-h for
  // common neighbors h; toggling ij shifts each by one.
  std::size_t common = 0;
  thread_local std::vector<std::pair<std::size_t, std::size_t>> partner_sp;
  partner_sp.clear();
  if (need_sp) {
    adj.for_each_common(i, j, [&](NodeId h) {
      ++common;
      partner_sp.emplace_back(adj.common_count(i, h) - present, adj.common_count(j, h) - present);
    });
  }

  for (std::size_t t = 0; t < m.terms().size(); ++t) {
    const auto& term = m.terms()[t];
    const std::size_t so = m.stat_offset(t);
    switch (term.kind) {
      case TermKind::WithinEdges:
        out[so] = 1.0;
        break;
      case TermKind::WithinTransitiveEdges: {
        double d = common >= 1 ? 1.0 : 0.0;
        for (auto [a, b] : partner_sp) d += (a == 0) + (b == 0);
        out[so] = d;
        break;
      }
      case TermKind::WithinGwDegree:
        for (std::size_t deg : {deg_i, deg_j}) {
          bump(out, so, deg, term.truncation, -1.0);
          bump(out, so, deg + 1, term.truncation, 1.0);
        }
        break;
      case TermKind::WithinGwesp:
        bump(out, so, common, term.truncation, 1.0);
        for (auto [a, b] : partner_sp) {
          for (std::size_t sp : {a, b}) {
            bump(out, so, sp, term.truncation, -1.0);
            bump(out, so, sp + 1, term.truncation, 1.0);
          }
        }
        break;
      case TermKind::BetweenEdges:
        break;
    }
  }
}

}  // namespace

StatVector block_statistics(const Graph& block, const ModelSpec& m) {
  return block_statistics_impl(GraphAdjacency(block), block.num_nodes(), m);
}

StatVector block_statistics(const BlockAdjacency& block, const ModelSpec& m) {
  return block_statistics_impl(block, block.size(), m);
}

StatVector sufficient_statistics(const Graph& g, const Membership& z, const ModelSpec& m) {
  if (g.num_nodes() != z.num_nodes()) throw ValidationError("graph and membership sizes differ");
  const std::size_t w = m.within_dim();
  StatVector s(m.stat_dim(z.num_blocks()), 0.0);
  for (int k = 0; k < z.num_blocks(); ++k) {
    const auto sub = within_subgraph(g, z, k);
    const auto block = block_statistics(sub.graph, m);
    std::copy(block.begin(), block.end(), s.begin() + k * w);
  }
  s.back() = static_cast<double>(between_edge_count(g, z));
  return s;
}

StatVector change_statistics(const Graph& g, const Membership& z, const ModelSpec& m, NodeId i, NodeId j) {
  if (i == j) throw ValidationError("change statistic of a self-pair");
  if (g.num_nodes() != z.num_nodes()) throw ValidationError("graph and membership sizes differ");
  StatVector delta(m.stat_dim(z.num_blocks()), 0.0);
  const int k = z.block(i);
  if (k != z.block(j)) {
    delta.back() = 1.0;
    return delta;
  }
  const std::size_t w = m.within_dim();
  within_delta(BlockView(g, z, k), m, i, j, std::span<double>(delta).subspan(k * w, w));
  return delta;
}

void block_change_statistics(const BlockAdjacency& block, const ModelSpec& m, NodeId i, NodeId j,
                             std::span<double> delta) {
  within_delta(block, m, i, j, delta);
}

double log_unnormalized(const Graph& g, const Membership& z, const ModelSpec& m, std::span<const double> theta) {
  const auto eta = natural_parameters(theta, z, m);
  const auto s = sufficient_statistics(g, z, m);
  double total = 0.0;
  for (std::size_t c = 0; c < eta.size(); ++c) total += eta[c] * s[c];
  return total;
}

std::vector<double> zero_dependence_terms(std::span<const double> theta, const ModelSpec& m) {
  std::vector<double> out(theta.begin(), theta.end());
  const auto edge = m.edge_coordinates();
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (!edge[c]) out[c] = 0.0;
  }
  return out;
}

}  // namespace lergm
