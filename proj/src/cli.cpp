#include "lergm/cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "lergm/error.hpp"
#include "lergm/exact.hpp"
#include "lergm/pipeline.hpp"
#include "lergm/rng.hpp"

namespace lergm::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool parse_real(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(v);
}

bool parse_uint(const std::string& s, std::uint64_t& v) {
  if (s.empty() || s[0] == '-' || s[0] == '+') return false;
  char* end = nullptr;
  errno = 0;
  v = std::strtoull(s.c_str(), &end, 10);
  return end == s.c_str() + s.size() && errno == 0;
}

enum class Kind { UInt, Real, RealList, UIntList, Text, Terms, Mode, Init, Design };

const std::map<std::string, std::pair<Kind, std::string>>& key_table() {
  static const std::map<std::string, std::pair<Kind, std::string>> table = {
      {"model.terms", {Kind::Terms, "edges,transitive,between"}},
      {"model.gwd_trunc", {Kind::UInt, "20"}},
      {"model.gwesp_trunc", {Kind::UInt, "12"}},
      {"model.theta", {Kind::RealList, ""}},
      {"sim.design", {Kind::Design, ""}},
      {"sim.n", {Kind::UInt, "0"}},
      {"sim.block_sizes", {Kind::UIntList, ""}},
      {"sim.pi", {Kind::RealList, ""}},
      {"sim.burn_in", {Kind::UInt, "200"}},
      {"sim.interval", {Kind::UInt, "10"}},
      {"step1.K", {Kind::UInt, "1"}},
      {"step1.gamma", {Kind::Real, "1e-6"}},
      {"step1.max_iters", {Kind::UInt, "500"}},
      {"step1.restarts", {Kind::UInt, "5"}},
      {"step1.qp_tol", {Kind::Real, "1e-10"}},
      {"step1.mode", {Kind::Mode, "tied"}},
      {"step1.init", {Kind::Init, "clustered"}},
      {"step1.init_threshold", {Kind::Real, "0.1"}},
      {"step1.init_smoothing", {Kind::Real, "0"}},
      {"step1.init_random_starts", {Kind::UInt, "20"}},
      {"step1.floor", {Kind::Real, "1e-6"}},
      {"step2.samples", {Kind::UInt, "1000"}},
      {"step2.burn_in", {Kind::UInt, "200"}},
      {"step2.interval", {Kind::UInt, "10"}},
      {"step2.max_outer", {Kind::UInt, "20"}},
      {"step2.trust_radius", {Kind::Real, "0.5"}},
      {"step2.tol", {Kind::Real, "0.01"}},
      {"step2.min_ess", {Kind::Real, "0.05"}},
      {"step2.theta0", {Kind::RealList, ""}},
      {"gof.samples", {Kind::UInt, "100"}},
      {"gof.geodesic_cap", {Kind::UInt, "20"}},
      {"gof.dsp_cap", {Kind::UInt, "25"}},
      {"gof.esp_cap", {Kind::UInt, "25"}},
      {"replicate.design", {Kind::Design, "small-balanced"}},
      {"replicate.count", {Kind::UInt, "1"}},
      {"seed", {Kind::UInt, "1"}},
      {"workers", {Kind::UInt, "1"}},
      {"outdir", {Kind::Text, "runs"}},
  };
  return table;
}

bool value_ok(Kind kind, const std::string& v) {
  double d;
  std::uint64_t u;
  switch (kind) {
    case Kind::UInt:
      return parse_uint(v, u);
    case Kind::Real:
      return parse_real(v, d);
    case Kind::RealList:
      for (const auto& x : split_list(v)) {
        if (!parse_real(x, d)) return false;
      }
      return true;
    case Kind::UIntList:
      for (const auto& x : split_list(v)) {
        if (!parse_uint(x, u)) return false;
      }
      return true;
    case Kind::Text:
      return !v.empty();
    case Kind::Terms:
      for (const auto& x : split_list(v)) {
        if (x != "edges" && x != "transitive" && x != "gwdegree" && x != "gwesp" && x != "between") return false;
      }
      return !split_list(v).empty();
    case Kind::Mode:
      return v == "tied" || v == "untied";
    case Kind::Init:
      return v == "random" || v == "degree" || v == "clustered";
    case Kind::Design: {
      if (v.empty()) return true;
      const auto names = design_names();
      return std::find(names.begin(), names.end(), v) != names.end();
    }
  }
  return false;
}

std::uint64_t as_uint(const Settings& s, const std::string& key) {
  std::uint64_t v = 0;
  parse_uint(s.values.at(key), v);
  return v;
}
double as_real(const Settings& s, const std::string& key) {
  double v = 0.0;
  parse_real(s.values.at(key), v);
  return v;
}
std::vector<double> as_reals(const Settings& s, const std::string& key) {
  std::vector<double> out;
  for (const auto& x : split_list(s.values.at(key))) {
    double v = 0.0;
    parse_real(x, v);
    out.push_back(v);
  }
  return out;
}

// ---- output helpers ----

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y%m%d-%H%M%S");
  return os.str();
}

fs::path make_run_dir(const std::string& outdir, const std::string& command) {
  const fs::path base = fs::path(outdir) / (command + "-" + timestamp());
  fs::path dir = base;
  for (int i = 1; fs::exists(dir); ++i) dir = base.string() + "-" + std::to_string(i);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  if (!os) throw ValidationError("cannot write " + p.string());
  os << text;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = tag("");
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

Graph read_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open graph file " + path);
  return load_edge_list(in);
}

Membership read_membership(const std::string& path, std::optional<int> k = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open membership file " + path);
  return load_membership(in, k);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json theta_json(const ModelSpec& m, const std::vector<double>& theta) {
  json j = json::object();
  const auto names = m.theta_names();
  for (std::size_t c = 0; c < theta.size() && c < names.size(); ++c) j[names[c]] = theta[c];
  return j;
}

json step1_json(const Step1Result& r) {
  json j;
  j["K"] = r.pi.size();
  j["pi"] = r.pi;
  json t;
  t["mode"] = r.theta1.mode == SbmMode::Tied ? "tied" : "untied";
  if (r.theta1.mode == SbmMode::Tied) {
    t["within"] = r.theta1.within;
    t["between"] = r.theta1.between;
    t["soft_block_sizes"] = r.theta1.block_sizes;
  }
  t["pair_eta"] = r.theta1.pair_eta();
  j["theta1"] = t;
  j["lower_bound_trace"] = r.trace;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["best_restart"] = r.best_restart + 1;
  j["restart_lower_bounds"] = r.restart_bounds;
  std::vector<int> empty;
  for (int k : r.empty_blocks) empty.push_back(k + 1);
  j["empty_blocks"] = empty;
  j["warnings"] = r.warnings;
  return j;
}

json step2_json(const ModelSpec& m, const Step2Result& r) {
  json j;
  j["names"] = m.theta_names();
  j["theta_hat"] = theta_json(m, r.theta_hat);
  j["standard_errors"] = theta_json(m, r.standard_errors);
  std::vector<std::string> deficient;
  for (std::size_t c = 0; c < r.rank_deficient.size(); ++c) {
    if (r.rank_deficient[c]) deficient.push_back(m.theta_names()[c]);
  }
  j["rank_deficient"] = deficient;
  const std::size_t d = r.theta_hat.size();
  json f = json::array();
  for (std::size_t a = 0; a < d; ++a) {
    f.push_back(std::vector<double>(r.fisher.begin() + a * d, r.fisher.begin() + (a + 1) * d));
  }
  j["fisher_information"] = f;
  j["ess_trace"] = r.ess_trace;
  j["theta_trace"] = r.theta_trace;
  j["outer_iterations"] = r.outer_iterations;
  j["converged"] = r.converged;
  j["warnings"] = r.warnings;
  return j;
}

// ---- manifest ----

struct Run {
  std::string command;
  Settings settings;
  RunConfig cfg;
  fs::path dir;
  json inputs = json::object();
  json outputs = json::array();
  json timings = json::object();
  json warnings = json::array();
  std::chrono::steady_clock::time_point began = std::chrono::steady_clock::now();

  void input(const std::string& name, const std::string& path) {
    inputs[name] = {{"path", path}, {"digest", file_digest(path)}};
  }
  void output(const std::string& file) { outputs.push_back(file); }
  template <typename F>
  auto timed(const std::string& phase, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto result = f();
    timings[phase] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  }
  void finish() {
    json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["build"] = {{"compiler", __VERSION__},
                  {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)}};
    m["seed"] = cfg.seed;
    m["workers"] = cfg.workers;
    json c = json::object();
    for (const auto& [k, v] : settings.values) c[k] = v;
    m["config"] = c;
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    m["warnings"] = warnings;
    timings["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - began).count();
    m["timings"] = timings;
    write_json(dir / "manifest.json", m);
  }
};

// ---- subcommands ----

int cmd_simulate(Run& run, std::ostream& out) {
  const auto& cfg = run.cfg;
  const ModelSpec& m = cfg.model;
  std::vector<double> theta = cfg.theta;
  Membership z;
  McmcConfig mc = cfg.sim_mcmc;
  mc.seed = derive_seed(cfg.seed, {tag("simulate")});
  Graph g;
  if (!cfg.sim_design.empty()) {
    const auto design = design_by_name(cfg.sim_design);
    if (theta.empty()) theta = design.theta;
    z = membership_from_sizes(design.block_sizes);
  } else if (!cfg.sim_block_sizes.empty()) {
    z = membership_from_sizes(cfg.sim_block_sizes);
  } else if (!cfg.sim_pi.empty()) {
    if (cfg.sim_n < 1) throw ValidationError("sim.n must be set when sampling memberships from sim.pi");
    z = sample_memberships(cfg.sim_pi, cfg.sim_n, derive_seed(cfg.seed, {tag("membership")}));
  } else {
    throw ValidationError("simulate needs sim.design, sim.block_sizes, or sim.n with sim.pi");
  }
  if (theta.empty()) throw ValidationError("simulate needs model.theta (or a design)");
  g = run.timed("simulate", [&] { return simulate_graph(z, theta, m, mc, cfg.workers); });

  std::ostringstream gs, zs;
  write_edge_list(gs, g);
  write_membership(zs, z);
  write_text(run.dir / "graph.tsv", gs.str());
  write_text(run.dir / "membership.tsv", zs.str());
  run.output("graph.tsv");
  run.output("membership.tsv");
  json info;
  info["n"] = g.num_nodes();
  info["edges"] = g.num_edges();
  info["K"] = z.num_blocks();
  info["theta"] = theta_json(m, theta);
  info["statistics"] = sufficient_statistics(g, z, m);
  write_json(run.dir / "simulation.json", info);
  run.output("simulation.json");
  out << "simulated " << g.num_nodes() << " nodes, " << g.num_edges() << " edges\n";
  return 0;
}

int cmd_estimate(Run& run, const std::string& graph_path, const std::string& membership_path, bool step1_only,
                 std::ostream& out) {
  const auto& cfg = run.cfg;
  run.input("graph", graph_path);
  const Graph g = read_graph(graph_path);
  std::optional<Membership> given;
  if (!membership_path.empty()) {
    run.input("membership", membership_path);
    given = read_membership(membership_path);
    if (given->num_nodes() != g.num_nodes()) throw ValidationError("membership and graph sizes differ");
  }
  EstimateConfig ec;
  ec.model = cfg.model;
  ec.step1 = cfg.step1;
  ec.step2 = cfg.step2;
  ec.step1_only = step1_only;
  if (given && step1_only) throw ValidationError("--step1-only cannot be combined with --membership");

  EstimationResult fit;
  if (!given) {
    fit.step1 = run.timed("step1", [&] { return run_step1(g, ec.step1); });
    fit.z_hat = fit.step1->z_hat;
    write_json(run.dir / "step1.json", step1_json(*fit.step1));
    run.output("step1.json");
    for (const auto& w : fit.step1->warnings) run.warnings.push_back("step1: " + w);
    out << "step1: " << fit.step1->iterations << " iterations, lower bound " << fit.step1->trace.back() << "\n";
  } else {
    fit.z_hat = *given;
  }
  std::ostringstream zs;
  write_membership(zs, fit.z_hat);
  write_text(run.dir / "membership.tsv", zs.str());
  run.output("membership.tsv");
  if (step1_only) return 0;

  Step2Config s2cfg = ec.step2;
  if (fit.step1 && s2cfg.theta0.empty() && fit.step1->theta1.mode == SbmMode::Tied) {
    s2cfg.theta0.assign(ec.model.theta_dim(), 0.0);
    for (std::size_t t = 0; t < ec.model.terms().size(); ++t) {
      if (ec.model.terms()[t].kind == TermKind::WithinEdges) {
        s2cfg.theta0[ec.model.theta_offset(t)] = fit.step1->theta1.within;
      }
    }
    s2cfg.theta0[ec.model.between_theta_index()] = fit.step1->theta1.between;
  }
  const auto s2 = run.timed("step2", [&] { return run_step2(g, fit.z_hat, ec.model, s2cfg); });
  write_json(run.dir / "theta.json", step2_json(cfg.model, s2));
  run.output("theta.json");
  json blocks = json::array();
  for (double s : s2.block_seconds) blocks.push_back(s);
  run.timings["step2_block_sampling"] = blocks;
  for (const auto& w : s2.warnings) run.warnings.push_back("step2: " + w);
  const auto names = cfg.model.theta_names();
  for (std::size_t c = 0; c < names.size(); ++c) {
    out << std::left << std::setw(20) << names[c] << std::right << std::setw(12) << s2.theta_hat[c]
        << "  se " << s2.standard_errors[c] << "\n";
  }
  return 0;
}

int cmd_gof(Run& run, const std::string& graph_path, const std::string& membership_path, std::ostream& out) {
  const auto& cfg = run.cfg;
  run.input("graph", graph_path);
  run.input("membership", membership_path);
  const Graph g = read_graph(graph_path);
  const Membership z = read_membership(membership_path);
  if (z.num_nodes() != g.num_nodes()) throw ValidationError("membership and graph sizes differ");
  if (cfg.theta.empty()) throw ValidationError("gof needs model.theta");
  validate_theta(cfg.theta, cfg.model);
  if (cfg.gof_samples < 2) throw ValidationError("gof.samples must be >= 2");
  const auto observed = gof_statistics(g, z, cfg.gof, cfg.workers);
  auto sims = run.timed("simulate", [&] {
    std::vector<GofSummary> s(cfg.gof_samples);
    for (std::size_t r = 0; r < s.size(); ++r) {
      McmcConfig mc = cfg.sim_mcmc;
      mc.seed = derive_seed(cfg.seed, {tag("gof"), r});
      s[r] = gof_statistics(simulate_graph(z, cfg.theta, cfg.model, mc, cfg.workers), z, cfg.gof, cfg.workers);
    }
    return s;
  });
  const auto report = gof_envelope(observed, sims);
  write_text(run.dir / "gof.csv", envelope_csv(report));
  write_text(run.dir / "gof.txt", envelope_table(report));
  json j;
  j["active_bins"] = report.active;
  j["flagged_bins"] = report.flagged;
  json bins = json::array();
  for (const auto& b : report.bins) {
    bins.push_back({{"statistic", b.statistic}, {"bin", b.bin}, {"observed", b.observed}, {"min", b.min},
                    {"q025", b.q025}, {"median", b.median}, {"q975", b.q975}, {"max", b.max},
                    {"flag", b.flag == ' ' ? "" : std::string(1, b.flag)}});
  }
  j["bins"] = bins;
  write_json(run.dir / "gof.json", j);
  run.output("gof.csv");
  run.output("gof.txt");
  run.output("gof.json");
  out << envelope_table(report);
  return 0;
}

int cmd_phi(Run& run, const std::string& truth_path, const std::string& est_path, std::ostream& out) {
  run.input("truth", truth_path);
  run.input("estimate", est_path);
  const Membership a = read_membership(truth_path);
  const Membership b = read_membership(est_path);
  const auto phi = yule_phi(a, b);
  const auto c = pair_counts(a, b);
  json j;
  j["phi"] = optional_number(phi);
  j["n00"] = c.n00;
  j["n01"] = c.n01;
  j["n10"] = c.n10;
  j["n11"] = c.n11;
  write_json(run.dir / "phi.json", j);
  run.output("phi.json");
  out << j.dump() << "\n";
  return 0;
}

int cmd_debug(Run& run, const std::string& graph_path, const std::string& membership_path, std::ostream& out) {
  const auto& cfg = run.cfg;
  run.input("graph", graph_path);
  run.input("membership", membership_path);
  const Graph g = read_graph(graph_path);
  const Membership z = read_membership(membership_path);
  if (z.num_nodes() != g.num_nodes()) throw ValidationError("membership and graph sizes differ");
  json j;
  j["n"] = g.num_nodes();
  j["edges"] = g.num_edges();
  j["block_sizes"] = neighborhood_sizes(z);
  j["statistics"] = sufficient_statistics(g, z, cfg.model);
  if (!cfg.theta.empty()) {
    validate_theta(cfg.theta, cfg.model);
    j["natural_parameters"] = natural_parameters(cfg.theta, z, cfg.model);
    j["log_unnormalized"] = log_unnormalized(g, z, cfg.model, cfg.theta);
    try {
      j["exact_loglik"] = exact_loglik(g, z, cfg.model, cfg.theta);
      j["exact_deviation"] = exact_deviation(g, z, cfg.model, cfg.theta);
    } catch (const BudgetExceeded& e) {
      j["exact_loglik"] = nullptr;
      run.warnings.push_back(std::string("exact likelihood skipped: ") + e.what());
    }
  }
  write_json(run.dir / "debug.json", j);
  run.output("debug.json");
  out << j.dump(2) << "\n";
  return 0;
}

int cmd_replicate(Run& run, std::ostream& out) {
  const auto& cfg = run.cfg;
  ReplicateConfig rc;
  rc.design = design_by_name(cfg.replicate_design);
  if (!cfg.theta.empty()) rc.design.theta = cfg.theta;
  rc.replicates = cfg.replicate_count;
  rc.seed = cfg.seed;
  rc.simulation = cfg.sim_mcmc;
  rc.estimate.model = cfg.model;
  rc.estimate.step1 = cfg.step1;
  rc.estimate.step2 = cfg.step2;
  rc.workers = cfg.workers;
  const auto rows = run.timed("replicates", [&] { return replicate_study(rc); });
  write_text(run.dir / "replicates.csv", replicate_csv(rows, cfg.model));
  run.output("replicates.csv");
  json per = json::array();
  std::size_t failed = 0;
  for (const auto& r : rows) {
    per.push_back({{"replicate", r.replicate + 1}, {"step1", r.step1_seconds}, {"step2", r.step2_seconds}});
    if (r.status == "failed") ++failed;
  }
  run.timings["per_replicate"] = per;
  out << rows.size() << " replicates written (" << failed << " failed)\n";
  return 0;
}

}  // namespace

Settings default_settings() {
  Settings s;
  for (const auto& [k, v] : key_table()) s.values[k] = v.second;
  if (const char* env = std::getenv("LERGM_WORKERS")) {
    std::uint64_t w = 0;
    if (parse_uint(env, w) && w >= 1) s.values["workers"] = std::to_string(w);
  }
  return s;
}

void set_value(Settings& s, const std::string& key, const std::string& value, std::size_t line) {
  const auto& table = key_table();
  const auto it = table.find(key);
  auto fail = [&](const std::string& what) {
    if (line) throw ParseError(what, line);
    throw ParseError(what);
  };
  if (it == table.end()) fail("unknown config key '" + key + "'");
  if (!value_ok(it->second.first, value)) fail("invalid value '" + value + "' for " + key);
  s.values[key] = value;
}

void parse_config(std::istream& in, Settings& s) {
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line);
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    set_value(s, key, value, line);
  }
}

RunConfig build_config(const Settings& s) {
  RunConfig c;
  c.model = ModelSpec::from_names(s.values.at("model.terms"), static_cast<int>(as_uint(s, "model.gwd_trunc")),
                                  static_cast<int>(as_uint(s, "model.gwesp_trunc")));
  c.theta = as_reals(s, "model.theta");
  if (!c.theta.empty()) validate_theta(c.theta, c.model);
  c.sim_design = s.values.at("sim.design");
  c.sim_n = as_uint(s, "sim.n");
  for (const auto& x : split_list(s.values.at("sim.block_sizes"))) {
    std::uint64_t v = 0;
    parse_uint(x, v);
    c.sim_block_sizes.push_back(v);
  }
  c.sim_pi = as_reals(s, "sim.pi");
  c.seed = as_uint(s, "seed");
  c.workers = static_cast<int>(as_uint(s, "workers"));
  if (c.workers < 1) throw ValidationError("workers must be >= 1");
  c.outdir = s.values.at("outdir");

  c.sim_mcmc.burn_in = as_uint(s, "sim.burn_in");
  c.sim_mcmc.interval = as_uint(s, "sim.interval");
  c.sim_mcmc.num_samples = 1;
  c.sim_mcmc.seed = derive_seed(c.seed, {tag("simulate")});
  c.sim_mcmc.validate();

  c.step1.num_blocks = static_cast<int>(as_uint(s, "step1.K"));
  c.step1.gamma = as_real(s, "step1.gamma");
  c.step1.max_iters = as_uint(s, "step1.max_iters");
  c.step1.num_restarts = static_cast<int>(as_uint(s, "step1.restarts"));
  c.step1.qp_tol = as_real(s, "step1.qp_tol");
  c.step1.mode = s.values.at("step1.mode") == "untied" ? SbmMode::Untied : SbmMode::Tied;
  const auto& init = s.values.at("step1.init");
  c.step1.warm_start = init == "degree" ? WarmStart::DegreeQuantile
                       : init == "random" ? WarmStart::Random
                                          : WarmStart::Clustered;
  c.step1.init_threshold = as_real(s, "step1.init_threshold");
  c.step1.init_smoothing = as_real(s, "step1.init_smoothing");
  c.step1.init_random_starts = as_uint(s, "step1.init_random_starts");
  c.step1.alpha_floor = as_real(s, "step1.floor");
  c.step1.seed = derive_seed(c.seed, {tag("step1")});
  c.step1.workers = c.workers;
  c.step1.validate();

  c.step2.mcmc.num_samples = as_uint(s, "step2.samples");
  c.step2.mcmc.burn_in = as_uint(s, "step2.burn_in");
  c.step2.mcmc.interval = as_uint(s, "step2.interval");
  c.step2.max_outer_iters = as_uint(s, "step2.max_outer");
  c.step2.trust_radius = as_real(s, "step2.trust_radius");
  c.step2.tol = as_real(s, "step2.tol");
  c.step2.min_ess_fraction = as_real(s, "step2.min_ess");
  c.step2.theta0 = as_reals(s, "step2.theta0");
  if (!c.step2.theta0.empty()) validate_theta(c.step2.theta0, c.model);
  c.step2.seed = derive_seed(c.seed, {tag("step2")});
  c.step2.workers = c.workers;
  c.step2.validate();

  c.gof.geodesic_cap = static_cast<int>(as_uint(s, "gof.geodesic_cap"));
  c.gof.dsp_cap = static_cast<int>(as_uint(s, "gof.dsp_cap"));
  c.gof.esp_cap = static_cast<int>(as_uint(s, "gof.esp_cap"));
  c.gof.validate();
  c.gof_samples = as_uint(s, "gof.samples");
  c.replicate_design = s.values.at("replicate.design");
  c.replicate_count = as_uint(s, "replicate.count");
  return c;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-step estimation of ERGMs with local dependence"};
  app.name("lergm");
  app.require_subcommand(1);

  std::string config_path, outdir, graph_path, membership_path, truth_path, est_path, design;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::size_t> replicates;
  bool step1_only = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--outdir", outdir, "output root (default: config 'outdir')");
    sub->add_option("--seed", seed, "master seed (overrides config)");
    sub->add_option("--workers", workers, "worker threads (overrides config and LERGM_WORKERS)");
    sub->add_option("--set", overrides, "override a config key: key=value (repeatable)");
  };
  auto* simulate = app.add_subcommand("simulate", "simulate a graph from a design or model.theta");
  common(simulate);
  auto* est = app.add_subcommand("estimate", "Step 1 + Step 2 estimation");
  common(est);
  est->add_option("--graph", graph_path, "edge list")->required()->check(CLI::ExistingFile);
  est->add_option("--membership", membership_path, "fixed membership (skips Step 1)")->check(CLI::ExistingFile);
  est->add_flag("--step1-only", step1_only, "stop after Step 1");
  auto* gof = app.add_subcommand("gof", "goodness-of-fit envelope");
  common(gof);
  gof->add_option("--graph", graph_path, "edge list")->required()->check(CLI::ExistingFile);
  gof->add_option("--membership", membership_path, "membership")->required()->check(CLI::ExistingFile);
  auto* phi = app.add_subcommand("phi", "Yule's phi between two memberships");
  common(phi);
  phi->add_option("--truth", truth_path, "reference membership")->required()->check(CLI::ExistingFile);
  phi->add_option("--est", est_path, "estimated membership")->required()->check(CLI::ExistingFile);
  auto* debug = app.add_subcommand("debug", "statistics, natural parameters and exact likelihood");
  common(debug);
  debug->add_option("--graph", graph_path, "edge list")->required()->check(CLI::ExistingFile);
  debug->add_option("--membership", membership_path, "membership")->required()->check(CLI::ExistingFile);
  auto* replicate = app.add_subcommand("replicate", "simulation study over a named design");
  common(replicate);
  replicate->add_option("--design", design, "small-balanced | small-unbalanced | large-balanced | large-unbalanced");
  replicate->add_option("--replicates", replicates, "replicate count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  Run run;
  run.command = app.get_subcommands().front()->get_name();
  try {
    run.settings = default_settings();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ValidationError("cannot open config " + config_path);
      parse_config(in, run.settings);
      run.input("config", config_path);
    }
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ParseError("--set expects key=value, got '" + o + "'");
      set_value(run.settings, trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
    }
    if (seed) set_value(run.settings, "seed", std::to_string(*seed));
    if (workers) {
      if (*workers < 1) throw ValidationError("--workers must be >= 1");
      set_value(run.settings, "workers", std::to_string(*workers));
    }
    if (!outdir.empty()) set_value(run.settings, "outdir", outdir);
    if (!design.empty()) set_value(run.settings, "replicate.design", design);
    if (replicates) set_value(run.settings, "replicate.count", std::to_string(*replicates));
    run.cfg = build_config(run.settings);
    run.dir = make_run_dir(run.cfg.outdir, run.command);

    int code = 0;
    if (run.command == "simulate") code = cmd_simulate(run, out);
    else if (run.command == "estimate") code = cmd_estimate(run, graph_path, membership_path, step1_only, out);
    else if (run.command == "gof") code = cmd_gof(run, graph_path, membership_path, out);
    else if (run.command == "phi") code = cmd_phi(run, truth_path, est_path, out);
    else if (run.command == "debug") code = cmd_debug(run, graph_path, membership_path, out);
    else if (run.command == "replicate") code = cmd_replicate(run, out);
    run.finish();
    err << "run directory: " << run.dir.string() << "\n";
    return code;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const BudgetExceeded& e) {
    err << "validation error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lergm::cli
