#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lergm/evaluation.hpp"
#include "lergm/mcmle.hpp"
#include "lergm/model.hpp"
#include "lergm/sampler.hpp"
#include "lergm/variational.hpp"

namespace lergm::cli {

/// Flat key = value settings. Every documented key is present with its
/// default; values are kept as text so the manifest can echo them verbatim.
struct Settings {
  std::map<std::string, std::string> values;
};

Settings default_settings();

/// Sets one key after checking that the value parses for that key.
/// Throws ParseError (with `line` when nonzero) on unknown keys or bad values.
void set_value(Settings& s, const std::string& key, const std::string& value, std::size_t line = 0);

/// Reads `key = value` lines; `#` starts a comment; blank lines are ignored.
void parse_config(std::istream& in, Settings& s);

/// Typed view of the settings.
struct RunConfig {
  ModelSpec model = ModelSpec::edge_transitive();
  std::vector<double> theta;  // model.theta; empty when unset
  std::string sim_design;
  std::size_t sim_n = 0;
  std::vector<std::size_t> sim_block_sizes;
  std::vector<double> sim_pi;
  McmcConfig sim_mcmc;
  Step1Config step1;
  Step2Config step2;
  GofConfig gof;
  std::size_t gof_samples = 100;
  std::string replicate_design;
  std::size_t replicate_count = 1;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string outdir = "runs";
};

/// Builds the typed configuration. Sub-seeds are derived from the master
/// seed by phase tag ("simulate", "step1", "step2", "gof"). Throws
/// ValidationError on values that parse but are out of range.
RunConfig build_config(const Settings& s);

/// Process entry point. Exit codes: 0 success, 1 unexpected failure,
/// 2 command-line or config parse error, 3 validation error, 4 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lergm::cli
