#pragma once

// Batch experiment driver behind the `tscp` executable: configuration
// resolution, subcommand dispatch, JSON reports and CSV tables.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tscp/process.hpp"

namespace tscp::cli {

enum ExitCode : int {
  kExitPass = 0,
  kExitStatisticalFail = 1,
  kExitInputError = 2,
  kExitEngineViolation = 3,
};

inline constexpr int kSchemaVersion = 1;

/// Subcommands in the order they are listed by --help.
const std::vector<std::string>& subcommands();

/// Every setting a subcommand may read. Defaults depend on the subcommand
/// (see defaults_for); a JSON config file overrides them and command-line
/// flags override the file.
struct ExperimentConfig {
  std::string subcommand;

  double lambda = 1.0;
  double mu = 2.0;
  std::uint64_t seed = 42;
  /// Size of the subcommand's main batch.
  std::int64_t replicas = 100;
  double horizon = 100.0;
  double survival_horizon = 150.0;
  double t_eval = 400.0;
  std::vector<double> t_list;
  /// Half-width of spatial observation windows (occupancy estimate).
  std::int64_t window = 200;
  double alpha_level = 0.01;
  std::string out = ".";

  // Settings only available through the config file.
  std::int64_t breakpoint_replicas = 200;
  std::int64_t increments_per_replica = 30;
  /// Horizon doublings allowed to complete increments_per_replica.
  int horizon_extensions = 2;
  std::int64_t theta_replicas = 200;
  double theta_time = 150.0;
  std::int64_t all_infected_replicas = 2000;
  std::vector<std::vector<std::int64_t>> f_sets;
  double density_tolerance = 0.07;
  std::int64_t hitting_level = 150;
  WindowPolicy window_policy;
  double p = 0.95;
  std::int64_t n_max = 300;
  std::vector<double> p_tilde;
  std::int64_t containment_fields = 100;
  std::int64_t containment_n_max = 500;
  std::vector<std::string> coupling_kinds;
  std::int64_t k_cap = 50;
  double sample_step = 1.0;
  std::string initial = "standard";
  int tail_points = 8;
  double min_r2 = 0.9;
  double deviation_t_lo = 10.0;

  /// Not part of the echo: results never depend on it.
  int workers = 1;
};

/// Defaults of one subcommand; InputError for an unknown name.
ExperimentConfig defaults_for(const std::string& subcommand);

/// Applies a parsed JSON config file. Requires "schema_version" equal to
/// kSchemaVersion; unknown keys and wrongly typed values are InputErrors.
void apply_config_text(ExperimentConfig& config, const std::string& json_text);

/// Range checks shared by all subcommands (InputError / ParameterError).
void validate(const ExperimentConfig& config);

/// The resolved configuration as pretty-printed JSON, in a fixed key order.
std::string config_json(const ExperimentConfig& config);

/// Runs one command line (without the program name). Reports go to
/// config.out; a one-line summary goes to `out`, diagnostics to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tscp::cli
