#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "config_json.hpp"
#include "tscp/cli.hpp"
#include "tscp/couplings.hpp"
#include "tscp/errors.hpp"

namespace tscp::cli {

using nlohmann::ordered_json;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{
      "simulate", "couplings", "breakpoints", "speed", "clt",         "density",
      "converge", "tails",     "iid",         "percolation", "selfcheck"};
  return names;
}

ExperimentConfig defaults_for(const std::string& subcommand) {
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), subcommand) == names.end()) {
    throw InputError("unknown subcommand: " + subcommand);
  }
  ExperimentConfig c;
  c.subcommand = subcommand;
  c.t_list = {100.0, 200.0, 400.0};
  c.f_sets = {{0}, {0, 1}, {-2, 3}};
  c.p_tilde = {0.6, 0.8, 0.95};
  for (CouplingKind k : kAllCouplingKinds) c.coupling_kinds.push_back(to_string(k));

  if (subcommand == "simulate") {
    c.replicas = 100;
    c.horizon = 100.0;
  } else if (subcommand == "couplings") {
    c.replicas = 300;
    c.horizon = 100.0;
  } else if (subcommand == "breakpoints") {
    c.replicas = 200;
    c.horizon = 600.0;
  } else if (subcommand == "speed") {
    c.replicas = 3000;
    c.horizon = 600.0;
    c.breakpoint_replicas = 1000;
  } else if (subcommand == "clt") {
    c.replicas = 6500;
    c.horizon = 600.0;
    c.breakpoint_replicas = 1000;
  } else if (subcommand == "density") {
    c.replicas = 3000;
    c.horizon = 600.0;
    c.breakpoint_replicas = 1000;
  } else if (subcommand == "converge") {
    c.replicas = 2000;
    c.t_eval = 300.0;
  } else if (subcommand == "tails") {
    c.replicas = 2000;
    c.horizon = 600.0;
    c.breakpoint_replicas = 500;
  } else if (subcommand == "iid") {
    c.replicas = 200;
    c.horizon = 600.0;
  } else if (subcommand == "percolation") {
    c.replicas = 500;
  } else if (subcommand == "selfcheck") {
    c.replicas = 20;
    c.horizon = 30.0;
    c.k_cap = 20;
    c.containment_fields = 10;
    c.containment_n_max = 100;
  }
  return c;
}

namespace {

template <class T>
T read(const ordered_json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError("config key '" + key + "' has the wrong type");
  }
}

// Binds every config key to its field; the same table drives reading and
// the echo, so the two cannot drift apart.
struct Binding {
  std::function<void(ExperimentConfig&, const ordered_json&)> load;
  std::function<ordered_json(const ExperimentConfig&)> dump;
};

template <class T>
Binding field_binding(T ExperimentConfig::*field, const std::string& key) {
  return {[field, key](ExperimentConfig& c, const ordered_json& j) { c.*field = read<T>(j, key); },
          [field](const ExperimentConfig& c) { return ordered_json(c.*field); }};
}

Binding bind_window() {
  return {[](ExperimentConfig& c, const ordered_json& j) {
            if (!j.is_object()) throw InputError("config key 'window_policy' must be an object");
            WindowPolicy w;
            for (const auto& [k, v] : j.items()) {
              if (k == "width") {
                if (!v.is_null()) w.width = read<std::int64_t>(v, "window_policy.width");
              } else if (k == "expandable") {
                w.expandable = read<bool>(v, "window_policy.expandable");
              } else if (k == "growth") {
                w.growth = read<double>(v, "window_policy.growth");
              } else if (k == "max_expansions") {
                w.max_expansions = read<int>(v, "window_policy.max_expansions");
              } else {
                throw InputError("unknown config key 'window_policy." + k + "'");
              }
            }
            c.window_policy = w;
          },
          [](const ExperimentConfig& c) {
            ordered_json j;
            j["width"] = c.window_policy.width ? ordered_json(*c.window_policy.width) : ordered_json();
            j["expandable"] = c.window_policy.expandable;
            j["growth"] = c.window_policy.growth;
            j["max_expansions"] = c.window_policy.max_expansions;
            return j;
          }};
}

const std::vector<std::pair<std::string, Binding>>& bindings() {
  using C = ExperimentConfig;
  static const std::vector<std::pair<std::string, Binding>> table = [] {
    std::vector<std::pair<std::string, Binding>> t;
    t.emplace_back("lambda", field_binding(&C::lambda, "lambda"));
    t.emplace_back("mu", field_binding(&C::mu, "mu"));
    t.emplace_back("seed", field_binding(&C::seed, "seed"));
    t.emplace_back("replicas", field_binding(&C::replicas, "replicas"));
    t.emplace_back("horizon", field_binding(&C::horizon, "horizon"));
    t.emplace_back("survival_horizon", field_binding(&C::survival_horizon, "survival_horizon"));
    t.emplace_back("t_eval", field_binding(&C::t_eval, "t_eval"));
    t.emplace_back("t_list", field_binding(&C::t_list, "t_list"));
    t.emplace_back("window", field_binding(&C::window, "window"));
    t.emplace_back("alpha_level", field_binding(&C::alpha_level, "alpha_level"));
    t.emplace_back("out", field_binding(&C::out, "out"));
    t.emplace_back("breakpoint_replicas", field_binding(&C::breakpoint_replicas, "breakpoint_replicas"));
    t.emplace_back("increments_per_replica", field_binding(&C::increments_per_replica, "increments_per_replica"));
    t.emplace_back("horizon_extensions", field_binding(&C::horizon_extensions, "horizon_extensions"));
    t.emplace_back("theta_replicas", field_binding(&C::theta_replicas, "theta_replicas"));
    t.emplace_back("theta_time", field_binding(&C::theta_time, "theta_time"));
    t.emplace_back("all_infected_replicas", field_binding(&C::all_infected_replicas, "all_infected_replicas"));
    t.emplace_back("f_sets", field_binding(&C::f_sets, "f_sets"));
    t.emplace_back("density_tolerance", field_binding(&C::density_tolerance, "density_tolerance"));
    t.emplace_back("hitting_level", field_binding(&C::hitting_level, "hitting_level"));
    t.emplace_back("window_policy", bind_window());
    t.emplace_back("p", field_binding(&C::p, "p"));
    t.emplace_back("n_max", field_binding(&C::n_max, "n_max"));
    t.emplace_back("p_tilde", field_binding(&C::p_tilde, "p_tilde"));
    t.emplace_back("containment_fields", field_binding(&C::containment_fields, "containment_fields"));
    t.emplace_back("containment_n_max", field_binding(&C::containment_n_max, "containment_n_max"));
    t.emplace_back("coupling_kinds", field_binding(&C::coupling_kinds, "coupling_kinds"));
    t.emplace_back("k_cap", field_binding(&C::k_cap, "k_cap"));
    t.emplace_back("sample_step", field_binding(&C::sample_step, "sample_step"));
    t.emplace_back("initial", field_binding(&C::initial, "initial"));
    t.emplace_back("tail_points", field_binding(&C::tail_points, "tail_points"));
    t.emplace_back("min_r2", field_binding(&C::min_r2, "min_r2"));
    t.emplace_back("deviation_t_lo", field_binding(&C::deviation_t_lo, "deviation_t_lo"));
    return t;
  }();
  return table;
}

}  // namespace

void apply_config_text(ExperimentConfig& config, const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("config file must hold a JSON object");
  if (!j.contains("schema_version")) throw InputError("config file lacks schema_version");
  const int version = read<int>(j["schema_version"], "schema_version");
  if (version != kSchemaVersion) {
    throw InputError("unsupported config schema_version " + std::to_string(version));
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "schema_version") continue;
    if (key == "subcommand") {
      if (read<std::string>(value, key) != config.subcommand) {
        throw InputError("config file is for subcommand '" + value.get<std::string>() + "'");
      }
      continue;
    }
    if (key == "workers") {
      config.workers = read<int>(value, key);
      continue;
    }
    const auto& table = bindings();
    auto it = std::find_if(table.begin(), table.end(), [&](const auto& b) { return b.first == key; });
    if (it == table.end()) throw InputError("unknown config key '" + key + "'");
    it->second.load(config, value);
  }
}

void validate(const ExperimentConfig& c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError(std::string(name) + " must be positive");
  };
  positive(c.lambda, "lambda");
  positive(c.mu, "mu");
  positive(c.horizon, "horizon");
  positive(c.survival_horizon, "survival_horizon");
  positive(c.t_eval, "t_eval");
  positive(c.theta_time, "theta_time");
  positive(c.sample_step, "sample_step");
  positive(c.deviation_t_lo, "deviation_t_lo");
  positive(c.density_tolerance, "density_tolerance");
  // Subcommands running the restart search need room for survival verdicts.
  static const std::set<std::string> restart_search{"breakpoints", "speed", "clt",
                                                    "density",     "tails", "iid"};
  if (restart_search.count(c.subcommand) && c.survival_horizon > c.horizon) {
    throw InputError("survival_horizon must not exceed horizon");
  }
  if (!(c.alpha_level > 0.0 && c.alpha_level < 1.0)) {
    throw InputError("alpha_level must lie in (0, 1)");
  }
  for (std::int64_t n : {c.replicas, c.breakpoint_replicas, c.theta_replicas,
                         c.all_infected_replicas, c.containment_fields}) {
    if (n < 1) throw InputError("replica counts must be at least 1");
  }
  if (c.increments_per_replica < 0) throw InputError("increments_per_replica must be >= 0");
  if (c.horizon_extensions < 0) throw InputError("horizon_extensions must be >= 0");
  if (c.window < 0) throw InputError("window must be nonnegative");
  if (c.t_list.empty()) throw InputError("t_list must not be empty");
  for (double t : c.t_list) positive(t, "t_list entries");
  if (c.hitting_level < 1) throw InputError("hitting_level must be positive");
  if (c.n_max < 1 || c.containment_n_max < 0) throw InputError("n_max must be positive");
  if (!(c.p >= 0.0 && c.p <= 1.0)) throw InputError("p must lie in [0, 1]");
  for (double p : c.p_tilde) {
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("p_tilde entries must lie in [0, 1]");
  }
  for (const auto& name : c.coupling_kinds) coupling_kind_from_string(name);
  if (c.k_cap < 1) throw InputError("k_cap must be positive");
  if (c.tail_points < 5) throw InputError("tail_points must be at least 5");
  if (!(c.min_r2 >= 0.0 && c.min_r2 <= 1.0)) throw InputError("min_r2 must lie in [0, 1]");
  if (c.initial != "standard" && c.initial != "single_site" && c.initial != "left_half_line") {
    throw InputError("initial must be standard, single_site or left_half_line");
  }
  if (c.window_policy.width && *c.window_policy.width < 1) {
    throw InputError("window_policy.width must be positive");
  }
  if (!(c.window_policy.growth > 1.0) || c.window_policy.max_expansions < 0) {
    throw InputError("window_policy growth must exceed 1 and max_expansions be >= 0");
  }
  if (c.workers < 1) throw InputError("workers must be positive");
}

ordered_json config_object(const ExperimentConfig& c) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["subcommand"] = c.subcommand;
  for (const auto& [key, binding] : bindings()) j[key] = binding.dump(c);
  return j;
}

std::string config_json(const ExperimentConfig& config) { return config_object(config).dump(2); }

}  // namespace tscp::cli
