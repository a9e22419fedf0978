#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "commands.hpp"
#include "config_json.hpp"
#include "tscp/cli.hpp"
#include "tscp/errors.hpp"

namespace tscp::cli {

namespace {

const char* describe(const std::string& name) {
  if (name == "simulate") return "Evolve replicas and write their edge paths";
  if (name == "couplings") return "Check the coupling identities pathwise";
  if (name == "breakpoints") return "Run the restart search and write break points";
  if (name == "speed") return "Compare edge speed estimates";
  if (name == "clt") return "Test the Gaussian fluctuations of the edge";
  if (name == "density") return "Compare the infected set size with 2 alpha theta";
  if (name == "converge") return "Check complete convergence on finite sets";
  if (name == "tails") return "Fit exponential tails";
  if (name == "iid") return "Test the regeneration increments for independence";
  if (name == "percolation") return "Oriented percolation speed and bond-site containment";
  if (name == "selfcheck") return "Small-scale run of every pathwise check";
  return "";
}

struct Flags {
  std::optional<std::string> config;
  std::optional<double> lambda;
  std::optional<double> mu;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> replicas;
  std::optional<double> horizon;
  std::optional<double> survival_horizon;
  std::optional<double> t_eval;
  std::optional<std::int64_t> window;
  std::optional<double> alpha_level;
  std::optional<std::string> out;
  std::optional<int> workers;
};

void add_flags(CLI::App& sub, Flags& f) {
  sub.add_option("--config", f.config, "JSON config file (schema_version 1)");
  sub.add_option("--lambda", f.lambda, "Rate of first infections");
  sub.add_option("--mu", f.mu, "Rate of reinfections");
  sub.add_option("--seed", f.seed, "Master seed");
  sub.add_option("--replicas", f.replicas, "Replicas in the main batch");
  sub.add_option("--horizon", f.horizon, "Simulation horizon");
  sub.add_option("--survival-horizon", f.survival_horizon, "Survival proxy horizon");
  sub.add_option("--t-eval", f.t_eval, "Evaluation time (clt: the only time tested)");
  sub.add_option("--window", f.window, "Half-width of spatial observation windows");
  sub.add_option("--alpha-level", f.alpha_level, "Family-wise test level");
  sub.add_option("--out", f.out, "Output directory");
  sub.add_option("--workers", f.workers, "Worker threads (overrides TSCP_WORKERS)");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read config file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig resolve(const std::string& subcommand, const Flags& f) {
  ExperimentConfig c = defaults_for(subcommand);
  c.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (f.config) apply_config_text(c, read_file(*f.config));
  const char* env = std::getenv("TSCP_WORKERS");
  if (env && !f.workers) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw InputError("TSCP_WORKERS must be a positive integer");
    c.workers = static_cast<int>(v);
  }
  if (f.lambda) c.lambda = *f.lambda;
  if (f.mu) c.mu = *f.mu;
  if (f.seed) c.seed = *f.seed;
  if (f.replicas) c.replicas = *f.replicas;
  if (f.horizon) c.horizon = *f.horizon;
  if (f.survival_horizon) c.survival_horizon = *f.survival_horizon;
  if (f.t_eval) {
    c.t_eval = *f.t_eval;
    c.t_list = {*f.t_eval};
  }
  if (f.window) c.window = *f.window;
  if (f.alpha_level) c.alpha_level = *f.alpha_level;
  if (f.out) c.out = *f.out;
  if (f.workers) c.workers = *f.workers;
  validate(c);
  return c;
}

void write_report(Context& ctx, const std::string& error) {
  nlohmann::ordered_json report;
  report["schema_version"] = kSchemaVersion;
  report["subcommand"] = ctx.config.subcommand;
  report["seed"] = ctx.config.seed;
  report["config"] = config_object(ctx.config);
  report["status"] = ctx.status;
  report["exit_code"] = ctx.exit_code;
  if (!error.empty()) report["error"] = error;
  report["results"] = ctx.results;
  report["outputs"] = ctx.outputs;
  ctx.write(ctx.config.subcommand + ".json", report.dump(2) + "\n");
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Experiments on the three-state contact process", "tscp"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::Throw);
  app.require_subcommand(1);
  Flags flags;
  for (const std::string& name : subcommands()) add_flags(*app.add_subcommand(name, describe(name)), flags);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitInputError;
  }
  const std::string subcommand = app.get_subcommands().front()->get_name();

  Context ctx;
  try {
    ctx.config = resolve(subcommand, flags);
    std::filesystem::create_directories(ctx.config.out);
    ctx.construction = Construction{ctx.config.seed, ctx.config.lambda, ctx.config.mu, 1.0};
    run_subcommand(ctx);
  } catch (const ParameterError& e) {
    err << "parameter error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const EngineViolation& e) {
    ctx.status = "violation";
    ctx.exit_code = kExitEngineViolation;
    ctx.results = nlohmann::ordered_json::object();
    err << "engine violation: " << e.what() << '\n';
    write_report(ctx, e.what());
    return kExitEngineViolation;
  } catch (const WindowBreach& e) {
    ctx.status = "violation";
    ctx.exit_code = kExitEngineViolation;
    ctx.results = nlohmann::ordered_json::object();
    err << "window breach: " << e.what() << '\n';
    write_report(ctx, e.what());
    return kExitEngineViolation;
  } catch (const InsufficientData& e) {
    ctx.status = "inconclusive";
    ctx.exit_code = kExitStatisticalFail;
    ctx.results = nlohmann::ordered_json::object();
    err << "insufficient data: " << e.what() << '\n';
    write_report(ctx, e.what());
    return kExitStatisticalFail;
  }
  write_report(ctx, "");
  out << subcommand << ": " << ctx.status << " (exit " << ctx.exit_code << "), report "
      << (std::filesystem::path(ctx.config.out) / (subcommand + ".json")).string() << '\n';
  return ctx.exit_code;
}

}  // namespace tscp::cli
