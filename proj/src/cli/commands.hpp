#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "tscp/cli.hpp"
#include "tscp/events.hpp"

namespace tscp::cli {

/// State shared between the dispatcher and one subcommand run.
struct Context {
  ExperimentConfig config;
  Construction construction;
  nlohmann::ordered_json results;
  std::vector<std::string> outputs;
  std::string status = "ok";
  int exit_code = kExitPass;

  /// Writes a file into the output directory and lists it in the report.
  void write(const std::string& name, const std::string& content);
};

/// Fills results, status and exit code. Library exceptions propagate.
void run_subcommand(Context& ctx);

}  // namespace tscp::cli
