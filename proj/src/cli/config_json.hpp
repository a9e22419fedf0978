#pragma once

#include <json.hpp>

#include "tscp/cli.hpp"

namespace tscp::cli {

/// The echo written into every report.
nlohmann::ordered_json config_object(const ExperimentConfig& config);

}  // namespace tscp::cli
