#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace dioph {

struct RunOutput {
  nlohmann::ordered_json json;
  std::string csv;     ///< CSV artifact with its header; never empty
  bool passed = true;  ///< every checked invariant held
};

/// Commands accepted by run_experiment.
const std::vector<std::string>& experiment_commands();

/// Runs one experiment from a JSON config. Unknown keys, malformed values
/// and unknown commands throw InvalidArgument; budget overruns throw
/// BudgetExceeded.
RunOutput run_experiment(const std::string& command, const nlohmann::json& config);

}  // namespace dioph
