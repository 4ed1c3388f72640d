#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qbm/cli/config.hpp"

namespace qbm::cli {

struct ScenarioInfo {
  std::string name;
  std::string description;
  std::string equation;  ///< the relation the scenario exercises, written out
};

/// The seven scenarios in a fixed order.
const std::vector<ScenarioInfo>& scenario_catalog();

/// Every key a scenario accepts, with its default; nullptr for an unknown name.
const FlatConfig* scenario_defaults(const std::string& name);

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  ///< how value is compared with threshold, e.g. "<="
};

struct RunReport {
  std::string scenario;
  std::vector<Check> checks;
  std::vector<std::filesystem::path> files;

  bool passed() const;
};

/// Loads and validates every parameter without running anything. Throws
/// ConfigError on the first problem.
void validate_scenario(const ScenarioConfig& cfg);

/// Runs the scenario and writes its artifacts (data table, summary.json,
/// manifest.json) under scenario.out_dir. Throws ConfigError for invalid
/// parameters, NumericalInstability when a propagation blows up and
/// FilesystemError when an artifact cannot be written.
RunReport run_scenario(const ScenarioConfig& cfg);

}  // namespace qbm::cli
