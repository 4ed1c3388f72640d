#pragma once

// Scenario configuration: an INI file (or JSON, or a previous run's
// manifest.json) flattened to "section.key" strings and laid over the
// defaults of the named scenario.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

namespace qbm::cli {

/// Parse or validation failure; the message names the file, line or key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using FlatConfig = std::map<std::string, std::string>;

/// Reads INI, or JSON when the file starts with '{'. A JSON object that has a
/// "config" member of dotted keys (a run manifest) is read from that member.
FlatConfig parse_config_file(const std::filesystem::path& path);
FlatConfig parse_ini(const std::string& text, const std::string& origin = "<string>");
FlatConfig parse_json(const std::string& text, const std::string& origin = "<string>");

class ScenarioConfig {
 public:
  ScenarioConfig() = default;
  ScenarioConfig(std::string scenario, FlatConfig values) : scenario_(std::move(scenario)), values_(std::move(values)) {}

  const std::string& scenario() const { return scenario_; }
  const FlatConfig& values() const { return values_; }

  bool has(const std::string& key) const { return values_.contains(key); }
  bool is_auto(const std::string& key) const;
  const std::string& str(const std::string& key) const;
  double num(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::uint64_t seed() const;

  void set(const std::string& key, std::string value);

 private:
  std::string scenario_;
  FlatConfig values_;
};

/// Lays `raw` over the defaults of raw["scenario.name"]. Throws ConfigError
/// for a missing or unknown scenario and for keys the scenario does not know.
ScenarioConfig resolve(const FlatConfig& raw);

}  // namespace qbm::cli
