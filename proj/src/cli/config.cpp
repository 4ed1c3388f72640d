#include "qbm/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qbm/cli/scenarios.hpp"

namespace qbm::cli {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string scalar_text(const nlohmann::json& v, const std::string& key, const std::string& origin) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw ConfigError(origin + ": key '" + key + "' must be a string, number or boolean");
}

}  // namespace

FlatConfig parse_ini(const std::string& text, const std::string& origin) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  FlatConfig flat;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(origin + ": key '" + section + "' must live inside a [section]");
    for (const auto& [key, value] : body) flat[section + "." + key] = value.get_value<std::string>();
  }
  return flat;
}

FlatConfig parse_json(const std::string& text, const std::string& origin) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(origin + ": top level must be an object");
  FlatConfig flat;
  if (doc.contains("config") && doc["config"].is_object()) {
    for (const auto& [key, value] : doc["config"].items()) flat[key] = scalar_text(value, key, origin);
    return flat;
  }
  for (const auto& [section, body] : doc.items()) {
    if (!body.is_object()) throw ConfigError(origin + ": '" + section + "' must be an object of keys");
    for (const auto& [key, value] : body.items()) {
      const std::string full = section + "." + key;
      flat[full] = scalar_text(value, full, origin);
    }
  }
  return flat;
}

FlatConfig parse_config_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_json(text, path.string());
  return parse_ini(text, path.string());
}

bool ScenarioConfig::is_auto(const std::string& key) const { return str(key) == "auto"; }

const std::string& ScenarioConfig::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
  return it->second;
}

double ScenarioConfig::num(const std::string& key) const {
  const std::string& s = str(key);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError("key '" + key + "': expected a number, got '" + s + "'");
  return v;
}

std::size_t ScenarioConfig::count(const std::string& key) const {
  const double v = num(key);
  if (v < 0 || v != std::floor(v) || v > 1e15)
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + str(key) + "'");
  return static_cast<std::size_t>(v);
}

bool ScenarioConfig::flag(const std::string& key) const {
  const std::string& s = str(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + s + "'");
}

std::uint64_t ScenarioConfig::seed() const {
  const std::string& s = str("scenario.seed");
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw ConfigError("key 'scenario.seed': expected an unsigned integer, got '" + s + "'");
  return v;
}

void ScenarioConfig::set(const std::string& key, std::string value) {
  if (!values_.contains(key)) throw ConfigError("unknown key '" + key + "' for scenario " + scenario_);
  values_[key] = std::move(value);
}

ScenarioConfig resolve(const FlatConfig& raw) {
  const auto name = raw.find("scenario.name");
  if (name == raw.end()) throw ConfigError("missing key 'scenario.name'");
  const FlatConfig* defaults = scenario_defaults(name->second);
  if (defaults == nullptr) throw ConfigError("unknown scenario '" + name->second + "' (see `qbm list`)");
  FlatConfig merged = *defaults;
  for (const auto& [key, value] : raw) {
    if (!merged.contains(key)) throw ConfigError("unknown key '" + key + "' for scenario " + name->second);
    merged[key] = value;
  }
  ScenarioConfig cfg(name->second, std::move(merged));
  cfg.seed();  // reject a malformed seed early
  return cfg;
}

}  // namespace qbm::cli
