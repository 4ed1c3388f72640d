// qbm: scenario runner.
//
//   qbm list [--format json]
//   qbm validate <config>
//   qbm run <config> [--seed N] [--out-dir DIR] [--jobs N] [--format csv|json]
//
// Exit status: 0 all checks passed, 1 a check failed, 2 configuration error,
// 3 numerical instability, 4 file-system error.

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>

#include "qbm/cli/artifacts.hpp"
#include "qbm/cli/config.hpp"
#include "qbm/cli/scenarios.hpp"
#include "qbm/master_equations.hpp"

namespace {

using namespace qbm::cli;

enum Exit { kOk = 0, kCheckFailed = 1, kConfig = 2, kInstability = 3, kFilesystem = 4 };

struct Flags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> jobs;
  std::optional<std::string> format;
};

ScenarioConfig load(const std::string& path, const Flags& flags) {
  ScenarioConfig cfg = resolve(parse_config_file(path));
  if (flags.seed) cfg.set("scenario.seed", std::to_string(*flags.seed));
  if (flags.out_dir) cfg.set("scenario.out_dir", *flags.out_dir);
  if (flags.format) cfg.set("scenario.format", *flags.format);
  return cfg;
}

int list(const Flags& flags) {
  const auto& catalog = scenario_catalog();
  if (flags.format && *flags.format == "json") {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& s : catalog)
      out.push_back({{"name", s.name}, {"description", s.description}, {"equation", s.equation}});
    std::cout << out.dump(2) << "\n";
    return kOk;
  }
  for (const auto& s : catalog) std::cout << s.name << "\n    " << s.description << "\n    " << s.equation << "\n";
  return kOk;
}

int validate(const std::string& path, const Flags& flags) {
  const ScenarioConfig cfg = load(path, flags);
  validate_scenario(cfg);
  std::cout << "# " << cfg.scenario() << ": configuration valid\n";
  std::string section;
  for (const auto& [key, value] : cfg.values()) {
    const std::string s = key.substr(0, key.find('.'));
    if (s != section) {
      std::cout << "[" << s << "]\n";
      section = s;
    }
    std::cout << key.substr(key.find('.') + 1) << " = " << value << "\n";
  }
  return kOk;
}

int run(const std::string& path, const Flags& flags) {
  const ScenarioConfig cfg = load(path, flags);
  if (flags.jobs) omp_set_num_threads(*flags.jobs);
  const auto start = std::chrono::steady_clock::now();
  const RunReport report = run_scenario(cfg);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& c : report.checks)
    std::printf("%s  %s: %.6e %s %.6e\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value, c.relation.c_str(),
                c.threshold);
  for (const auto& f : report.files) std::printf("wrote %s\n", f.string().c_str());
  std::fprintf(stderr, "%s finished in %.2f s\n", report.scenario.c_str(), seconds);
  return report.passed() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum Brownian motion scenario runner"};
  app.require_subcommand(1);
  Flags flags;
  std::uint64_t seed = 0;
  std::string out_dir, format;
  int jobs = 0;
  auto* seed_opt = app.add_option("--seed", seed, "override scenario.seed");
  auto* out_opt = app.add_option("--out-dir", out_dir, "override scenario.out_dir");
  auto* jobs_opt = app.add_option("--jobs", jobs, "threads for internal sweeps")->check(CLI::PositiveNumber);
  auto* format_opt =
      app.add_option("--format", format, "output format (csv|json); list: json for machine-readable output")
          ->check(CLI::IsMember({"csv", "json"}));

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run a scenario");
  run_cmd->add_option("config", config_path, "scenario configuration (INI or JSON)")->required();
  auto* validate_cmd = app.add_subcommand("validate", "check a configuration without running it");
  validate_cmd->add_option("config", config_path, "scenario configuration (INI or JSON)")->required();
  auto* list_cmd = app.add_subcommand("list", "list the scenarios");
  for (auto* sub : {run_cmd, validate_cmd, list_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfig;
  }
  if (*seed_opt) flags.seed = seed;
  if (*out_opt) flags.out_dir = out_dir;
  if (*jobs_opt) flags.jobs = jobs;
  if (*format_opt) flags.format = format;

  try {
    if (*list_cmd) return list(flags);
    if (*validate_cmd) return validate(config_path, flags);
    return run(config_path, flags);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfig;
  } catch (const qbm::NumericalInstability& e) {
    std::fprintf(stderr, "numerical instability: %s\n", e.what());
    return kInstability;
  } catch (const FilesystemError& e) {
    std::fprintf(stderr, "file-system error: %s\n", e.what());
    return kFilesystem;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "file-system error: %s\n", e.what());
    return kFilesystem;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kCheckFailed;
  }
}
