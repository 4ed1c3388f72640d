#pragma once

// Output files of a scenario run. Everything is written to a temporary file
// in the target directory and renamed into place.

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qbm::cli {

class FilesystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numeric table; booleans are stored as 0/1.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
};

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// "%.16e" (17 significant digits), which round-trips every double.
std::string format_number(double v);

/// `# key: value` lines, a header row, then comma-separated rows.
std::string render_csv(const Table& table, const Metadata& metadata);
nlohmann::json table_to_json(const Table& table, const Metadata& metadata);

/// Parses a file produced by render_csv, skipping `#` lines.
Table parse_csv(const std::string& text);

void write_atomic(const std::filesystem::path& path, const std::string& content);

/// ISO 8601 UTC time stamp.
std::string utc_timestamp();

}  // namespace qbm::cli
