#pragma once

// CSV files with a '#' comment header, SHA-256 digests and run manifests.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace scatter3d {

/// Shortest round-trippable form is not needed; 17 significant digits always.
std::string format_double(double v);

std::string sha256_hex(std::string_view data);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);

  void comment(const std::string& text);
  /// Throws std::logic_error if the field count differs from the header.
  void row(const std::vector<std::string>& fields);
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::string body_;
};

struct CsvTable {
  std::vector<std::string> comments;  // without the leading '#'
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Throws ConfigError for an unknown column.
  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
  const std::string& text(std::size_t row, std::string_view name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

struct RunManifest {
  std::string subcommand;
  std::vector<std::string> argv;
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> cutoffs;
  std::map<std::string, std::string> tolerances;
  double wall_seconds = 0.0;
  std::map<std::string, std::string> outputs;  // path -> sha256

  /// Digest of the sorted key=value config lines; independent of wall time.
  std::string config_sha256() const;
  std::string to_json() const;
};

}  // namespace scatter3d
