#include "scatter3d/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "scatter3d/errors.hpp"

namespace scatter3d {

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

CsvWriter::CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvWriter::comment(const std::string& text) { comments_.push_back(text); }

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_.size()) {
    throw std::logic_error(
        fmt::format("CSV row has {} fields, header has {}", fields.size(), columns_.size()));
  }
  body_ += fmt::format("{}\n", fmt::join(fields, ","));
}

std::string CsvWriter::str() const {
  std::string out;
  for (const auto& c : comments_) out += "# " + c + "\n";
  out += fmt::format("{}\n", fmt::join(columns_, ","));
  return out + body_;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw ConfigError(fmt::format("CSV has no column '{}'", name));
}

double CsvTable::number(std::size_t row, std::string_view name) const {
  const auto& s = text(row, name);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) {
    throw ConfigError(fmt::format("CSV field '{}' in column '{}' is not a number", s, name));
  }
  return v;
}

const std::string& CsvTable::text(std::size_t row, std::string_view name) const {
  return rows.at(row).at(column(name));
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  auto split = [](const std::string& s) {
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      const auto pos = s.find(',', start);
      f.push_back(s.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return f;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line.size() > 1 && line[1] == ' ' ? line.substr(2) : line.substr(1));
      continue;
    }
    auto fields = split(line);
    if (!header) {
      t.columns = std::move(fields);
      header = true;
      continue;
    }
    if (fields.size() != t.columns.size()) {
      throw ConfigError(fmt::format("CSV row with {} fields under a {}-column header",
                                    fields.size(), t.columns.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (!header) throw ConfigError("CSV has no header line");
  return t;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_text_file(path)); }

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path));
  out << content;
  if (!out) throw ConfigError(fmt::format("write to '{}' failed", path));
}

std::string RunManifest::config_sha256() const {
  std::string canon = subcommand + "\n";
  for (const auto& [k, v] : config) canon += k + "=" + v + "\n";
  return sha256_hex(canon);
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["subcommand"] = subcommand;
  j["argv"] = argv;
  j["config"] = config;
  j["config_sha256"] = config_sha256();
  j["cutoffs"] = cutoffs;
  j["tolerances"] = tolerances;
  j["wall_seconds"] = wall_seconds;
  j["outputs"] = nlohmann::ordered_json::object();
  for (const auto& [path, hash] : outputs) j["outputs"][path] = {{"sha256", hash}};
  return j.dump(2) + "\n";
}

}  // namespace scatter3d
