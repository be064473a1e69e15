#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ratchet {

/// Version of the JSON report layouts.
inline constexpr int report_schema_version = 1;
inline constexpr const char* ratchet_version = "1.0.0";

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Reads a whole file. Throws DataError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes to a temporary sibling then renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Comma separated table with a fixed header.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  CsvTable& operator<<(double v);
  CsvTable& operator<<(const std::string& v);
  /// Throws PreconditionError when the row width differs from the header.
  void end_row();
  const std::string& text() const { return text_; }
  std::size_t rows() const { return rows_; }

 private:
  void sep();
  std::size_t width_, filled_ = 0, rows_ = 0;
  std::string text_;
};

/// Parsed table: header plus rows of numeric cells. Non-numeric cells read as NaN.
struct CsvData {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  int column(const std::string& name) const;  ///< throws DataError when absent
};
CsvData parse_csv(const std::string& text);

/// Single writer of one artifact directory. Records the hash of every file it writes.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir);

  void write(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::json& j);
  /// Writes manifest.json listing every file so far with its hash, the config hash and versions.
  void write_manifest(const nlohmann::json& config);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

/// Hash of the canonical (sorted-key, compact) dump of a config tree.
std::string config_hash(const nlohmann::json& config);

/// Library and toolchain versions recorded in the manifest.
nlohmann::json build_versions();

}  // namespace ratchet
