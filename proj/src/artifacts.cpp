#include "ratchet/artifacts.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <Eigen/Core>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include "ratchet/errors.hpp"

namespace ratchet {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw DataError("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CsvTable::CsvTable(std::vector<std::string> columns) : width_(columns.size()) {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) text_ += ',';
    text_ += columns[i];
  }
  text_ += '\n';
}

void CsvTable::sep() {
  if (filled_++) text_ += ',';
}

CsvTable& CsvTable::operator<<(double v) {
  sep();
  text_ += format_double(v);
  return *this;
}

CsvTable& CsvTable::operator<<(const std::string& v) {
  sep();
  text_ += v;
  return *this;
}

void CsvTable::end_row() {
  if (filled_ != width_) throw PreconditionError("CSV row has the wrong number of cells");
  text_ += '\n';
  filled_ = 0;
  ++rows_;
}

int CsvData::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  throw DataError("CSV column '" + name + "' is missing");
}

CsvData parse_csv(const std::string& text) {
  CsvData d;
  std::istringstream in(text);
  std::string line, cell;
  if (!std::getline(in, line)) throw DataError("CSV has no header");
  std::istringstream head(line);
  while (std::getline(head, cell, ',')) d.columns.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(d.columns.size());
    std::istringstream cells(line);
    while (std::getline(cells, cell, ',')) {
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      row.push_back(end == cell.c_str() ? std::nan("") : v);
    }
    if (row.size() != d.columns.size()) throw DataError("CSV row has the wrong number of cells");
    d.rows.push_back(std::move(row));
  }
  return d;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void ArtifactWriter::write(const std::string& name, const std::string& content) {
  write_atomic(dir_ / name, content);
  files_.emplace_back(name, sha256_hex(content));
}

void ArtifactWriter::write_json(const std::string& name, const nlohmann::json& j) {
  write(name, j.dump(2) + "\n");
}

void ArtifactWriter::write_manifest(const nlohmann::json& config) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [name, hash] : files_) files.push_back({{"name", name}, {"sha256", hash}});
  nlohmann::json m{{"schema_version", report_schema_version},
                   {"config_hash", config_hash(config)},
                   {"versions", build_versions()},
                   {"files", files}};
  write_atomic(dir_ / "manifest.json", m.dump(2) + "\n");
}

std::string config_hash(const nlohmann::json& config) { return sha256_hex(config.dump()); }

nlohmann::json build_versions() {
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
#if defined(__clang__)
  std::string compiler = "clang " __clang_version__;
#elif defined(__GNUC__)
  std::string compiler = "gcc " __VERSION__;
#else
  std::string compiler = "unknown";
#endif
  return {{"ratchet", ratchet_version}, {"eigen", eigen.str()}, {"openssl", OPENSSL_VERSION_TEXT},
          {"compiler", compiler}};
}

}  // namespace ratchet
