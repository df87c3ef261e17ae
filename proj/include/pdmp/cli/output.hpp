#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace pdmp::cli {

/// Comma-separated output with a one-line header. Numbers are written with 17
/// significant digits so they round-trip exactly.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<double>& values);
  /// A row whose first cell is a label.
  void row(const std::string& label, const std::vector<double>& values);

 private:
  void cells(const std::vector<double>& values, bool leading_comma);
  std::FILE* file_;
};

std::string format_double(double v);

/// Per-run bookkeeping for the output directory.
class RunOutput {
 public:
  RunOutput(std::filesystem::path dir, std::string command);

  const std::filesystem::path& dir() const { return dir_; }
  /// Path of a new artifact inside the output directory.
  std::filesystem::path file(const std::string& name);

  void write_resolved_config(const std::string& toml) const;
  /// manifest.json: version, command, wall-clock times, seed, files.
  void write_manifest(std::uint64_t seed, std::size_t replicas, int workers, int exit_code) const;

 private:
  std::filesystem::path dir_;
  std::string command_;
  std::chrono::system_clock::time_point started_;
  std::chrono::steady_clock::time_point started_steady_;
  std::vector<std::string> files_;
};

}  // namespace pdmp::cli
