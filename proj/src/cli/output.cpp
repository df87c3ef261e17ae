#include "pdmp/cli/output.hpp"

#include <ctime>
#include <fstream>

#include <json.hpp>

#include "pdmp/errors.hpp"
#include "pdmp/parallel.hpp"

#ifndef PDMP_VERSION
#define PDMP_VERSION "unknown"
#endif

namespace pdmp::cli {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : file_(std::fopen(path.c_str(), "w")) {
  if (!file_) throw Error("cannot write " + path.string());
  for (std::size_t k = 0; k < header.size(); ++k) std::fprintf(file_, "%s%s", k ? "," : "", header[k].c_str());
  std::fputc('\n', file_);
}

CsvWriter::~CsvWriter() { std::fclose(file_); }

void CsvWriter::cells(const std::vector<double>& values, bool leading_comma) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::fprintf(file_, "%s%.17g", (k || leading_comma) ? "," : "", values[k]);
  }
  std::fputc('\n', file_);
}

void CsvWriter::row(const std::vector<double>& values) { cells(values, false); }

void CsvWriter::row(const std::string& label, const std::vector<double>& values) {
  std::fputs(label.c_str(), file_);
  cells(values, true);
}

namespace {

std::string iso_utc(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunOutput::RunOutput(std::filesystem::path dir, std::string command)
    : dir_(std::move(dir)),
      command_(std::move(command)),
      started_(std::chrono::system_clock::now()),
      started_steady_(std::chrono::steady_clock::now()) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path RunOutput::file(const std::string& name) {
  files_.push_back(name);
  const auto path = dir_ / name;
  std::filesystem::create_directories(path.parent_path());
  return path;
}

void RunOutput::write_resolved_config(const std::string& toml) const {
  std::ofstream out(dir_ / "resolved-config.toml");
  out << toml;
}

void RunOutput::write_manifest(std::uint64_t seed, std::size_t replicas, int workers, int exit_code) const {
  const auto now = std::chrono::system_clock::now();
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_steady_).count();
  nlohmann::json j;
  j["artifact"] = "pdmp";
  j["version"] = PDMP_VERSION;
  j["command"] = command_;
  j["started_utc"] = iso_utc(started_);
  j["finished_utc"] = iso_utc(now);
  j["wall_seconds"] = wall;
  j["seed"] = seed;
  j["replicas"] = replicas;
  j["workers"] = resolve_workers(workers);
  j["exit_code"] = exit_code;
  j["files"] = files_;
  std::ofstream out(dir_ / "manifest.json");
  out << j.dump(2) << '\n';
}

}  // namespace pdmp::cli
