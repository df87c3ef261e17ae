#pragma once

#include <stdexcept>
#include <string>

namespace pdmp {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PDMP_DEFINE_ERROR(Name)        \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

// core
PDMP_DEFINE_ERROR(NoExactFlow);
PDMP_DEFINE_ERROR(NoVectorField);
PDMP_DEFINE_ERROR(ThinningBoundViolated);
PDMP_DEFINE_ERROR(NoSimulationPath);
PDMP_DEFINE_ERROR(ZeroTotalRate);
PDMP_DEFINE_ERROR(EventStorm);

// models
PDMP_DEFINE_ERROR(ZeroGradient);

// schemes / couplings
PDMP_DEFINE_ERROR(InvalidConfig);

// diagnostics
PDMP_DEFINE_ERROR(InsufficientSignal);
PDMP_DEFINE_ERROR(GridTooCoarse);

#undef PDMP_DEFINE_ERROR

// cli
/// A rejected configuration, located by dotted key and source line (0 when
/// unknown).
class ConfigError : public Error {
 public:
  ConfigError(std::string key, int line, const std::string& message)
      : Error(format(key, line, message)), key_(std::move(key)), line_(line) {}
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  static std::string format(const std::string& key, int line, const std::string& message) {
    std::string where = line > 0 ? "line " + std::to_string(line) + ": " : "";
    if (!key.empty()) where += "'" + key + "': ";
    return where + message;
  }
  std::string key_;
  int line_;
};

}  // namespace pdmp
