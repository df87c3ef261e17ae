#pragma once

#include <iosfwd>
#include <string_view>

#include "pdmp/cli/config.hpp"
#include "pdmp/cli/output.hpp"

namespace pdmp::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 2, kToleranceFailure = 3, kRuntimeError = 4 };

/// Each command writes its CSV files into `out` and a short report to `log`,
/// returning kSuccess or kToleranceFailure. Errors propagate as exceptions.
int cmd_simulate(const ExperimentConfig& c, RunOutput& out, std::ostream& log);
int cmd_couple(const ExperimentConfig& c, RunOutput& out, std::ostream& log);
int cmd_order_sweep(const ExperimentConfig& c, RunOutput& out, std::ostream& log);
int cmd_moments(const ExperimentConfig& c, RunOutput& out, std::ostream& log);
int cmd_bias(const ExperimentConfig& c, RunOutput& out, std::ostream& log);

/// Runs one named command end to end: output directory, resolved config,
/// manifest. Maps errors to exit codes.
int run_command(std::string_view command, const ExperimentConfig& c, std::ostream& log, std::ostream& err);

/// Entry point of the `pdmp` executable.
int main_entry(int argc, char** argv);

}  // namespace pdmp::cli
