#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdmp/couplings/coupling.hpp"
#include "pdmp/diagnostics/curves.hpp"
#include "pdmp/models/models.hpp"
#include "pdmp/schemes/scheme.hpp"

namespace pdmp::cli {

/// The model block resolved into a process and its target, if any.
struct ModelSetup {
  std::string name;
  PdmpSpec spec;
  std::shared_ptr<const Potential> potential;
  /// Set for Gaussian targets; used for stationary initial laws and truths.
  std::shared_ptr<const GaussianPotential> gaussian;
  std::optional<ZzsSubsamplingModel> subsampling;
  /// Velocities live on the unit sphere (bps with sphere refreshment).
  bool unit_velocity = false;
  /// Refresh rate of bps and rhmc models.
  double refresh_rate = 0.0;
  /// Telegraph flip rate.
  double telegraph_rate = 0.0;
};

struct SchemeSetup {
  /// exact, fd, pd, order_p or subsampling.
  std::string name = "exact";
  bool exact = true;
  SchemeConfig config;
  SubsamplingUpdate update = SubsamplingUpdate::Displayed;
  std::vector<double> deltas;
  double horizon = 1.0;
};

struct RunSetup {
  std::size_t replicas = 1;
  std::uint64_t seed = 1;
  int workers = 0;
};

struct OutputSetup {
  std::string dir = "out";
  /// One trajectory CSV per replica in `simulate`.
  bool trajectories = false;
};

struct CouplingSetup {
  /// wasserstein, tv, higher_order or subsampling.
  std::string name = "wasserstein";
  DistanceNorm norm = DistanceNorm::L1;
};

struct SweepSetup {
  std::string statistic = "mean1";
  StateFn g;
  std::optional<double> reference;
  WeakErrorEstimator estimator = WeakErrorEstimator::Coupled;
  std::vector<std::size_t> replicas_per_delta;
  double expected_slope = 1.0;
  double tolerance = 0.3;
};

struct MomentSetup {
  std::string lyapunov;
  LyapunovFn G;
  MomentPairing pairing = MomentPairing::Independent;
};

struct BiasSetup {
  std::string statistic = "radius";
  StateFn f;
  std::optional<double> truth;
  double burn_in = 0.2;
};

struct ExperimentConfig {
  ModelSetup model;
  InitialLaw initial;
  SchemeSetup scheme;
  RunSetup run;
  OutputSetup output;
  CouplingSetup coupling;
  SweepSetup sweep;
  std::optional<MomentSetup> moments;
  BiasSetup bias;
  /// Every setting after defaults and overrides, as TOML.
  std::string resolved;
};

/// Command-line overrides applied on top of the file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
};

/// Parses and validates a configuration. Throws ConfigError naming the
/// offending key and line.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "config",
                              const Overrides& overrides = {});
ExperimentConfig load_config(const std::string& path, const Overrides& overrides = {});

}  // namespace pdmp::cli
