#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdmp/couplings/coupling.hpp"
#include "pdmp/diagnostics/fit.hpp"
#include "pdmp/models/lyapunov.hpp"

namespace pdmp {

using InitialLaw = std::function<State(Rng& rng)>;
using StateFn = std::function<double(const State&)>;

InitialLaw fixed_initial(State z);

/// Replica count, master seed and worker count. Results depend only on
/// (reps, seed), never on the number of workers.
struct ReplicaPlan {
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  int workers = 0;
};

/// A Monte Carlo estimate per mesh point.
struct Trace {
  std::vector<double> times;
  std::vector<double> value;
  std::vector<double> se;
};

/// Mean coupled distance E|Z_t - Z_bar_t| under Coupling 1, an upper bound
/// for the Wasserstein distance at each mesh point.
Trace wasserstein_proxy_curve(const PdmpSpec& spec, const SchemeConfig& cfg, const InitialLaw& law,
                              const ReplicaPlan& plan, DistanceNorm norm = DistanceNorm::L1);

/// P(Z_t != Z_bar_t) under the thinning coupling (Coupling 3, or Coupling 2
/// for order p > 1), an upper bound for the total variation distance.
Trace tv_indicator_curve(const PdmpSpec& spec, const SchemeConfig& cfg, const InitialLaw& law,
                         const ReplicaPlan& plan);

struct MomentTrace {
  std::vector<double> times;
  std::vector<double> exact;
  std::vector<double> exact_se;
  std::vector<double> scheme;
  std::vector<double> scheme_se;
  double sup_exact = 0.0;
  double sup_scheme = 0.0;
};

enum class MomentPairing {
  /// Independent initial draws and dynamics.
  Independent,
  /// One initial draw per replica, independent dynamics.
  SharedInitial,
  /// One initial draw and Coupling 1 between the processes. Each marginal is
  /// unchanged; heavy-tailed G gets correlated errors in the two estimates.
  Coupled,
};

/// E[G(Z_t)] for the exact process and E[G(Z_bar_t)] for the scheme.
MomentTrace lyapunov_moment_trace(const PdmpSpec& spec, const SchemeConfig& cfg, const LyapunovFn& G,
                                  const InitialLaw& law, const ReplicaPlan& plan,
                                  MomentPairing pairing = MomentPairing::Independent);

struct BiasTrace {
  std::vector<double> times;
  /// |E[time average of f] - truth| for the exact process and the scheme.
  std::vector<double> exact;
  std::vector<double> exact_se;
  std::vector<double> scheme;
  std::vector<double> scheme_se;
  double truth = 0.0;
};

/// Time averages of `f` over mesh points in [burn_in * T, t], for t past the
/// burn-in.
BiasTrace stationary_bias_curve(const PdmpSpec& spec, const SchemeConfig& cfg, const StateFn& f, double truth,
                                const InitialLaw& law, const ReplicaPlan& plan, double burn_in = 0.2);

enum class WeakErrorEstimator {
  /// Independent scheme paths against a reference value.
  Independent,
  /// Mean of g(Z_bar_T) - g(Z_T) over coupled pairs: Coupling 1 for fd,
  /// the thinning coupling otherwise. Needs no reference value.
  Coupled,
};

struct SweepResult {
  std::vector<double> deltas;
  std::vector<double> signed_errors;
  std::vector<double> errors;
  std::vector<double> stderrs;
  std::optional<LogLogFit> fit;
  /// Why the fit is missing, when it is.
  std::string fit_error;
  std::string reference;
};

/// |E[g(Z_bar_T)] - E[g(Z_T)]| for each delta, with a fitted order. With the
/// independent estimator, a missing `reference` is replaced by an exact
/// Monte Carlo estimate whose error is folded into the standard errors.
/// `reps_per_delta`, when given, overrides plan.reps per delta.
SweepResult weak_error_sweep(const PdmpSpec& spec, const SchemeConfig& base, std::span<const double> deltas,
                             double T, const StateFn& g, std::optional<double> reference, const InitialLaw& law,
                             const ReplicaPlan& plan, WeakErrorEstimator estimator,
                             std::span<const std::size_t> reps_per_delta = {});

/// Built-in statistics: first coordinate and sum of squares of the position.
double statistic_mean1(const State& z);
double statistic_radius(const State& z);

}  // namespace pdmp
