#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace pdmp {

/// A 1-d process with velocity in {-1, +1}: dx/dt = v, and v flips at rate
/// rate_plus(x) when v = +1, rate_minus(x) when v = -1.
struct TwoVelocityModel1d {
  std::function<double(double)> rate_plus;
  std::function<double(double)> rate_minus;
};

TwoVelocityModel1d telegraph_1d(double rate);
/// Zig-Zag for the standard Gaussian: rates (x)_+ and (-x)_+.
TwoVelocityModel1d zzs_gaussian_1d();

using TestFn1d = std::function<double(double x, double v)>;

struct OracleResult {
  /// Integral of each test function against the law at T (finest grid).
  std::vector<double> values;
  /// The same on a grid twice as coarse.
  std::vector<double> coarse_values;
  /// max_k |values_k - coarse_values_k|, an estimate of the discretisation
  /// error of `values` for this first-order scheme.
  double self_convergence = 0.0;
  double dx = 0.0;
  double dt = 0.0;
};

/// Solves the forward equations dp_+/dt + dp_+/dx = -l_+ p_+ + l_- p_- and
/// dp_-/dt - dp_-/dx = -l_- p_- + l_+ p_+ with an upwind scheme at CFL 0.5,
/// starting from a point mass at (x0, v0). Throws GridTooCoarse when the
/// self-convergence estimate exceeds `tolerance`.
OracleResult forward_pde_oracle_1d(const TwoVelocityModel1d& model, double x0, double v0, double T, double dx,
                                   std::span<const TestFn1d> tests,
                                   double tolerance = std::numeric_limits<double>::infinity());

struct TelegraphMoments {
  double mean = 0.0;
  double second = 0.0;
};

/// E[X_t] and E[X_t^2] for the telegraph process started at (x0, v0).
TelegraphMoments telegraph_moments(double rate, double t, double x0, double v0);

}  // namespace pdmp
