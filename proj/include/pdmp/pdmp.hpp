#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>

#include "pdmp/hazard.hpp"
#include "pdmp/rng.hpp"
#include "pdmp/state.hpp"

namespace pdmp {

/// Auxiliary randomness u ~ nu_U fed to a jump map F_i(z, u).
using Noise = Eigen::VectorXd;

/// Deterministic motion between events.
struct Flow {
  /// Phi(z), written into `out` as (dx/dt, dv/dt).
  std::function<void(const State& z, State& out)> vector_field;
  /// In-place phi_t(z). Absent when the model has no closed-form flow.
  std::function<void(State& z, double t)> exact;
  /// Gradient of the potential for Hamiltonian models (dq = p, dp = -grad).
  std::function<void(const Vector& q, Vector& grad)> potential_gradient;
  std::optional<double> lipschitz_hint;

  bool has_exact() const { return static_cast<bool>(exact); }
};

/// Event rates lambda_1..lambda_m.
struct RateFamily {
  int m = 0;
  /// lambda_i(z) for every i.
  std::function<void(const State& z, std::span<double> out)> evaluate;
  /// Per-kernel intensities s -> lambda_i(phi_s(z)) on [0, horizon]. Affine
  /// hazards give closed-form clocks; curves registered with an affine bound
  /// give thinning clocks. Terms are added to `out`, which callers clear.
  std::function<void(const State& z, double horizon, std::span<Hazard> out)> along_flow;

  double total(const State& z, std::span<double> scratch) const {
    evaluate(z, scratch);
    double acc = 0.0;
    for (double r : scratch) acc += r;
    return acc;
  }
};

/// Jump maps F_1..F_m sharing a single noise law.
struct JumpKernelFamily {
  int m = 0;
  int noise_dim = 0;
  std::function<void(State& z, int i, const Noise& u)> apply;
  std::function<void(Rng& rng, Noise& u)> draw_noise;

  void draw(Rng& rng, Noise& u) const {
    if (u.size() != noise_dim) u.resize(noise_dim);
    if (draw_noise) draw_noise(rng, u);
  }
};

/// A PDMP given by its characteristics (flow, rates, kernels).
struct PdmpSpec {
  std::string name;
  int dim_x = 0;
  int dim_v = 0;
  Flow flow;
  RateFamily rates;
  JumpKernelFamily kernels;
  /// Gradient-free finite-difference rates, when the model defines them.
  std::function<void(const State& z, double delta, std::span<double> out)> finite_difference;
  /// Longest window over which along_flow may be queried at once.
  double max_window = std::numeric_limits<double>::infinity();

  /// Throws InvalidConfig on inconsistent characteristics.
  void validate() const;
};

/// phi_t(z). Throws NoExactFlow when the flow has no closed form.
State evaluate_flow(const Flow& flow, const State& z, double t);

}  // namespace pdmp
