#pragma once

#include <memory>
#include <optional>

#include "pdmp/models/potential.hpp"
#include "pdmp/pdmp.hpp"

namespace pdmp {

// ---------------------------------------------------------------- Zig-Zag

enum class ZzsRateStyle { PositivePart, Smooth };

/// Zig-Zag sampler on R^d x {-1, +1}^d.
struct ZzsModel {
  std::shared_ptr<const Potential> potential;
  ZzsRateStyle style = ZzsRateStyle::PositivePart;
  /// Constant excess rates gamma_i; empty means zero.
  Vector excess;

  double gamma(int i) const { return excess.size() == 0 ? 0.0 : excess(i); }
};

/// log(1 + e^r), the smooth switching function; equals (r)_+ up to log 2.
double smooth_switch(double r);

/// lambda_i(x, v) for the chosen style, including the excess rate.
double zzs_rate(const ZzsModel& model, const State& z, int i);

/// R_i v: coordinate i negated.
Vector zzs_flip(Vector v, int i);

PdmpSpec model_to_pdmp(const ZzsModel& model);

// ---------------------------------------------------------------- Bouncy particle

enum class RefreshLaw { Gaussian, Sphere };

struct BpsModel {
  std::shared_ptr<const Potential> potential;
  double refresh_rate = 1.0;
  RefreshLaw refresh = RefreshLaw::Gaussian;
};

/// R(x)v = v - 2 <v, g> g / |g|^2. Throws ZeroGradient when |g| < 1e-300.
Vector bps_reflect(const Vector& grad, const Vector& v);

/// Kernel 0 reflects, kernel 1 refreshes.
PdmpSpec model_to_pdmp(const BpsModel& model);

// ---------------------------------------------------------------- Randomized HMC

/// x holds the position q and v the momentum p.
struct RhmcModel {
  std::shared_ptr<const Potential> potential;
  double refresh_rate = 1.0;
};

/// Closed-form flow only for diagonal Gaussian potentials (a rotation per coordinate).
PdmpSpec model_to_pdmp(const RhmcModel& model);

// ---------------------------------------------------------------- Telegraph

/// 1-d velocity-flip process with constant rate.
struct TelegraphModel {
  double rate = 1.0;
};

PdmpSpec model_to_pdmp(const TelegraphModel& model);

// ---------------------------------------------------------------- Morris-Lecar

/// All parameters are mandatory; the state stores the membrane potential nu in
/// x(0) and the open potassium channel count theta in v(0).
struct MorrisLecarModel {
  double C;
  double g_leak, g_ca, g_k;
  double v_leak, v_ca, v_k;
  double v1, v2, v3, v4;
  double lambda_k_bar;
  int n_k;

  double m_inf(double nu) const;
  double n_inf(double nu) const;
  double lambda_k(double nu) const;
  double alpha_k(double nu) const { return lambda_k(nu) * n_inf(nu); }
  double beta_k(double nu) const { return lambda_k(nu) * (1.0 - n_inf(nu)); }
  double drift(double theta, double nu) const;
  void validate() const;
};

/// Kernel 0 opens a channel (theta + 1), kernel 1 closes one (theta - 1).
/// The flow has no closed form: only the vector field is registered.
PdmpSpec model_to_pdmp(const MorrisLecarModel& model);

// ---------------------------------------------------------------- Cell size

/// Exponential growth dz/dt = g z, division rate b z, halving at division.
struct CellSizeModel {
  double growth = 1.0;
  double division = 1.0;
  /// Window for the thinning bound b z e^{g w}.
  double window = 0.25;
};

PdmpSpec model_to_pdmp(const CellSizeModel& model);

// ---------------------------------------------------------------- Subsampling

/// Zig-Zag with per-datum rates lambda_i^j(x, v) = (v_i d_i psi_j(x))_+.
struct ZzsSubsamplingModel {
  std::shared_ptr<const TermPotential> potential;

  int terms() const { return potential->terms(); }
  double term_rate(int j, const State& z, int i) const;
};

enum class SubsamplingUpdate {
  /// x + (delta - tau) v_old + tau v_new, as displayed for the subsampling scheme.
  Displayed,
  /// x + tau v_old + (delta - tau) v_new, the plain partially discrete update.
  Standard,
};

struct SubsamplingRecord {
  int datum = -1;
  std::optional<double> tau;
  int kernel = -1;
};

/// One partially discrete step with frozen rates of one uniformly drawn datum.
SubsamplingRecord subsampling_step(const ZzsSubsamplingModel& model, State& z, double delta, StreamSet& rng,
                                   SubsamplingUpdate update = SubsamplingUpdate::Displayed);

/// The exact Zig-Zag process for the datum-j rates alone (used by the coupling).
PdmpSpec term_pdmp(const ZzsSubsamplingModel& model, int j);

/// The Zig-Zag process for the full potential psi = mean of terms.
PdmpSpec model_to_pdmp(const ZzsSubsamplingModel& model);

}  // namespace pdmp
