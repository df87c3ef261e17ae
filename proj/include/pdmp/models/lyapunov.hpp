#pragma once

#include <functional>

#include "pdmp/models/potential.hpp"
#include "pdmp/schemes/scheme.hpp"

namespace pdmp {

using LyapunovFn = std::function<double(const State&)>;

/// phi_eps(s) = sign(s) log(1 + eps |s|) / 2.
double phi_epsilon(double s, double epsilon);

/// exp(alpha psi(x) + sum_i phi_eps(v_i d_i psi(x))).
double lyapunov_zzs(const Potential& potential, double alpha, double epsilon, const State& z);

/// e^{psi(x)/2} / sqrt(lambda_1(x, -v) + lambda_r), lambda_1 = (<v, grad psi>)_+.
double lyapunov_bps(const Potential& potential, double refresh_rate, const State& z);

/// exp(alpha psi(x) + beta delta <v, grad psi(x)>), the step-dependent function for
/// the 1-d Zig-Zag discretisations. Outward velocities weigh more.
double lyapunov_zzs_delta(const Potential& potential, double alpha, double beta, double delta, const State& z);

/// exp(a psi(x)).
double lyapunov_psi_exponent(const Potential& potential, double a, const State& z);

/// E[G(Z_bar_delta)] / G(z) for one step of the 1-d Zig-Zag scheme with frozen
/// rates (v psi'(x))_+ + gamma and G = lyapunov_zzs_delta, by quadrature over
/// the event-time density. `kind` is FD or PD.
double zzs_1d_drift_ratio(const Potential& potential, double alpha, double beta, double delta, double x, double v,
                          SchemeKind kind, double gamma = 0.0);

}  // namespace pdmp
