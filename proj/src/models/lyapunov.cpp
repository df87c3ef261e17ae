#include "pdmp/models/lyapunov.hpp"

#include <cmath>

#include "pdmp/errors.hpp"
#include "pdmp/hazard.hpp"

namespace pdmp {

double phi_epsilon(double s, double epsilon) {
  if (s == 0.0) return 0.0;
  const double mag = 0.5 * std::log1p(epsilon * std::abs(s));
  return s > 0.0 ? mag : -mag;
}

double lyapunov_zzs(const Potential& potential, double alpha, double epsilon, const State& z) {
  Vector g;
  potential.gradient(z.x, g);
  double acc = alpha * potential.value(z.x);
  for (Eigen::Index i = 0; i < g.size(); ++i) acc += phi_epsilon(z.v(i) * g(i), epsilon);
  return std::exp(acc);
}

double lyapunov_bps(const Potential& potential, double refresh_rate, const State& z) {
  if (!(refresh_rate > 0.0)) throw InvalidConfig("bps Lyapunov function needs a positive refresh rate");
  Vector g;
  potential.gradient(z.x, g);
  const double bounce = std::max(0.0, -z.v.dot(g));
  return std::exp(0.5 * potential.value(z.x)) / std::sqrt(bounce + refresh_rate);
}

double lyapunov_zzs_delta(const Potential& potential, double alpha, double beta, double delta, const State& z) {
  Vector g;
  potential.gradient(z.x, g);
  return std::exp(alpha * potential.value(z.x) + beta * delta * z.v.dot(g));
}

double lyapunov_psi_exponent(const Potential& potential, double a, const State& z) {
  return std::exp(a * potential.value(z.x));
}

double zzs_1d_drift_ratio(const Potential& potential, double alpha, double beta, double delta, double x, double v,
                          SchemeKind kind, double gamma) {
  if (potential.dim() != 1) throw InvalidConfig("zzs_1d_drift_ratio needs a 1-d potential");
  auto G = [&](double xx, double vv) {
    return lyapunov_zzs_delta(potential, alpha, beta, delta, State(Vector::Constant(1, xx), Vector::Constant(1, vv)));
  };
  const double lambda = std::max(0.0, v * potential.partial(Vector::Constant(1, x), 0)) + gamma;
  const double stay = std::exp(-delta * lambda);
  const double base = G(x, v);
  double expected = stay * G(x + v * delta, v);
  if (kind == SchemeKind::FD) {
    expected += (1.0 - stay) * G(x + v * delta, -v);
  } else if (lambda > 0.0) {
    const std::function<double(double)> density = [&](double s) {
      return lambda * std::exp(-s * lambda) * G(x + v * (2.0 * s - delta), -v);
    };
    constexpr int panels = 16;
    const double w = delta / panels;
    for (int k = 0; k < panels; ++k) expected += gauss_legendre8(density, k * w, (k + 1) * w);
  }
  return expected / base;
}

}  // namespace pdmp
