#include "pdmp/diagnostics/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pdmp/errors.hpp"

namespace pdmp {

TwoVelocityModel1d telegraph_1d(double rate) {
  return {[rate](double) { return rate; }, [rate](double) { return rate; }};
}

TwoVelocityModel1d zzs_gaussian_1d() {
  return {[](double x) { return std::max(0.0, x); }, [](double x) { return std::max(0.0, -x); }};
}

namespace {

std::vector<double> solve(const TwoVelocityModel1d& model, double x0, double v0, double T, double dx,
                          std::span<const TestFn1d> tests, double* dt_out) {
  const auto steps = static_cast<long>(std::ceil(T / (0.5 * dx)));
  const double dt = T / static_cast<double>(steps);
  const double c = dt / dx;
  // Upwind smears a point mass with spread ~ sqrt(T dx); keep it on the grid.
  const double span = T / dx;
  const auto half = static_cast<long>(std::ceil(span + 12.0 * std::sqrt(span))) + 8;
  const std::size_t cells = static_cast<std::size_t>(2 * half + 1);

  std::vector<double> xs(cells), lp(cells), lm(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    xs[k] = x0 + (static_cast<double>(k) - static_cast<double>(half)) * dx;
    lp[k] = model.rate_plus(xs[k]);
    lm[k] = model.rate_minus(xs[k]);
  }
  std::vector<double> p(cells, 0.0), m(cells, 0.0), np(cells), nm(cells);
  (v0 > 0.0 ? p : m)[static_cast<std::size_t>(half)] = 1.0 / dx;

  for (long n = 0; n < steps; ++n) {
    for (std::size_t k = 0; k < cells; ++k) {
      const double left = k > 0 ? p[k - 1] : 0.0;
      const double right = k + 1 < cells ? m[k + 1] : 0.0;
      const double flip_p = dt * lp[k] * p[k];
      const double flip_m = dt * lm[k] * m[k];
      np[k] = p[k] - c * (p[k] - left) - flip_p + flip_m;
      nm[k] = m[k] - c * (m[k] - right) - flip_m + flip_p;
    }
    p.swap(np);
    m.swap(nm);
  }

  std::vector<double> out(tests.size(), 0.0);
  for (std::size_t j = 0; j < tests.size(); ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < cells; ++k) acc += tests[j](xs[k], 1.0) * p[k] + tests[j](xs[k], -1.0) * m[k];
    out[j] = acc * dx;
  }
  if (dt_out) *dt_out = dt;
  return out;
}

}  // namespace

OracleResult forward_pde_oracle_1d(const TwoVelocityModel1d& model, double x0, double v0, double T, double dx,
                                   std::span<const TestFn1d> tests, double tolerance) {
  if (!(T > 0.0) || !(dx > 0.0)) throw InvalidConfig("oracle needs T > 0 and dx > 0");
  if (v0 != 1.0 && v0 != -1.0) throw InvalidConfig("oracle velocity must be +1 or -1");
  OracleResult r;
  r.dx = dx;
  r.values = solve(model, x0, v0, T, dx, tests, &r.dt);
  r.coarse_values = solve(model, x0, v0, T, 2.0 * dx, tests, nullptr);
  for (std::size_t j = 0; j < tests.size(); ++j) {
    r.self_convergence = std::max(r.self_convergence, std::abs(r.values[j] - r.coarse_values[j]));
  }
  if (r.self_convergence > tolerance) {
    throw GridTooCoarse("oracle self-convergence " + std::to_string(r.self_convergence) + " exceeds tolerance " +
                        std::to_string(tolerance));
  }
  return r;
}

TelegraphMoments telegraph_moments(double rate, double t, double x0, double v0) {
  double ey = 0.0;
  double ey2 = 0.0;
  if (rate == 0.0) {
    ey = v0 * t;
    ey2 = t * t;
  } else {
    const double decay = -std::expm1(-2.0 * rate * t);
    ey = v0 * decay / (2.0 * rate);
    ey2 = t / rate - decay / (2.0 * rate * rate);
  }
  return {x0 + ey, x0 * x0 + 2.0 * x0 * ey + ey2};
}

}  // namespace pdmp
