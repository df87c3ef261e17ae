#pragma once

#include <functional>
#include <initializer_list>
#include <optional>
#include <vector>

#include "pdmp/rng.hpp"

namespace pdmp {

/// s -> (a + b s)_+
struct AffineTerm {
  double a = 0.0;
  double b = 0.0;

  double operator()(double s) const {
    const double r = a + b * s;
    return r > 0.0 ? r : 0.0;
  }
};

/// An intensity s -> h(s) >= 0 on [0, horizon], used for event clocks.
///
/// The intensity is a sum of positive-part affine terms plus optional
/// non-affine curves. Affine-only hazards are inverted in closed form. Curves
/// are inverted numerically, or sampled by thinning when every curve has been
/// registered together with an affine dominating bound.
class Hazard {
 public:
  Hazard() = default;

  static Hazard constant(double c) {
    Hazard h;
    h.add_affine(c, 0.0);
    return h;
  }
  static Hazard affine(double a, double b) {
    Hazard h;
    h.add_affine(a, b);
    return h;
  }

  void clear() {
    affine_.clear();
    curves_.clear();
    bound_.clear();
    unbounded_curves_ = 0;
  }

  void add_affine(double a, double b) {
    if (a == 0.0 && b == 0.0) return;
    affine_.push_back({a, b});
  }
  void add_constant(double c) { add_affine(c, 0.0); }

  /// Adds a curve with no known bound (numeric inversion only).
  void add_curve(std::function<double(double)> f);
  /// Adds a curve dominated on the horizon by the sum of `bound` terms.
  void add_bounded_curve(std::function<double(double)> f, std::initializer_list<AffineTerm> bound);

  Hazard& operator+=(const Hazard& other);

  /// Scales every term by c >= 0.
  Hazard& operator*=(double c);

  /// s -> h(t0 + s).
  Hazard shifted(double t0) const;

  double operator()(double s) const;

  /// Integral over [0, t].
  double integral(double t) const;

  bool is_affine() const { return curves_.empty(); }
  bool is_zero() const { return affine_.empty() && curves_.empty(); }
  bool thinnable() const { return unbounded_curves_ == 0; }

  /// The affine part plus the curve bounds; dominates *this when thinnable().
  Hazard dominating() const;

  /// Smallest t in [0, horizon] with integral(t) >= target, or none.
  /// Closed form for affine hazards, safeguarded Newton otherwise (1e-12).
  std::optional<double> invert(double target, double horizon) const;

  /// First event time of an inhomogeneous Poisson clock on [0, horizon] by
  /// thinning against dominating(). Throws ThinningBoundViolated if a candidate
  /// has h(s) above the bound.
  std::optional<double> sample_thinning(Rng& clock, Rng& accept, double horizon) const;

  const std::vector<AffineTerm>& affine_terms() const { return affine_; }

 private:
  std::optional<double> invert_affine(double target, double horizon) const;
  std::optional<double> invert_numeric(double target, double horizon) const;
  double curve_sum(double s) const;

  std::vector<AffineTerm> affine_;
  std::vector<std::function<double(double)>> curves_;
  std::vector<AffineTerm> bound_;
  int unbounded_curves_ = 0;
};

/// Integral of s -> (a + b s)_+ over [0, t].
double affine_integral(const AffineTerm& term, double t);

/// Gauss-Legendre rule with 8 nodes on [lo, hi].
double gauss_legendre8(const std::function<double(double)>& f, double lo, double hi);

}  // namespace pdmp
