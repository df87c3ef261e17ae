#include "pdmp/hazard.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "pdmp/errors.hpp"

namespace pdmp {

namespace {

constexpr int kPanels = 32;

constexpr std::array<double, 4> kGlNodes = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                            0.9602898564975363};
constexpr std::array<double, 4> kGlWeights = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                              0.1012285362903763};

struct Breakpoint {
  double s;
  double da;
  double db;
};

}  // namespace

double gauss_legendre8(const std::function<double(double)>& f, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double acc = 0.0;
  for (std::size_t k = 0; k < kGlNodes.size(); ++k) {
    acc += kGlWeights[k] * (f(mid - half * kGlNodes[k]) + f(mid + half * kGlNodes[k]));
  }
  return acc * half;
}

double affine_integral(const AffineTerm& term, double t) {
  if (t <= 0.0) return 0.0;
  const double a = term.a;
  const double b = term.b;
  if (b == 0.0) return a > 0.0 ? a * t : 0.0;
  const double root = -a / b;
  if (b > 0.0) {
    const double lo = std::max(0.0, root);
    if (lo >= t) return 0.0;
    return a * (t - lo) + 0.5 * b * (t * t - lo * lo);
  }
  const double hi = std::min(t, root);
  if (hi <= 0.0) return 0.0;
  return a * hi + 0.5 * b * hi * hi;
}

void Hazard::add_curve(std::function<double(double)> f) {
  curves_.push_back(std::move(f));
  ++unbounded_curves_;
}

void Hazard::add_bounded_curve(std::function<double(double)> f, std::initializer_list<AffineTerm> bound) {
  curves_.push_back(std::move(f));
  bound_.insert(bound_.end(), bound.begin(), bound.end());
}

Hazard& Hazard::operator+=(const Hazard& other) {
  affine_.insert(affine_.end(), other.affine_.begin(), other.affine_.end());
  curves_.insert(curves_.end(), other.curves_.begin(), other.curves_.end());
  bound_.insert(bound_.end(), other.bound_.begin(), other.bound_.end());
  unbounded_curves_ += other.unbounded_curves_;
  return *this;
}

Hazard& Hazard::operator*=(double c) {
  for (auto& t : affine_) {
    t.a *= c;
    t.b *= c;
  }
  for (auto& t : bound_) {
    t.a *= c;
    t.b *= c;
  }
  for (auto& f : curves_) {
    f = [g = std::move(f), c](double s) { return c * g(s); };
  }
  return *this;
}

Hazard Hazard::shifted(double t0) const {
  Hazard out;
  out.affine_.reserve(affine_.size());
  for (const auto& t : affine_) out.affine_.push_back({t.a + t.b * t0, t.b});
  for (const auto& t : bound_) out.bound_.push_back({t.a + t.b * t0, t.b});
  out.curves_.reserve(curves_.size());
  for (const auto& f : curves_) out.curves_.push_back([f, t0](double s) { return f(s + t0); });
  out.unbounded_curves_ = unbounded_curves_;
  return out;
}

double Hazard::curve_sum(double s) const {
  double acc = 0.0;
  for (const auto& f : curves_) acc += f(s);
  return acc;
}

double Hazard::operator()(double s) const {
  double acc = 0.0;
  for (const auto& t : affine_) acc += t(s);
  return acc + curve_sum(s);
}

double Hazard::integral(double t) const {
  if (t <= 0.0) return 0.0;
  double acc = 0.0;
  for (const auto& term : affine_) acc += affine_integral(term, t);
  if (!curves_.empty()) {
    const std::function<double(double)> f = [this](double s) { return curve_sum(s); };
    const double width = t / kPanels;
    for (int k = 0; k < kPanels; ++k) acc += gauss_legendre8(f, k * width, (k + 1) * width);
  }
  return acc;
}

Hazard Hazard::dominating() const {
  Hazard out;
  out.affine_ = affine_;
  out.affine_.insert(out.affine_.end(), bound_.begin(), bound_.end());
  return out;
}

std::optional<double> Hazard::invert(double target, double horizon) const {
  if (!(horizon > 0.0)) return std::nullopt;
  if (target <= 0.0) return 0.0;
  if (curves_.empty()) return invert_affine(target, horizon);
  return invert_numeric(target, horizon);
}

std::optional<double> Hazard::invert_affine(double target, double horizon) const {
  bool all_constant = true;
  for (const auto& t : affine_) {
    if (t.b != 0.0) {
      all_constant = false;
      break;
    }
  }
  if (all_constant) {
    double rate = 0.0;
    for (const auto& t : affine_) rate += t.a > 0.0 ? t.a : 0.0;
    if (rate <= 0.0) return std::nullopt;
    const double tau = target / rate;
    if (tau > horizon) return std::nullopt;
    return tau;
  }

  double A = 0.0;
  double B = 0.0;
  std::vector<Breakpoint> events;
  events.reserve(affine_.size());
  for (const auto& t : affine_) {
    if (t.b == 0.0) {
      if (t.a > 0.0) A += t.a;
      continue;
    }
    const double root = -t.a / t.b;
    if (t.b > 0.0) {
      if (root <= 0.0) {
        A += t.a;
        B += t.b;
      } else if (root < horizon) {
        events.push_back({root, t.a, t.b});
      }
    } else if (root > 0.0) {
      A += t.a;
      B += t.b;
      if (root < horizon) events.push_back({root, -t.a, -t.b});
    }
  }
  std::sort(events.begin(), events.end(), [](const Breakpoint& l, const Breakpoint& r) { return l.s < r.s; });

  double cum = 0.0;
  double s0 = 0.0;
  std::size_t next = 0;
  for (;;) {
    const double s1 = next < events.size() ? events[next].s : horizon;
    const double width = s1 - s0;
    const double r0 = std::max(0.0, A + B * s0);
    const double seg = std::max(0.0, r0 * width + 0.5 * B * width * width);
    if (cum + seg >= target && width > 0.0) {
      const double r = target - cum;
      const double disc = std::max(0.0, r0 * r0 + 2.0 * B * r);
      const double denom = r0 + std::sqrt(disc);
      const double x = denom > 0.0 ? 2.0 * r / denom : width;
      return s0 + std::min(x, width);
    }
    cum += seg;
    if (next >= events.size()) return std::nullopt;
    const double at = events[next].s;
    while (next < events.size() && events[next].s == at) {
      A += events[next].da;
      B += events[next].db;
      ++next;
    }
    s0 = at;
  }
}

std::optional<double> Hazard::invert_numeric(double target, double horizon) const {
  if (!std::isfinite(horizon)) throw NoSimulationPath("numeric inversion needs a finite horizon");
  const std::function<double(double)> f = [this](double s) { return (*this)(s); };
  const double width = horizon / kPanels;
  double cum = 0.0;
  for (int k = 0; k < kPanels; ++k) {
    const double p0 = k * width;
    const double p1 = (k + 1) * width;
    const double seg = gauss_legendre8(f, p0, p1);
    if (cum + seg < target) {
      cum += seg;
      continue;
    }
    double lo = p0;
    double hi = p1;
    const double f0 = f(p0);
    double t = f0 > 0.0 ? std::min(p1, p0 + (target - cum) / f0) : 0.5 * (p0 + p1);
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
      const double g = cum + gauss_legendre8(f, p0, t) - target;
      if (g >= 0.0) {
        hi = t;
      } else {
        lo = t;
      }
      const double slope = f(t);
      double next = slope > 0.0 ? t - g / slope : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) < 1e-13) {
        t = next;
        break;
      }
      t = next;
    }
    return std::clamp(t, p0, p1);
  }
  return std::nullopt;
}

std::optional<double> Hazard::sample_thinning(Rng& clock, Rng& accept, double horizon) const {
  if (!thinnable()) throw NoSimulationPath("thinning requires a bound for every curve");
  const Hazard dom = dominating();
  double t = 0.0;
  for (;;) {
    const auto dt = dom.shifted(t).invert(clock.exponential(), horizon - t);
    if (!dt) return std::nullopt;
    t += *dt;
    if (t > horizon) return std::nullopt;
    const double bound = dom(t);
    const double value = (*this)(t);
    if (value > bound * (1.0 + 1e-9) + 1e-12) {
      throw ThinningBoundViolated("intensity " + std::to_string(value) + " exceeds bound " + std::to_string(bound) +
                                  " at s=" + std::to_string(t));
    }
    if (accept.uniform() * bound <= value) return t;
  }
}

}  // namespace pdmp
