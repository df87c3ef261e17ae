#include "pdmp/models/models.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pdmp/errors.hpp"
#include "pdmp/exact.hpp"

namespace pdmp {

namespace {

constexpr double kLog2 = std::numbers::ln2;

double positive(double r) { return r > 0.0 ? r : 0.0; }

double apply_style(ZzsRateStyle style, double r) {
  return style == ZzsRateStyle::PositivePart ? positive(r) : smooth_switch(r);
}

void linear_transport(State& z, double t) { z.x += t * z.v; }

void transport_field(const State& z, State& out) {
  out.x = z.v;
  out.v = Vector::Zero(z.v.size());
}

}  // namespace

double smooth_switch(double r) { return r > 0.0 ? r + std::log1p(std::exp(-r)) : std::log1p(std::exp(r)); }

double zzs_rate(const ZzsModel& model, const State& z, int i) {
  return apply_style(model.style, z.v(i) * model.potential->partial(z.x, i)) + model.gamma(i);
}

Vector zzs_flip(Vector v, int i) {
  v(i) = -v(i);
  return v;
}

PdmpSpec model_to_pdmp(const ZzsModel& model) {
  if (!model.potential) throw InvalidConfig("zzs: potential missing");
  const int d = model.potential->dim();
  if (model.excess.size() != 0 && model.excess.size() != d) throw InvalidConfig("zzs: excess has wrong size");
  if (model.excess.size() != 0 && (model.excess.array() < 0.0).any()) throw InvalidConfig("zzs: negative excess");

  PdmpSpec spec;
  spec.name = "zzs";
  spec.dim_x = d;
  spec.dim_v = d;
  spec.flow.exact = linear_transport;
  spec.flow.vector_field = transport_field;

  const auto pot = model.potential;
  const ZzsRateStyle style = model.style;
  const Vector excess = model.excess.size() == 0 ? Vector::Zero(d) : model.excess;

  spec.rates.m = d;
  spec.rates.evaluate = [pot, style, excess](const State& z, std::span<double> out) {
    Vector g;
    pot->gradient(z.x, g);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      out[i] = apply_style(style, z.v(k) * g(k)) + excess(k);
    }
  };

  if (const GaussianPotential* gauss = pot->as_gaussian()) {
    spec.rates.along_flow = [pot, gauss, style, excess](const State& z, double, std::span<Hazard> out) {
      Vector g;
      gauss->gradient(z.x, g);
      const Vector av = gauss->apply(z.v);
      for (std::size_t i = 0; i < out.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const double a = z.v(k) * g(k);
        const double b = z.v(k) * av(k);
        if (style == ZzsRateStyle::PositivePart) {
          out[i].add_affine(a, b);
        } else {
          out[i].add_bounded_curve([a, b](double s) { return smooth_switch(a + b * s); }, {{a, b}, {kLog2, 0.0}});
        }
        out[i].add_constant(excess(k));
      }
    };
  } else {
    spec.rates.along_flow = [pot, style, excess](const State& z, double, std::span<Hazard> out) {
      auto base = std::make_shared<const State>(z);
      Vector g;
      pot->gradient(z.x, g);
      const int d = static_cast<int>(out.size());
      for (int i = 0; i < d; ++i) {
        const double r0 = z.v(i) * g(i);
        auto curve = [pot, base, style, i](double s) {
          const Vector xs = base->x + s * base->v;
          return apply_style(style, base->v(i) * pot->partial(xs, i));
        };
        const auto m = pot->curvature_bound(Vector::Unit(d, i), z.v);
        if (!m) {
          out[i].add_curve(curve);
        } else if (style == ZzsRateStyle::PositivePart) {
          out[i].add_bounded_curve(curve, {{r0, *m}});
        } else {
          out[i].add_bounded_curve(curve, {{r0, *m}, {kLog2, 0.0}});
        }
        out[i].add_constant(excess(i));
      }
    };
  }

  spec.finite_difference = [pot, style, excess](const State& z, double delta, std::span<double> out) {
    const double base = pot->value(z.x);
    Vector xs = z.x;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      xs(k) += z.v(k) * delta;
      out[i] = apply_style(style, (pot->value(xs) - base) / delta) + excess(k);
      xs(k) = z.x(k);
    }
  };

  spec.kernels.m = d;
  spec.kernels.noise_dim = 0;
  spec.kernels.apply = [](State& z, int i, const Noise&) { z.v(i) = -z.v(i); };
  return spec;
}

Vector bps_reflect(const Vector& grad, const Vector& v) {
  const double n2 = grad.squaredNorm();
  if (!(std::sqrt(n2) >= 1e-300)) throw ZeroGradient("reflection undefined where the gradient vanishes");
  return v - (2.0 * v.dot(grad) / n2) * grad;
}

PdmpSpec model_to_pdmp(const BpsModel& model) {
  if (!model.potential) throw InvalidConfig("bps: potential missing");
  if (!(model.refresh_rate > 0.0)) throw InvalidConfig("bps: refresh_rate must be positive");
  const int d = model.potential->dim();
  const auto pot = model.potential;
  const double lr = model.refresh_rate;
  const RefreshLaw law = model.refresh;

  PdmpSpec spec;
  spec.name = "bps";
  spec.dim_x = d;
  spec.dim_v = d;
  spec.flow.exact = linear_transport;
  spec.flow.vector_field = transport_field;

  spec.rates.m = 2;
  spec.rates.evaluate = [pot, lr](const State& z, std::span<double> out) {
    Vector g;
    pot->gradient(z.x, g);
    out[0] = positive(z.v.dot(g));
    out[1] = lr;
  };
  if (const GaussianPotential* gauss = pot->as_gaussian()) {
    spec.rates.along_flow = [gauss, lr](const State& z, double, std::span<Hazard> out) {
      Vector g;
      gauss->gradient(z.x, g);
      out[0].add_affine(z.v.dot(g), z.v.dot(gauss->apply(z.v)));
      out[1].add_constant(lr);
    };
  } else {
    spec.rates.along_flow = [pot, lr](const State& z, double, std::span<Hazard> out) {
      auto base = std::make_shared<const State>(z);
      Vector g;
      pot->gradient(z.x, g);
      auto curve = [pot, base](double s) {
        Vector gs;
        pot->gradient(base->x + s * base->v, gs);
        return positive(base->v.dot(gs));
      };
      if (const auto m = pot->curvature_bound(z.v, z.v)) {
        out[0].add_bounded_curve(curve, {{z.v.dot(g), *m}});
      } else {
        out[0].add_curve(curve);
      }
      out[1].add_constant(lr);
    };
  }
  spec.finite_difference = [pot, lr](const State& z, double delta, std::span<double> out) {
    out[0] = positive((pot->value(z.x + delta * z.v) - pot->value(z.x)) / delta);
    out[1] = lr;
  };

  spec.kernels.m = 2;
  spec.kernels.noise_dim = d;
  spec.kernels.draw_noise = [law](Rng& rng, Noise& u) {
    for (Eigen::Index k = 0; k < u.size(); ++k) u(k) = rng.normal();
    if (law == RefreshLaw::Sphere) u /= u.norm();
  };
  spec.kernels.apply = [pot](State& z, int i, const Noise& u) {
    if (i == 0) {
      Vector g;
      pot->gradient(z.x, g);
      z.v = bps_reflect(g, z.v);
    } else {
      z.v = u;
    }
  };
  return spec;
}

PdmpSpec model_to_pdmp(const RhmcModel& model) {
  if (!model.potential) throw InvalidConfig("rhmc: potential missing");
  if (!(model.refresh_rate > 0.0)) throw InvalidConfig("rhmc: refresh_rate must be positive");
  const int d = model.potential->dim();
  const auto pot = model.potential;
  const double lr = model.refresh_rate;

  PdmpSpec spec;
  spec.name = "rhmc";
  spec.dim_x = d;
  spec.dim_v = d;
  spec.flow.vector_field = [pot](const State& z, State& out) {
    Vector g;
    pot->gradient(z.x, g);
    out.x = z.v;
    out.v = -g;
  };
  spec.flow.potential_gradient = [pot](const Vector& q, Vector& g) { pot->gradient(q, g); };
  const GaussianPotential* gauss = pot->as_gaussian();
  if (gauss && gauss->is_diagonal()) {
    const Vector omega = gauss->diag().cwiseSqrt();
    const Vector mu = gauss->mean();
    spec.flow.exact = [omega, mu](State& z, double t) {
      for (Eigen::Index k = 0; k < omega.size(); ++k) {
        const double w = omega(k);
        const double c = std::cos(w * t);
        const double s = std::sin(w * t);
        const double q = z.x(k) - mu(k);
        const double p = z.v(k);
        z.x(k) = mu(k) + q * c + p * s / w;
        z.v(k) = -q * w * s + p * c;
      }
    };
    spec.flow.lipschitz_hint = omega.maxCoeff();
  }

  spec.rates.m = 1;
  spec.rates.evaluate = [lr](const State&, std::span<double> out) { out[0] = lr; };
  spec.rates.along_flow = [lr](const State&, double, std::span<Hazard> out) { out[0].add_constant(lr); };
  spec.finite_difference = [lr](const State&, double, std::span<double> out) { out[0] = lr; };

  spec.kernels.m = 1;
  spec.kernels.noise_dim = d;
  spec.kernels.draw_noise = [](Rng& rng, Noise& u) {
    for (Eigen::Index k = 0; k < u.size(); ++k) u(k) = rng.normal();
  };
  spec.kernels.apply = [](State& z, int, const Noise& u) { z.v = u; };
  return spec;
}

PdmpSpec model_to_pdmp(const TelegraphModel& model) {
  if (!(model.rate >= 0.0)) throw InvalidConfig("telegraph: rate must be non-negative");
  const double lambda = model.rate;
  PdmpSpec spec;
  spec.name = "telegraph";
  spec.dim_x = 1;
  spec.dim_v = 1;
  spec.flow.exact = linear_transport;
  spec.flow.vector_field = transport_field;
  spec.rates.m = 1;
  spec.rates.evaluate = [lambda](const State&, std::span<double> out) { out[0] = lambda; };
  spec.rates.along_flow = [lambda](const State&, double, std::span<Hazard> out) { out[0].add_constant(lambda); };
  spec.finite_difference = [lambda](const State&, double, std::span<double> out) { out[0] = lambda; };
  spec.kernels.m = 1;
  spec.kernels.apply = [](State& z, int, const Noise&) { z.v(0) = -z.v(0); };
  return spec;
}

double MorrisLecarModel::m_inf(double nu) const { return 0.5 * (1.0 + std::tanh((nu - v1) / v2)); }

double MorrisLecarModel::n_inf(double nu) const { return 0.5 * (1.0 + std::tanh((nu - v3) / v4)); }

double MorrisLecarModel::lambda_k(double nu) const { return lambda_k_bar * std::cosh((nu - v3) / (2.0 * v4)); }

double MorrisLecarModel::drift(double theta, double nu) const {
  return (1.0 - g_leak * (nu - v_leak) - g_ca * m_inf(nu) * (nu - v_ca) -
          g_k * (theta / static_cast<double>(n_k)) * (nu - v_k)) /
         C;
}

void MorrisLecarModel::validate() const {
  if (!(C > 0.0)) throw InvalidConfig("morris_lecar: C must be positive");
  if (v2 == 0.0 || v4 == 0.0) throw InvalidConfig("morris_lecar: V2 and V4 must be non-zero");
  if (n_k < 1) throw InvalidConfig("morris_lecar: N_K must be >= 1");
  if (!(lambda_k_bar > 0.0)) throw InvalidConfig("morris_lecar: lambda_K_bar must be positive");
}

PdmpSpec model_to_pdmp(const MorrisLecarModel& model) {
  model.validate();
  const MorrisLecarModel ml = model;
  PdmpSpec spec;
  spec.name = "morris_lecar";
  spec.dim_x = 1;
  spec.dim_v = 1;
  spec.flow.vector_field = [ml](const State& z, State& out) {
    out.x = Vector::Constant(1, ml.drift(z.v(0), z.x(0)));
    out.v = Vector::Zero(1);
  };
  spec.rates.m = 2;
  spec.rates.evaluate = [ml](const State& z, std::span<double> out) {
    const double theta = z.v(0);
    const double nu = z.x(0);
    out[0] = positive((ml.n_k - theta) * ml.alpha_k(nu));
    out[1] = positive(theta * ml.beta_k(nu));
  };
  spec.kernels.m = 2;
  spec.kernels.apply = [](State& z, int i, const Noise&) { z.v(0) += i == 0 ? 1.0 : -1.0; };
  return spec;
}

PdmpSpec model_to_pdmp(const CellSizeModel& model) {
  if (!(model.growth > 0.0) || !(model.division > 0.0) || !(model.window > 0.0)) {
    throw InvalidConfig("cell_size: growth, division and window must be positive");
  }
  const double g = model.growth;
  const double b = model.division;
  PdmpSpec spec;
  spec.name = "cell_size";
  spec.dim_x = 1;
  spec.dim_v = 0;
  spec.max_window = model.window;
  spec.flow.exact = [g](State& z, double t) { z.x *= std::exp(g * t); };
  spec.flow.vector_field = [g](const State& z, State& out) {
    out.x = g * z.x;
    out.v = Vector::Zero(0);
  };
  spec.flow.lipschitz_hint = g;
  spec.rates.m = 1;
  spec.rates.evaluate = [b](const State& z, std::span<double> out) { out[0] = positive(b * z.x(0)); };
  spec.rates.along_flow = [g, b](const State& z, double horizon, std::span<Hazard> out) {
    const double r0 = positive(b * z.x(0));
    out[0].add_bounded_curve([r0, g](double s) { return r0 * std::exp(g * s); }, {{r0 * std::exp(g * horizon), 0.0}});
  };
  spec.kernels.m = 1;
  spec.kernels.apply = [](State& z, int, const Noise&) { z.x *= 0.5; };
  return spec;
}

double ZzsSubsamplingModel::term_rate(int j, const State& z, int i) const {
  return positive(z.v(i) * potential->term_partial(j, z.x, i));
}

SubsamplingRecord subsampling_step(const ZzsSubsamplingModel& model, State& z, double delta, StreamSet& rng,
                                   SubsamplingUpdate update) {
  SubsamplingRecord rec;
  rec.datum = static_cast<int>(rng(Stream::Subsample).index(static_cast<std::size_t>(model.terms())));
  const int d = static_cast<int>(z.x.size());
  std::vector<double> rates(static_cast<std::size_t>(d));
  double total = 0.0;
  for (int i = 0; i < d; ++i) {
    rates[i] = model.term_rate(rec.datum, z, i);
    total += rates[i];
  }
  const double e = rng(Stream::EventClock).exponential();
  if (total > 0.0 && e / total <= delta) {
    rec.tau = e / total;
    rec.kernel = sample_kernel_index(rates, rng(Stream::KernelSelect));
  }
  if (!rec.tau) {
    z.x += delta * z.v;
    return rec;
  }
  const double tau = *rec.tau;
  const Vector v_old = z.v;
  z.v(rec.kernel) = -z.v(rec.kernel);
  if (update == SubsamplingUpdate::Displayed) {
    z.x += (delta - tau) * v_old + tau * z.v;
  } else {
    z.x += tau * v_old + (delta - tau) * z.v;
  }
  return rec;
}

PdmpSpec term_pdmp(const ZzsSubsamplingModel& model, int j) {
  const auto pot = model.potential;
  const int d = pot->dim();
  PdmpSpec spec;
  spec.name = "zzs_term_" + std::to_string(j);
  spec.dim_x = d;
  spec.dim_v = d;
  spec.flow.exact = linear_transport;
  spec.flow.vector_field = transport_field;
  spec.rates.m = d;
  spec.rates.evaluate = [pot, j](const State& z, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const int k = static_cast<int>(i);
      out[i] = positive(z.v(k) * pot->term_partial(j, z.x, k));
    }
  };
  spec.rates.along_flow = [pot, j](const State& z, double, std::span<Hazard> out) {
    auto base = std::make_shared<const State>(z);
    const int d = static_cast<int>(out.size());
    for (int i = 0; i < d; ++i) {
      const double r0 = z.v(i) * pot->term_partial(j, z.x, i);
      const double m = pot->term_curvature_bound(j, Vector::Unit(d, i), z.v);
      out[i].add_bounded_curve(
          [pot, base, i, j](double s) {
            return positive(base->v(i) * pot->term_partial(j, base->x + s * base->v, i));
          },
          {{r0, m}});
    }
  };
  spec.kernels.m = d;
  spec.kernels.apply = [](State& z, int i, const Noise&) { z.v(i) = -z.v(i); };
  return spec;
}

PdmpSpec model_to_pdmp(const ZzsSubsamplingModel& model) {
  return model_to_pdmp(ZzsModel{model.potential, ZzsRateStyle::PositivePart, Vector()});
}

}  // namespace pdmp
