#include "pdmp/schemes/scheme.hpp"

#include <cmath>
#include <string>

#include "pdmp/errors.hpp"
#include "pdmp/exact.hpp"

namespace pdmp {

std::string_view to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::FD: return "fd";
    case SchemeKind::PD: return "pd";
    case SchemeKind::OrderP: return "order_p";
  }
  return "?";
}

std::string_view to_string(RateApproxKind k) {
  switch (k) {
    case RateApproxKind::Frozen: return "frozen";
    case RateApproxKind::Endpoint: return "endpoint";
    case RateApproxKind::AlongIntegrator: return "along_integrator";
    case RateApproxKind::FiniteDifference: return "finite_difference";
    case RateApproxKind::LinearSecondOrder: return "linear_second_order";
    case RateApproxKind::Exact: return "exact";
  }
  return "?";
}

std::string_view to_string(IntegratorKind k) {
  switch (k) {
    case IntegratorKind::ExactFlow: return "exact";
    case IntegratorKind::Euler: return "euler";
    case IntegratorKind::Leapfrog: return "leapfrog";
    case IntegratorKind::Custom: return "custom";
  }
  return "?";
}

std::optional<SchemeKind> parse_scheme_kind(std::string_view s) {
  for (auto k : {SchemeKind::FD, SchemeKind::PD, SchemeKind::OrderP}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::optional<RateApproxKind> parse_rate_approx(std::string_view s) {
  for (auto k : {RateApproxKind::Frozen, RateApproxKind::Endpoint, RateApproxKind::AlongIntegrator,
                 RateApproxKind::FiniteDifference, RateApproxKind::LinearSecondOrder, RateApproxKind::Exact}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::optional<IntegratorKind> parse_integrator(std::string_view s) {
  for (auto k : {IntegratorKind::ExactFlow, IntegratorKind::Euler, IntegratorKind::Leapfrog, IntegratorKind::Custom}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

Mesh Mesh::uniform(double delta, double T) {
  if (!(delta > 0.0) || !(T > 0.0)) throw InvalidConfig("mesh needs delta > 0 and T > 0");
  const auto n = static_cast<std::size_t>(std::llround(T / delta));
  if (n == 0 || std::abs(static_cast<double>(n) * delta - T) > 1e-9 * T) {
    throw InvalidConfig("T = " + std::to_string(T) + " is not a multiple of delta = " + std::to_string(delta));
  }
  return Mesh{std::vector<double>(n, delta)};
}

double Mesh::horizon() const {
  double t = 0.0;
  for (double d : steps) t += d;
  return t;
}

std::vector<double> Mesh::times() const {
  std::vector<double> out;
  out.reserve(steps.size() + 1);
  out.push_back(0.0);
  double t = 0.0;
  for (std::size_t n = 0; n < steps.size(); ++n) {
    t += steps[n];
    out.push_back(t);
  }
  return out;
}

std::size_t DiscretePath::event_count() const {
  std::size_t n = 0;
  for (const auto& e : events) n += e.size();
  return n;
}

RateApproxKind SchemeConfig::rate_for_order(int q) const {
  if (q >= 1 && static_cast<std::size_t>(q) <= rates_by_order.size()) return rates_by_order[q - 1];
  return RateApproxKind::Frozen;
}

void SchemeConfig::validate() const {
  if (order < 1) throw InvalidConfig("scheme order must be >= 1");
  if (kind != SchemeKind::OrderP && order != 1) throw InvalidConfig("fd and pd schemes are first order");
  if (kind == SchemeKind::FD && rates_by_order.size() > 1) throw InvalidConfig("fd takes a single rate approximation");
  for (double d : mesh.steps) {
    if (!(d > 0.0)) throw InvalidConfig("mesh steps must be positive");
    if (d > delta0) throw InvalidConfig("mesh step " + std::to_string(d) + " exceeds delta0");
  }
  if (flow.integrator == IntegratorKind::Custom && !flow.custom) {
    throw InvalidConfig("custom integrator selected without a step function");
  }
}

void integrator_step(const FlowApprox& fa, const Flow& flow, State& z, double s, double delta, int q) {
  if (s == 0.0) return;
  switch (fa.integrator) {
    case IntegratorKind::ExactFlow:
      if (!flow.exact) throw NoExactFlow("exact flow requested but the model has none");
      flow.exact(z, s);
      return;
    case IntegratorKind::Euler: {
      if (!flow.vector_field) throw NoVectorField("euler step needs the vector field");
      State dz;
      flow.vector_field(z, dz);
      z.x += s * dz.x;
      if (dz.v.size() == z.v.size()) z.v += s * dz.v;
      return;
    }
    case IntegratorKind::Leapfrog: {
      if (!flow.potential_gradient) throw NoVectorField("leapfrog needs a potential gradient");
      Vector g(z.x.size());
      flow.potential_gradient(z.x, g);
      z.v -= 0.5 * s * g;
      z.x += s * z.v;
      flow.potential_gradient(z.x, g);
      z.v -= 0.5 * s * g;
      return;
    }
    case IntegratorKind::Custom:
      if (!fa.custom) throw NoVectorField("custom integrator has no step function");
      fa.custom(z, s, delta, q);
      return;
  }
}

State integrator_step(const FlowApprox& fa, const Flow& flow, const State& z, double s, double delta, int q) {
  State out = z;
  integrator_step(fa, flow, out, s, delta, q);
  return out;
}

namespace {

State endpoint_state(const PdmpSpec& spec, const SchemeConfig& cfg, const State& z, double delta, int q) {
  State end = z;
  if (spec.flow.has_exact()) {
    spec.flow.exact(end, delta);
  } else {
    integrator_step(cfg.flow, spec.flow, end, delta, delta, q);
  }
  return end;
}

std::vector<double> rates_at(const PdmpSpec& spec, const State& z) {
  std::vector<double> r(static_cast<std::size_t>(spec.rates.m));
  spec.rates.evaluate(z, r);
  return r;
}

}  // namespace

void rate_approx_hazards(RateApproxKind kind, const PdmpSpec& spec, const SchemeConfig& cfg, const State& z,
                         double delta, int q, std::span<Hazard> out) {
  const auto m = static_cast<std::size_t>(spec.rates.m);
  for (auto& h : out) h.clear();
  switch (kind) {
    case RateApproxKind::Frozen: {
      const auto r = rates_at(spec, z);
      for (std::size_t i = 0; i < m; ++i) out[i].add_constant(r[i]);
      return;
    }
    case RateApproxKind::Endpoint: {
      const auto r = rates_at(spec, endpoint_state(spec, cfg, z, delta, q));
      for (std::size_t i = 0; i < m; ++i) out[i].add_constant(r[i]);
      return;
    }
    case RateApproxKind::FiniteDifference: {
      if (!spec.finite_difference) throw InvalidConfig(spec.name + " has no finite-difference rates");
      std::vector<double> r(m);
      spec.finite_difference(z, delta, r);
      for (std::size_t i = 0; i < m; ++i) out[i].add_constant(std::max(0.0, r[i]));
      return;
    }
    case RateApproxKind::LinearSecondOrder: {
      const auto r0 = rates_at(spec, z);
      const auto r1 = rates_at(spec, endpoint_state(spec, cfg, z, delta, q));
      for (std::size_t i = 0; i < m; ++i) out[i].add_affine(r0[i], (r1[i] - r0[i]) / delta);
      return;
    }
    case RateApproxKind::AlongIntegrator: {
      for (std::size_t i = 0; i < m; ++i) {
        out[i].add_curve([&spec, &cfg, z, delta, q, i](double s) {
          const State zs = integrator_step(cfg.flow, spec.flow, z, s, delta, q);
          std::vector<double> r(static_cast<std::size_t>(spec.rates.m));
          spec.rates.evaluate(zs, r);
          return std::max(0.0, r[i]);
        });
      }
      return;
    }
    case RateApproxKind::Exact:
      if (!spec.rates.along_flow) throw NoSimulationPath(spec.name + " has no rates along the exact flow");
      spec.rates.along_flow(z, delta, out);
      return;
  }
}

std::vector<double> rate_approx_eval(RateApproxKind kind, const PdmpSpec& spec, const SchemeConfig& cfg,
                                     const State& z, double s, double delta, int q) {
  std::vector<Hazard> h(static_cast<std::size_t>(spec.rates.m));
  rate_approx_hazards(kind, spec, cfg, z, delta, q, h);
  std::vector<double> out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) out[i] = std::max(0.0, h[i](s));
  return out;
}

SchemeStepper::SchemeStepper(const PdmpSpec& spec, const SchemeConfig& cfg)
    : spec_(spec),
      cfg_(cfg),
      rates_(static_cast<std::size_t>(spec.rates.m)),
      hazards_(static_cast<std::size_t>(spec.rates.m)) {
  cfg_.validate();
}

bool SchemeStepper::constant_rates(RateApproxKind kind, const State& z, double delta, int q) {
  switch (kind) {
    case RateApproxKind::Frozen:
      spec_.rates.evaluate(z, rates_);
      return true;
    case RateApproxKind::Endpoint:
      spec_.rates.evaluate(endpoint_state(spec_, cfg_, z, delta, q), rates_);
      return true;
    case RateApproxKind::FiniteDifference:
      if (!spec_.finite_difference) throw InvalidConfig(spec_.name + " has no finite-difference rates");
      spec_.finite_difference(z, delta, rates_);
      for (auto& r : rates_) r = std::max(0.0, r);
      return true;
    default:
      return false;
  }
}

std::span<Hazard> SchemeStepper::hazards(const State& z, double delta, int q) {
  rate_approx_hazards(cfg_.rate_for_order(q), spec_, cfg_, z, delta, q, hazards_);
  return hazards_;
}

ApproxEvent SchemeStepper::sample_event(const State& z, double delta, int q, double horizon, StreamSet& rng) {
  const double e = rng(Stream::EventClock).exponential();
  const RateApproxKind kind = cfg_.rate_for_order(q);
  if (constant_rates(kind, z, delta, q)) {
    double total = 0.0;
    for (double r : rates_) total += r;
    if (!(total > 0.0)) return {};
    const double tau = e / total;
    if (tau > horizon) return {};
    return {tau, sample_kernel_index(rates_, rng(Stream::KernelSelect))};
  }
  rate_approx_hazards(kind, spec_, cfg_, z, delta, q, hazards_);
  total_.clear();
  for (const auto& h : hazards_) total_ += h;
  const auto tau = total_.invert(e, horizon);
  if (!tau) return {};
  double sum = 0.0;
  for (std::size_t i = 0; i < hazards_.size(); ++i) {
    rates_[i] = std::max(0.0, hazards_[i](*tau));
    sum += rates_[i];
  }
  if (!(sum > 0.0)) return {};
  return {tau, sample_kernel_index(rates_, rng(Stream::KernelSelect))};
}

void SchemeStepper::jump(State& z, int i, const Noise& u, double delta, int q) const {
  if (cfg_.kernel.apply) {
    cfg_.kernel.apply(z, i, u, delta, q);
  } else {
    spec_.kernels.apply(z, i, u);
  }
}

void SchemeStepper::move(State& z, double s, double delta, int q) const {
  integrator_step(cfg_.flow, spec_.flow, z, s, delta, q);
}

void SchemeStepper::step_fd(State& z, double delta, StreamSet& rng, std::vector<StepEvent>* events) {
  const ApproxEvent ev = sample_event(z, delta, 1, delta, rng);
  move(z, delta, delta, 1);
  if (ev.time) {
    spec_.kernels.draw(rng(Stream::KernelNoise), noise_);
    jump(z, ev.kernel, noise_, delta, 1);
    if (events) events->push_back({delta, ev.kernel});
  }
}

void SchemeStepper::step_pd(State& z, double delta, StreamSet& rng, std::vector<StepEvent>* events) {
  const ApproxEvent ev = sample_event(z, delta, 1, delta, rng);
  if (ev.time && *ev.time < delta) {
    move(z, *ev.time, delta, 1);
    spec_.kernels.draw(rng(Stream::KernelNoise), noise_);
    jump(z, ev.kernel, noise_, delta, 1);
    move(z, delta - *ev.time, delta, 1);
    if (events) events->push_back({*ev.time, ev.kernel});
  } else {
    move(z, delta, delta, 1);
  }
}

void SchemeStepper::step_order_p(State& z, double delta, int p, StreamSet& rng, std::vector<StepEvent>* events) {
  int q = p;
  double t_left = delta;
  while (q > 0) {
    const ApproxEvent ev = sample_event(z, delta, q, t_left, rng);
    if (ev.time && *ev.time < t_left) {
      move(z, *ev.time, delta, q);
      spec_.kernels.draw(rng(Stream::KernelNoise), noise_);
      jump(z, ev.kernel, noise_, delta, q);
      if (events) events->push_back({delta - t_left + *ev.time, ev.kernel});
      --q;
      t_left -= *ev.time;
    } else {
      move(z, t_left, delta, q);
      t_left = 0.0;
      q = 0;
    }
  }
  if (t_left > 0.0) move(z, t_left, delta, 1);
}

void SchemeStepper::step(State& z, double delta, StreamSet& rng, std::vector<StepEvent>* events) {
  switch (cfg_.kind) {
    case SchemeKind::FD: step_fd(z, delta, rng, events); return;
    case SchemeKind::PD: step_pd(z, delta, rng, events); return;
    case SchemeKind::OrderP: step_order_p(z, delta, cfg_.order, rng, events); return;
  }
}

ApproxEvent sample_approx_event(RateApproxKind kind, const PdmpSpec& spec, const SchemeConfig& cfg, const State& z,
                                double delta, int q, StreamSet& rng) {
  SchemeConfig local = cfg;
  if (static_cast<std::size_t>(q) > local.rates_by_order.size()) local.rates_by_order.resize(q, RateApproxKind::Frozen);
  local.rates_by_order[q - 1] = kind;
  SchemeStepper stepper(spec, local);
  return stepper.sample_event(z, delta, q, delta, rng);
}

State step_fd(const SchemeConfig& cfg, const PdmpSpec& spec, const State& z, double delta, StreamSet& rng,
              std::vector<StepEvent>* events) {
  SchemeStepper stepper(spec, cfg);
  State out = z;
  stepper.step_fd(out, delta, rng, events);
  return out;
}

State step_pd(const SchemeConfig& cfg, const PdmpSpec& spec, const State& z, double delta, StreamSet& rng,
              std::vector<StepEvent>* events) {
  SchemeStepper stepper(spec, cfg);
  State out = z;
  stepper.step_pd(out, delta, rng, events);
  return out;
}

State step_order_p(const SchemeConfig& cfg, const PdmpSpec& spec, const State& z, double delta, int p,
                   StreamSet& rng, std::vector<StepEvent>* events) {
  SchemeStepper stepper(spec, cfg);
  State out = z;
  stepper.step_order_p(out, delta, p, rng, events);
  return out;
}

DiscretePath simulate_scheme(const SchemeConfig& cfg, const PdmpSpec& spec, const State& z0, StreamSet& rng) {
  if (cfg.mesh.steps.empty()) throw InvalidConfig("empty mesh");
  SchemeStepper stepper(spec, cfg);
  DiscretePath path;
  path.times = cfg.mesh.times();
  path.states.reserve(cfg.mesh.size() + 1);
  path.events.resize(cfg.mesh.size());
  State z = z0;
  path.states.push_back(z);
  for (std::size_t n = 0; n < cfg.mesh.size(); ++n) {
    stepper.step(z, cfg.mesh.steps[n], rng, &path.events[n]);
    path.states.push_back(z);
  }
  return path;
}

}  // namespace pdmp
