#include "pdmp/couplings/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pdmp/errors.hpp"

namespace pdmp {

std::string_view to_string(CouplingKind k) {
  switch (k) {
    case CouplingKind::Wasserstein: return "wasserstein";
    case CouplingKind::TotalVariation: return "tv";
    case CouplingKind::HigherOrder: return "higher_order";
  }
  return "?";
}

std::optional<CouplingKind> parse_coupling(std::string_view s) {
  for (auto k : {CouplingKind::Wasserstein, CouplingKind::TotalVariation, CouplingKind::HigherOrder}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

double state_distance(const State& a, const State& b, DistanceNorm norm) {
  return norm == DistanceNorm::L1 ? l1_distance(a, b) : l2_distance(a, b);
}

void require_tv_applicable(const SchemeConfig& cfg) {
  if (cfg.kind == SchemeKind::FD) throw InvalidConfig("tv coupling needs a partially discrete scheme, not fd");
  if (!cfg.exact_flow_and_kernels()) {
    throw InvalidConfig("tv coupling needs the exact flow and exact kernels in the scheme");
  }
}

namespace {

using DominatorFn = std::function<void(const State& w, double horizon, std::vector<Hazard>& out)>;

/// Pieces the thinning engine works with. The exact side is `spec` under its
/// exact flow; the approximation is `stepper`. Dominators default to the
/// hazards themselves.
struct Engine {
  const PdmpSpec& spec;
  SchemeStepper& stepper;
  ExactSimulator& sim;
  StreamSet& exact_own;
  StreamSet& approx_own;
  DominatorFn exact_dominator;
  DominatorFn approx_dominator;
};

std::optional<double> first_event(const Hazard& total, double horizon, Rng& clock, Rng& accept) {
  if (total.is_affine()) return total.invert(clock.exponential(), horizon);
  if (total.thinnable()) return total.sample_thinning(clock, accept, horizon);
  return total.invert(clock.exponential(), horizon);
}

/// Continues the approximation alone from w, given its current order-q hazards
/// (already shifted to w's time), until t_left is used up.
void continue_approx(SchemeStepper& stepper, State& w, std::vector<Hazard> hazards, int q, double t_left,
                     double delta, StreamSet& own) {
  Noise noise;
  std::vector<double> weights(hazards.size());
  while (q > 0 && t_left > 0.0) {
    Hazard total;
    for (const auto& h : hazards) total += h;
    const auto tau = total.invert(own(Stream::EventClock).exponential(), t_left);
    if (!tau || !(*tau < t_left)) {
      stepper.move(w, t_left, delta, q);
      return;
    }
    stepper.move(w, *tau, delta, q);
    for (std::size_t i = 0; i < hazards.size(); ++i) weights[i] = std::max(0.0, hazards[i](*tau));
    const int k = sample_kernel_index(weights, own(Stream::KernelSelect));
    stepper.spec().kernels.draw(own(Stream::KernelNoise), noise);
    stepper.jump(w, k, noise, delta, q);
    --q;
    t_left -= *tau;
    if (q > 0) {
      const auto h = stepper.hazards(w, delta, q);
      hazards.assign(h.begin(), h.end());
    }
  }
  if (t_left > 0.0) stepper.move(w, t_left, delta, 1);
}

void fill_approx(SchemeStepper& stepper, const State& w, double delta, int q, std::vector<Hazard>& out) {
  if (q <= 0) {
    for (auto& h : out) h.clear();
    return;
  }
  const auto h = stepper.hazards(w, delta, q);
  out.assign(h.begin(), h.end());
}

bool thinning_engine(Engine& e, State& z, State& zbar, double delta, int order, int event_cap, StreamSet& rng) {
  const auto m = static_cast<std::size_t>(e.spec.rates.m);
  std::vector<Hazard> exact(m), approx(m), dex(m), dap(m), tot(m);
  std::vector<double> weights(m);
  Noise noise;

  State w = z;
  int q = order;
  double t_left = delta;
  int events = 0;

  auto refresh_exact = [&]() {
    for (auto& h : exact) h.clear();
    e.spec.rates.along_flow(w, t_left, exact);
    if (e.exact_dominator) {
      e.exact_dominator(w, t_left, dex);
    } else {
      dex = exact;
    }
  };
  auto refresh_approx = [&]() {
    fill_approx(e.stepper, w, delta, q, approx);
    if (e.approx_dominator && q > 0) {
      e.approx_dominator(w, t_left, dap);
    } else {
      dap = approx;
    }
  };
  auto split = [&](State ze, State za, int approx_q, bool approx_jumped) {
    e.sim.advance(ze, t_left, e.exact_own);
    if (approx_jumped) {
      fill_approx(e.stepper, za, delta, approx_q, approx);
    }
    continue_approx(e.stepper, za, approx, approx_q, t_left, delta, e.approx_own);
    z = std::move(ze);
    zbar = std::move(za);
    return false;
  };

  refresh_exact();
  refresh_approx();
  for (;;) {
    Hazard total;
    for (std::size_t i = 0; i < m; ++i) {
      tot[i].clear();
      tot[i] += dex[i];
      tot[i] += dap[i];
      tot[i].add_constant(1.0);
      total += tot[i];
    }
    const auto cand = first_event(total, t_left, rng(Stream::EventClock), rng(Stream::Independent));
    if (!cand) {
      e.spec.flow.exact(w, t_left);
      z = w;
      zbar = std::move(w);
      return true;
    }
    const double t = *cand;
    for (std::size_t i = 0; i < m; ++i) weights[i] = tot[i](t);
    const int i = sample_kernel_index(weights, rng(Stream::KernelSelect));
    const double bound = weights[static_cast<std::size_t>(i)];
    const double lam = std::max(0.0, exact[static_cast<std::size_t>(i)](t));
    const double lam_bar = std::max(0.0, approx[static_cast<std::size_t>(i)](t));
    if (lam > bound * (1.0 + 1e-9) || lam_bar > bound * (1.0 + 1e-9)) {
      throw ThinningBoundViolated("coupling dominator below a process rate at kernel " + std::to_string(i));
    }
    const double u = rng(Stream::Acceptance).uniform();
    const bool acc_exact = u * bound <= lam;
    const bool acc_approx = u * bound <= lam_bar;

    e.spec.flow.exact(w, t);
    t_left -= t;
    if (!acc_exact && !acc_approx) {
      for (std::size_t k = 0; k < m; ++k) {
        approx[k] = approx[k].shifted(t);
        dap[k] = dap[k].shifted(t);
      }
      refresh_exact();
      continue;
    }

    e.spec.kernels.draw(rng(Stream::KernelNoise), noise);
    if (acc_exact && acc_approx) {
      e.spec.kernels.apply(w, i, noise);
      q = std::max(q - 1, 0);
      if (event_cap > 0 && ++events >= event_cap) {
        for (auto& h : approx) h.clear();
        fill_approx(e.stepper, w, delta, q, approx);
        return split(w, w, q, false);
      }
      refresh_exact();
      refresh_approx();
      continue;
    }

    State ze = w;
    State za = w;
    if (acc_exact) {
      e.spec.kernels.apply(ze, i, noise);
      for (auto& h : approx) h = h.shifted(t);
      return split(std::move(ze), std::move(za), q, false);
    }
    e.spec.kernels.apply(za, i, noise);
    return split(std::move(ze), std::move(za), q - 1, true);
  }
}

}  // namespace

Coupler::Coupler(const PdmpSpec& spec, const SchemeConfig& cfg)
    : spec_(spec),
      cfg_(cfg),
      stepper_(spec, cfg),
      sim_(spec),
      exact_h_(static_cast<std::size_t>(spec.rates.m)),
      approx_h_(static_cast<std::size_t>(spec.rates.m)) {}

void Coupler::begin(StreamSet& rng) {
  exact_own_.emplace(rng.fork());
  approx_own_.emplace(rng.fork());
  sim_.reset_event_count();
}

void Coupler::approx_continue(State& w, std::vector<Hazard> hazards, int q, double t_left, double delta) {
  continue_approx(stepper_, w, std::move(hazards), q, t_left, delta, *approx_own_);
}

void Coupler::wasserstein_step(State& z, State& zbar, double delta, StreamSet& rng) {
  if (!exact_own_) begin(rng);
  const auto m = static_cast<std::size_t>(spec_.rates.m);
  std::vector<double> clocks(m);
  for (auto& c : clocks) c = rng(Stream::EventClock).exponential();
  spec_.kernels.draw(rng(Stream::KernelNoise), noise_);

  for (auto& h : exact_h_) h.clear();
  spec_.rates.along_flow(z, delta, exact_h_);
  double tau = std::numeric_limits<double>::infinity();
  int kernel = -1;
  for (std::size_t i = 0; i < m; ++i) {
    const auto t = exact_h_[i].invert(clocks[i], delta);
    if (t && *t < tau) {
      tau = *t;
      kernel = static_cast<int>(i);
    }
  }

  const int p = cfg_.kind == SchemeKind::OrderP ? cfg_.order : 1;
  const auto ah = stepper_.hazards(zbar, delta, p);
  approx_h_.assign(ah.begin(), ah.end());
  double tau_bar = std::numeric_limits<double>::infinity();
  int kernel_bar = -1;
  for (std::size_t i = 0; i < m; ++i) {
    const auto t = approx_h_[i].invert(clocks[i], delta);
    if (t && *t < tau_bar) {
      tau_bar = *t;
      kernel_bar = static_cast<int>(i);
    }
  }

  if (kernel >= 0) {
    spec_.flow.exact(z, tau);
    spec_.kernels.apply(z, kernel, noise_);
    sim_.advance(z, delta - tau, *exact_own_);
  } else {
    spec_.flow.exact(z, delta);
  }

  if (cfg_.kind == SchemeKind::FD) {
    stepper_.move(zbar, delta, delta, 1);
    if (kernel_bar >= 0) stepper_.jump(zbar, kernel_bar, noise_, delta, 1);
    return;
  }
  if (kernel_bar >= 0 && tau_bar < delta) {
    stepper_.move(zbar, tau_bar, delta, p);
    stepper_.jump(zbar, kernel_bar, noise_, delta, p);
    const double t_left = delta - tau_bar;
    if (p > 1) {
      const auto h = stepper_.hazards(zbar, delta, p - 1);
      approx_continue(zbar, std::vector<Hazard>(h.begin(), h.end()), p - 1, t_left, delta);
    } else {
      stepper_.move(zbar, t_left, delta, 1);
    }
  } else {
    stepper_.move(zbar, delta, delta, p);
  }
}

bool Coupler::thinning_step(State& z, State& zbar, bool equal, double delta, int order, int event_cap,
                            StreamSet& rng) {
  require_tv_applicable(cfg_);
  if (!exact_own_) begin(rng);
  if (!equal) {
    sim_.advance(z, delta, *exact_own_);
    stepper_.step(zbar, delta, *approx_own_);
    return false;
  }
  Engine e{spec_, stepper_, sim_, *exact_own_, *approx_own_, {}, {}};
  return thinning_engine(e, z, zbar, delta, order, event_cap, rng);
}

void Coupler::run(CouplingKind kind, const State& z0, const State& zbar0, StreamSet& rng, const Observer& observe) {
  begin(rng);
  State z = z0;
  State zbar = zbar0;
  bool equal = z == zbar;
  const int p = cfg_.kind == SchemeKind::OrderP ? cfg_.order : 1;
  double t = 0.0;
  if (observe) observe(0, t, z, zbar, equal);
  for (std::size_t n = 0; n < cfg_.mesh.size(); ++n) {
    const double delta = cfg_.mesh.steps[n];
    switch (kind) {
      case CouplingKind::Wasserstein:
        wasserstein_step(z, zbar, delta, rng);
        equal = z == zbar;
        break;
      case CouplingKind::TotalVariation:
        equal = thinning_step(z, zbar, equal, delta, p, 0, rng);
        break;
      case CouplingKind::HigherOrder:
        equal = thinning_step(z, zbar, equal, delta, p, p + 2, rng);
        break;
    }
    t += delta;
    if (observe) observe(n + 1, t, z, zbar, equal);
  }
}

std::pair<State, State> couple_wasserstein_step(const PdmpSpec& spec, const SchemeConfig& cfg, const State& z,
                                                const State& zbar, double delta, StreamSet& rng) {
  Coupler c(spec, cfg);
  c.begin(rng);
  State a = z;
  State b = zbar;
  c.wasserstein_step(a, b, delta, rng);
  return {std::move(a), std::move(b)};
}

CoupledStep couple_tv_step(const PdmpSpec& spec, const SchemeConfig& cfg, const State& z, double delta,
                           StreamSet& rng) {
  Coupler c(spec, cfg);
  c.begin(rng);
  CoupledStep out{z, z, true};
  out.equal = c.thinning_step(out.exact, out.approx, true, delta, 1, 0, rng);
  return out;
}

CoupledStep couple_higher_order_step(const PdmpSpec& spec, const SchemeConfig& cfg, const State& z,
                                     const State& zbar, double delta, int p, StreamSet& rng) {
  Coupler c(spec, cfg);
  c.begin(rng);
  CoupledStep out{z, zbar, z == zbar};
  out.equal = c.thinning_step(out.exact, out.approx, out.equal, delta, p, p + 2, rng);
  return out;
}

CoupledRun run_coupled(const PdmpSpec& spec, const SchemeConfig& cfg, CouplingKind kind, const State& z0,
                       const State& zbar0, StreamSet& rng, DistanceNorm norm) {
  Coupler c(spec, cfg);
  CoupledRun run;
  c.run(kind, z0, zbar0, rng, [&](std::size_t, double t, const State& z, const State& zbar, bool equal) {
    run.times.push_back(t);
    run.exact.push_back(z);
    run.approx.push_back(zbar);
    run.distance.push_back(state_distance(z, zbar, norm));
    run.equal.push_back(equal ? 1 : 0);
    if (!equal && !run.decoupling_time) run.decoupling_time = t;
  });
  return run;
}

namespace {

SchemeConfig subsampling_scheme() {
  SchemeConfig cfg;
  cfg.kind = SchemeKind::PD;
  cfg.rates_by_order = {RateApproxKind::Frozen};
  return cfg;
}

}  // namespace

CoupledStep couple_subsampling_step(const ZzsSubsamplingModel& model, const State& z, const State& zbar,
                                    bool equal, double delta, StreamSet& rng, StreamSet& exact_own,
                                    StreamSet& approx_own) {
  static const SchemeConfig cfg = subsampling_scheme();
  CoupledStep out{z, zbar, equal};
  const auto n = static_cast<std::size_t>(model.terms());
  if (!equal) {
    const int je = static_cast<int>(exact_own(Stream::Subsample).index(n));
    const PdmpSpec spec_e = term_pdmp(model, je);
    ExactSimulator sim(spec_e);
    sim.advance(out.exact, delta, exact_own);
    subsampling_step(model, out.approx, delta, approx_own, SubsamplingUpdate::Standard);
    return out;
  }

  const int j = static_cast<int>(rng(Stream::Subsample).index(n));
  const PdmpSpec spec = term_pdmp(model, j);
  SchemeStepper stepper(spec, cfg);
  ExactSimulator sim(spec);
  const auto pot = model.potential;
  const int d = pot->dim();

  DominatorFn exact_dom = [&](const State& w, double, std::vector<Hazard>& outh) {
    auto base = std::make_shared<const State>(w);
    for (int i = 0; i < d; ++i) {
      Hazard& h = outh[static_cast<std::size_t>(i)];
      h.clear();
      std::vector<AffineTerm> bound;
      bound.reserve(n);
      for (std::size_t k = 0; k < n; ++k) {
        const int jj = static_cast<int>(k);
        const double r0 = w.v(i) * pot->term_partial(jj, w.x, i);
        const double mk = pot->term_curvature_bound(jj, Vector::Unit(d, i), w.v);
        h.add_bounded_curve(
            [pot, base, i, jj](double s) {
              const double r = base->v(i) * pot->term_partial(jj, base->x + s * base->v, i);
              return r > 0.0 ? r : 0.0;
            },
            {{r0, mk}});
      }
    }
  };
  DominatorFn approx_dom = [&](const State& w, double, std::vector<Hazard>& outh) {
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += model.term_rate(static_cast<int>(k), w, i);
      outh[static_cast<std::size_t>(i)].clear();
      outh[static_cast<std::size_t>(i)].add_constant(acc);
    }
  };

  Engine e{spec, stepper, sim, exact_own, approx_own, exact_dom, approx_dom};
  out.equal = thinning_engine(e, out.exact, out.approx, delta, 1, 0, rng);
  return out;
}

CoupledRun run_coupled_subsampling(const ZzsSubsamplingModel& model, const Mesh& mesh, const State& z0,
                                   StreamSet& rng, DistanceNorm norm) {
  StreamSet exact_own = rng.fork();
  StreamSet approx_own = rng.fork();
  CoupledRun run;
  State z = z0;
  State zbar = z0;
  bool equal = true;
  double t = 0.0;
  auto record = [&]() {
    run.times.push_back(t);
    run.exact.push_back(z);
    run.approx.push_back(zbar);
    run.distance.push_back(state_distance(z, zbar, norm));
    run.equal.push_back(equal ? 1 : 0);
    if (!equal && !run.decoupling_time) run.decoupling_time = t;
  };
  record();
  for (double delta : mesh.steps) {
    CoupledStep s = couple_subsampling_step(model, z, zbar, equal, delta, rng, exact_own, approx_own);
    z = std::move(s.exact);
    zbar = std::move(s.approx);
    equal = s.equal;
    t += delta;
    record();
  }
  return run;
}

}  // namespace pdmp
