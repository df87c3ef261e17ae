#include <chrono>
#include <cmath>
#include <numbers>
#include <vector>

#include "pdmp/diagnostics/fit.hpp"
#include "pdmp/diagnostics/stats.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/models/models.hpp"
#include "pdmp/schemes/scheme.hpp"
#include "support.hpp"

using namespace pdmp;
using pdmp::test::for_cases;
using pdmp::test::state1;

namespace {

const RateApproxKind kAllRates[] = {RateApproxKind::Frozen,           RateApproxKind::Endpoint,
                                    RateApproxKind::AlongIntegrator,  RateApproxKind::FiniteDifference,
                                    RateApproxKind::LinearSecondOrder, RateApproxKind::Exact};

PdmpSpec zzs_gaussian(int d, ZzsRateStyle style = ZzsRateStyle::PositivePart) {
  return model_to_pdmp(ZzsModel{GaussianPotential::standard(d), style, {}});
}

SchemeConfig config(SchemeKind kind, RateApproxKind rate = RateApproxKind::Frozen, int order = 1) {
  SchemeConfig cfg;
  cfg.kind = kind;
  cfg.order = order;
  cfg.rates_by_order.assign(static_cast<std::size_t>(order), RateApproxKind::Frozen);
  cfg.rates_by_order.back() = rate;
  return cfg;
}

double integrated_rate(RateApproxKind kind, const PdmpSpec& spec, const SchemeConfig& cfg, const State& z,
                       double delta) {
  std::vector<Hazard> h(static_cast<std::size_t>(spec.rates.m));
  rate_approx_hazards(kind, spec, cfg, z, delta, 1, h);
  double acc = 0.0;
  for (const auto& hi : h) acc += hi.integral(delta);
  return acc;
}

}  // namespace

// ---------------------------------------------------------------- rate approximations

TEST(RateApprox, FiniteDifferenceExample) {
  const PdmpSpec spec = zzs_gaussian(1);
  const auto r = rate_approx_eval(RateApproxKind::FiniteDifference, spec, config(SchemeKind::PD), state1(1.0, 1.0),
                                  0.0, 0.1, 1);
  EXPECT_NEAR(r[0], 1.05, 1e-12);
}

TEST(RateApprox, FrozenClampsAtZero) {
  const PdmpSpec spec = zzs_gaussian(1);
  const auto r = rate_approx_eval(RateApproxKind::Frozen, spec, config(SchemeKind::PD), state1(2.0, -1.0), 0.0, 0.1, 1);
  EXPECT_EQ(r[0], 0.0);
}

TEST(RateApprox, LinearSecondOrderEndpoints) {
  const PdmpSpec spec = zzs_gaussian(2);
  const SchemeConfig cfg = config(SchemeKind::PD);
  const State z(Vector::Constant(2, 0.3), Vector::Ones(2));
  const double delta = 0.2;
  std::vector<double> at_end(2);
  spec.rates.evaluate(evaluate_flow(spec.flow, z, delta), at_end);
  std::vector<double> at_start(2);
  spec.rates.evaluate(z, at_start);
  const auto r0 = rate_approx_eval(RateApproxKind::LinearSecondOrder, spec, cfg, z, 0.0, delta, 2);
  const auto r1 = rate_approx_eval(RateApproxKind::LinearSecondOrder, spec, cfg, z, delta, delta, 2);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(r0[i], at_start[i], 1e-14);
    EXPECT_NEAR(r1[i], at_end[i], 1e-14);
  }
}

TEST(RateApprox, LinearSecondOrderQuadraticInversion) {
  // From x = 1, v = +1 with delta = 1 the interpolated rate is 1 + s.
  const PdmpSpec spec = zzs_gaussian(1);
  std::vector<Hazard> h(1);
  rate_approx_hazards(RateApproxKind::LinearSecondOrder, spec, config(SchemeKind::PD), state1(1.0, 1.0), 1.0, 2, h);
  ASSERT_TRUE(h[0].is_affine());
  EXPECT_NEAR(*h[0].invert(std::log(2.0), 1.0), 0.544763529191407, 1e-12);
}

TEST(RateApprox, FrozenConstantInversion) {
  const PdmpSpec spec = model_to_pdmp(TelegraphModel{2.0});
  std::vector<Hazard> h(1);
  rate_approx_hazards(RateApproxKind::Frozen, spec, config(SchemeKind::PD), state1(0.0, 1.0), 1.0, 1, h);
  EXPECT_NEAR(*h[0].invert(std::log(2.0), 1.0), 0.34657359, 1e-8);
}

TEST(RateApprox, ZeroRateHasNoEvent) {
  const PdmpSpec spec = model_to_pdmp(TelegraphModel{0.0});
  StreamSet rng(1, 0);
  const auto e = sample_approx_event(RateApproxKind::Frozen, spec, config(SchemeKind::PD), state1(0.0, 1.0), 1.0, 1, rng);
  EXPECT_FALSE(e.time.has_value());
}

TEST(RateApproxProperty, NonNegativeAndShape) {
  const std::vector<PdmpSpec> specs = {zzs_gaussian(3), zzs_gaussian(2, ZzsRateStyle::Smooth)};
  for (const auto& spec : specs) {
    for (auto kind : kAllRates) {
      SCOPED_TRACE(std::string(to_string(kind)));
      const SchemeConfig cfg = config(SchemeKind::PD, kind);
      for_cases(100, 40, [&](Rng& gen, int) {
        const State z = test::random_zzs_state(gen, spec.dim_x, 3.0);
        const double delta = 0.5 * gen.uniform() + 1e-3;
        const auto r0 = rate_approx_eval(kind, spec, cfg, z, 0.0, delta, 1);
        const auto rh = rate_approx_eval(kind, spec, cfg, z, 0.5 * delta, delta, 1);
        const auto r1 = rate_approx_eval(kind, spec, cfg, z, delta, delta, 1);
        for (std::size_t i = 0; i < r0.size(); ++i) {
          EXPECT_GE(r0[i], 0.0);
          EXPECT_GE(rh[i], 0.0);
          EXPECT_GE(r1[i], 0.0);
          if (kind == RateApproxKind::Frozen || kind == RateApproxKind::FiniteDifference) {
            EXPECT_EQ(r0[i], r1[i]);
          }
          if (kind == RateApproxKind::LinearSecondOrder && r0[i] > 0.0 && r1[i] > 0.0) {
            EXPECT_NEAR(rh[i], 0.5 * (r0[i] + r1[i]), 1e-12);
          }
        }
      });
    }
  }
}

// max_{s <= delta} |lambda_bar(z, s) - lambda(phi_s z)| ~ delta^q for smooth rates.
TEST(RateApproxProperty, ApproximationOrder) {
  const PdmpSpec spec = zzs_gaussian(2, ZzsRateStyle::Smooth);
  const SchemeConfig cfg = config(SchemeKind::PD);
  const std::vector<double> deltas = {0.2, 0.1, 0.05, 0.025};
  struct Case {
    RateApproxKind kind;
    int q;
  };
  for (auto [kind, q] : {Case{RateApproxKind::Frozen, 1}, Case{RateApproxKind::LinearSecondOrder, 2}}) {
    SCOPED_TRACE(std::string(to_string(kind)));
    std::vector<double> errors;
    for (double delta : deltas) {
      double worst = 0.0;
      for_cases(50, 41, [&](Rng& gen, int) {
        const State z = test::random_zzs_state(gen, 2, 1.5);
        for (int k = 0; k <= 20; ++k) {
          const double s = delta * k / 20.0;
          std::vector<double> exact(2);
          spec.rates.evaluate(evaluate_flow(spec.flow, z, s), exact);
          const auto approx = rate_approx_eval(kind, spec, cfg, z, s, delta, q);
          for (int i = 0; i < 2; ++i) worst = std::max(worst, std::abs(approx[i] - exact[i]));
        }
      });
      errors.push_back(worst);
    }
    const LogLogFit fit = fit_loglog_order(deltas, errors, {});
    EXPECT_NEAR(fit.slope, q, 0.2);
  }
}

// ---------------------------------------------------------------- integrators

TEST(Integrator, EulerOnExponentialGrowth) {
  const PdmpSpec spec = model_to_pdmp(CellSizeModel{1.0, 1.0, 0.25});
  FlowApprox euler;
  euler.integrator = IntegratorKind::Euler;
  const State z = integrator_step(euler, spec.flow, State(Vector::Ones(1), Vector()), 0.1, 0.1, 1);
  EXPECT_NEAR(z.x(0), 1.1, 1e-15);
  EXPECT_NEAR(std::exp(0.1) - z.x(0), 5.17e-3, 1e-5);
}

TEST(Integrator, ZeroStepIsIdentity) {
  const PdmpSpec spec = model_to_pdmp(RhmcModel{GaussianPotential::standard(2), 1.0});
  const State z(Vector::Constant(2, 0.7), Vector::Constant(2, -0.2));
  for (auto kind : {IntegratorKind::ExactFlow, IntegratorKind::Euler, IntegratorKind::Leapfrog}) {
    FlowApprox fa;
    fa.integrator = kind;
    EXPECT_EQ(integrator_step(fa, spec.flow, z, 0.0, 0.1, 1), z);
  }
}

TEST(Integrator, LeapfrogEnergyDrift) {
  const PdmpSpec spec = model_to_pdmp(RhmcModel{GaussianPotential::standard(1), 1.0});
  FlowApprox lf;
  lf.integrator = IntegratorKind::Leapfrog;
  State z = state1(1.0, 0.0);
  const double h0 = 0.5;
  const int steps = static_cast<int>(std::round(2.0 * std::numbers::pi / 0.01));
  double worst = 0.0;
  for (int n = 0; n < steps; ++n) {
    integrator_step(lf, spec.flow, z, 0.01, 0.01, 2);
    worst = std::max(worst, std::abs(0.5 * (z.x(0) * z.x(0) + z.v(0) * z.v(0)) - h0));
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(Integrator, EulerNeedsVectorField) {
  PdmpSpec spec = model_to_pdmp(TelegraphModel{1.0});
  spec.flow.vector_field = nullptr;
  FlowApprox euler;
  euler.integrator = IntegratorKind::Euler;
  State z = state1(0.0, 1.0);
  EXPECT_THROW(integrator_step(euler, spec.flow, z, 0.1, 0.1, 1), NoVectorField);
}

// Local error slope >= declared order + 1 - 0.2.
TEST(IntegratorProperty, LocalErrorOrder) {
  auto aniso = GaussianPotential::diagonal((Vector(2) << 0.5, 2.0).finished(), Vector::Zero(2));
  const PdmpSpec spec = model_to_pdmp(RhmcModel{aniso, 1.0});
  const std::vector<double> steps = {0.1, 0.05, 0.025, 0.0125};
  for (auto [kind, order] : {std::pair{IntegratorKind::Euler, 1}, std::pair{IntegratorKind::Leapfrog, 2}}) {
    FlowApprox fa;
    fa.integrator = kind;
    fa.declared_order = order;
    std::vector<double> errors;
    for (double s : steps) {
      double worst = 0.0;
      for_cases(50, 42, [&](Rng& gen, int) {
        const State z(test::random_vector(gen, 2, 1.0), test::random_vector(gen, 2, 1.0));
        worst = std::max(worst, l1_distance(integrator_step(fa, spec.flow, z, s, s, order), evaluate_flow(spec.flow, z, s)));
      });
      errors.push_back(worst);
    }
    EXPECT_GE(fit_loglog_order(steps, errors, {}).slope, order + 1 - 0.2);
  }
}

// ---------------------------------------------------------------- steps

TEST(StepFd, ZeroRateIsDeterministic) {
  const PdmpSpec spec = model_to_pdmp(TelegraphModel{0.0});
  StreamSet rng(1, 0);
  std::vector<StepEvent> ev;
  const State z = step_fd(config(SchemeKind::FD), spec, state1(0.0, -1.0), 0.3, rng, &ev);
  EXPECT_TRUE(ev.empty());
  EXPECT_DOUBLE_EQ(z.x(0), -0.3);
}

TEST(StepFd, JumpAppliedAtStepEnd) {
  const PdmpSpec spec = zzs_gaussian(1);
  const SchemeConfig cfg = config(SchemeKind::FD);
  for (int r = 0; r < 200; ++r) {
    StreamSet rng(2, r);
    std::vector<StepEvent> ev;
    const State z = step_fd(cfg, spec, state1(1.0, 1.0), 0.5, rng, &ev);
    EXPECT_DOUBLE_EQ(z.x(0), 1.5);
    EXPECT_EQ(z.v(0), ev.empty() ? 1.0 : -1.0);
  }
}

TEST(StepFd, EventProbabilityConstantRate) {
  const PdmpSpec spec = model_to_pdmp(TelegraphModel{2.0});
  const SchemeConfig cfg = config(SchemeKind::FD);
  SchemeStepper stepper(spec, cfg);
  const int n = 100000;
  int hits = 0;
  for (int r = 0; r < n; ++r) {
    StreamSet rng(3, r);
    State z = state1(0.0, 1.0);
    std::vector<StepEvent> ev;
    stepper.step_fd(z, 0.1, rng, &ev);
    hits += !ev.empty();
  }
  test::expect_frequency(hits, n, 1.0 - std::exp(-0.2));
}

TEST(StepPd, FlipAtMidStep) {
  const PdmpSpec spec = zzs_gaussian(1);
  const SchemeConfig cfg = config(SchemeKind::PD);
  int fired = 0;
  for (int r = 0; r < 200; ++r) {
    StreamSet rng(4, r);
    std::vector<StepEvent> ev;
    const State z = step_pd(cfg, spec, state1(1.0, 1.0), 0.5, rng, &ev);
    if (ev.empty()) {
      EXPECT_DOUBLE_EQ(z.x(0), 1.5);
      continue;
    }
    ++fired;
    ASSERT_EQ(ev.size(), 1u);
    const double tau = ev[0].offset;
    EXPECT_NEAR(z.x(0), 1.0 + tau - (0.5 - tau), 1e-14);
    EXPECT_EQ(z.v(0), -1.0);
  }
  EXPECT_GT(fired, 0);
}

TEST(StepPd, BounceVersusRefresh) {
  const double refresh = 0.7;
  const PdmpSpec spec = model_to_pdmp(BpsModel{GaussianPotential::standard(2), refresh, RefreshLaw::Gaussian});
  const SchemeConfig cfg = config(SchemeKind::PD);
  const State z(Vector::Constant(2, 1.0), Vector::Constant(2, 0.5));
  const double bounce_rate = 1.0;  // <v, x> = 1
  int events = 0, bounces = 0;
  for (int r = 0; r < 100000; ++r) {
    StreamSet rng(5, r);
    std::vector<StepEvent> ev;
    step_pd(cfg, spec, z, 0.2, rng, &ev);
    if (!ev.empty()) {
      ++events;
      bounces += ev[0].kernel == 0;
    }
  }
  ASSERT_GT(events, 1000);
  test::expect_frequency(bounces, events, bounce_rate / (bounce_rate + refresh));
}

// With exact rates, flow and kernels a PD step is the exact process cut at one
// event: for the telegraph process from (0, +1), X = delta without an event and
// 2 tau - delta with one at tau.
TEST(StepPd, ExactRatesMatchOneEventLaw) {
  const double rate = 1.5, delta = 0.4;
  const PdmpSpec spec = model_to_pdmp(TelegraphModel{rate});
  const SchemeConfig cfg = config(SchemeKind::PD, RateApproxKind::Exact);
  RunningStats x;
  for (int r = 0; r < 200000; ++r) {
    StreamSet rng(6, r);
    x.add(step_pd(cfg, spec, state1(0.0, 1.0), delta, rng).x(0));
  }
  const double e = std::exp(-rate * delta);
  // integral of rate e^{-rate t} (2t - delta) over [0, delta]
  const double one_event = 2.0 * (1.0 - e * (1.0 + rate * delta)) / rate - delta * (1.0 - e);
  EXPECT_NEAR(x.mean(), delta * e + one_event, 3.0 * x.sem());
}

TEST(StepOrderP, OrderOneIsBitIdenticalToPd) {
  const PdmpSpec spec = model_to_pdmp(BpsModel{GaussianPotential::standard(3), 1.0, RefreshLaw::Gaussian});
  const SchemeConfig pd = config(SchemeKind::PD);
  const SchemeConfig op = config(SchemeKind::OrderP, RateApproxKind::Frozen, 1);
  SchemeStepper a(spec, pd), b(spec, op);
  for_cases(200, 43, [&](Rng& gen, int k) {
    State z(test::random_vector(gen, 3), test::random_vector(gen, 3, 1.0));
    State w = z;
    StreamSet ra(43, k), rb(43, k);
    for (int n = 0; n < 10; ++n) {
      a.step_pd(z, 0.3, ra);
      b.step_order_p(w, 0.3, 1, rb);
    }
    EXPECT_EQ(z, w);
  });
}

TEST(StepOrderP, ZeroRateIsDeterministic) {
  const PdmpSpec spec = model_to_pdmp(TelegraphModel{0.0});
  for (int p : {1, 2, 3}) {
    StreamSet rng(1, 0);
    std::vector<StepEvent> ev;
    const State z = step_order_p(config(SchemeKind::OrderP, RateApproxKind::Frozen, p), spec, state1(0.0, 1.0), 0.25,
                                 p, rng, &ev);
    EXPECT_TRUE(ev.empty());
    EXPECT_DOUBLE_EQ(z.x(0), 0.25);
  }
}

// With constant rate 2 and delta = 0.1, two events occur with the Poisson mass
// of {N >= 2}: 1 - e^{-0.2} (1 + 0.2) = 0.0175231.
TEST(StepOrderP, TwoEventMassConstantRate) {
  const PdmpSpec spec = model_to_pdmp(TelegraphModel{2.0});
  const SchemeConfig cfg = config(SchemeKind::OrderP, RateApproxKind::Frozen, 2);
  SchemeStepper stepper(spec, cfg);
  const int n = 400000;
  int two = 0, more = 0;
  for (int r = 0; r < n; ++r) {
    StreamSet rng(7, r);
    State z = state1(0.0, 1.0);
    std::vector<StepEvent> ev;
    stepper.step_order_p(z, 0.1, 2, rng, &ev);
    two += ev.size() == 2;
    more += ev.size() > 2;
  }
  EXPECT_EQ(more, 0);
  test::expect_frequency(two, n, 0.017523096306421904);
}

// P(event in step) = 1 - exp(-integrated approximate rate), every variant.
TEST(StepProperty, OneStepEventProbability) {
  const PdmpSpec spec = zzs_gaussian(1);
  const double delta = 0.5;
  for (auto kind : kAllRates) {
    SCOPED_TRACE(std::string(to_string(kind)));
    for (auto scheme : {SchemeKind::FD, SchemeKind::PD}) {
      const SchemeConfig cfg = config(scheme, kind);
      SchemeStepper stepper(spec, cfg);
      for_cases(3, 44, [&](Rng& gen, int k) {
        const State z0 = state1(2.0 * gen.uniform() - 0.5, 1.0);
        const double p = 1.0 - std::exp(-integrated_rate(kind, spec, cfg, z0, delta));
        const int n = 20000;
        int hits = 0;
        for (int r = 0; r < n; ++r) {
          StreamSet rng(44 + k, r);
          State z = z0;
          std::vector<StepEvent> ev;
          stepper.step(z, delta, rng, &ev);
          hits += !ev.empty();
        }
        test::expect_frequency(hits, n, p, 4.0);
      });
    }
  }
}

// ---------------------------------------------------------------- config and paths

TEST(SchemeConfig, Validation) {
  SchemeConfig cfg = config(SchemeKind::PD);
  cfg.mesh = Mesh::uniform(0.1, 1.0);
  EXPECT_NO_THROW(cfg.validate());
  cfg.delta0 = 0.05;
  EXPECT_THROW(cfg.validate(), InvalidConfig);
  cfg = config(SchemeKind::PD);
  cfg.order = 2;
  EXPECT_THROW(cfg.validate(), InvalidConfig);
  EXPECT_THROW(Mesh::uniform(0.3, 1.0), InvalidConfig);
  EXPECT_THROW(Mesh::uniform(-0.1, 1.0), InvalidConfig);
}

TEST(SchemeConfig, MissingOrdersFallBackToFrozen) {
  SchemeConfig cfg = config(SchemeKind::OrderP, RateApproxKind::LinearSecondOrder, 3);
  cfg.rates_by_order = {RateApproxKind::Exact};
  EXPECT_EQ(cfg.rate_for_order(1), RateApproxKind::Exact);
  EXPECT_EQ(cfg.rate_for_order(3), RateApproxKind::Frozen);
}

TEST(SchemeConfig, NamesRoundTrip) {
  for (auto k : kAllRates) EXPECT_EQ(parse_rate_approx(to_string(k)), k);
  for (auto k : {SchemeKind::FD, SchemeKind::PD, SchemeKind::OrderP}) EXPECT_EQ(parse_scheme_kind(to_string(k)), k);
  EXPECT_FALSE(parse_rate_approx("nonsense").has_value());
}

TEST(SimulateScheme, Bookkeeping) {
  const PdmpSpec spec = model_to_pdmp(TelegraphModel{0.0});
  SchemeConfig cfg = config(SchemeKind::PD);
  cfg.mesh = Mesh::uniform(0.1, 2.0);
  StreamSet rng(1, 0);
  const DiscretePath path = simulate_scheme(cfg, spec, state1(0.0, 1.0), rng);
  EXPECT_EQ(path.states.size(), 21u);
  EXPECT_EQ(path.times.size(), 21u);
  EXPECT_EQ(path.event_count(), 0u);
  EXPECT_NEAR(path.states.back().x(0), 2.0, 1e-12);
}

TEST(SimulateScheme, FiftyDimensionalBudget) {
  const PdmpSpec spec = zzs_gaussian(50);
  SchemeConfig cfg = config(SchemeKind::FD);
  cfg.mesh = Mesh::uniform(0.1, 20.0);
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < 50; ++r) {
    StreamSet rng(8, r);
    Rng init(r);
    const State z0(test::random_vector(init, 50, 1.0), test::random_signs(init, 50));
    const DiscretePath path = simulate_scheme(cfg, spec, z0, rng);
    ASSERT_EQ(path.states.size(), 201u);
  }
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 5.0);
}
