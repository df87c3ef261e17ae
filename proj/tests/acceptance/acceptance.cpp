// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments
// select criteria by number, e.g. `pdmp_acceptance 2 3`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "pdmp/couplings/coupling.hpp"
#include "pdmp/diagnostics/curves.hpp"
#include "pdmp/diagnostics/fit.hpp"
#include "pdmp/diagnostics/oracle.hpp"
#include "pdmp/diagnostics/stats.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/exact.hpp"
#include "pdmp/models/lyapunov.hpp"
#include "pdmp/models/models.hpp"
#include "pdmp/parallel.hpp"
#include "pdmp/schemes/scheme.hpp"

using namespace pdmp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

State state1(double x, double v) { return State(Vector::Constant(1, x), Vector::Constant(1, v)); }

InitialLaw zzs_stationary(int d) {
  return [d](Rng& rng) {
    State z{Vector(d), Vector(d)};
    for (int i = 0; i < d; ++i) {
      z.x(i) = rng.normal();
      z.v(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
    }
    return z;
  };
}

SchemeConfig scheme(SchemeKind kind, double delta, double T, int order = 1) {
  SchemeConfig cfg;
  cfg.kind = kind;
  cfg.order = order;
  cfg.mesh = Mesh::uniform(delta, T);
  return cfg;
}

void print_sweep(const char* label, const SweepResult& r) {
  for (std::size_t k = 0; k < r.deltas.size(); ++k) {
    std::printf("    %s delta=%-6g error=%+.5e se=%.2e\n", label, r.deltas[k], r.signed_errors[k], r.stderrs[k]);
  }
  if (r.fit) {
    std::printf("    %s slope=%.3f (95%% CI %.3f..%.3f)\n", label, r.fit->slope, r.fit->ci_low, r.fit->ci_high);
  } else {
    std::printf("    %s no fit: %s\n", label, r.fit_error.c_str());
  }
}

bool slope_in(const SweepResult& r, double lo, double hi) { return r.fit && r.fit->slope >= lo && r.fit->slope <= hi; }

// Integral of s -> sum_i lambda_i(phi_s(z)) over [0, h] by composite
// Gauss-Legendre, independent of the hazard machinery used to simulate.
double integrated_rate(const PdmpSpec& spec, const State& z, double h) {
  static const double nodes[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  static const double weights[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  const int panels = std::max(8, static_cast<int>(std::ceil(h * 200.0)));
  const double w = h / panels;
  std::vector<double> rates(static_cast<std::size_t>(spec.rates.m));
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * w;
    for (int k = 0; k < 4; ++k) {
      const State y = evaluate_flow(spec.flow, z, mid + 0.5 * w * nodes[k]);
      acc += 0.5 * w * weights[k] * spec.rates.total(y, rates);
    }
  }
  return acc;
}

// ------------------------------------------------------------------ 1
bool criterion_exact_simulator() {
  const auto t0 = Clock::now();
  bool ok = true;
  for (ZzsRateStyle style : {ZzsRateStyle::PositivePart, ZzsRateStyle::Smooth}) {
    const ZzsModel model{GaussianPotential::standard(1), style, {}};
    const PdmpSpec spec = model_to_pdmp(model);
    const double burn = 100.0, T = 2000.0, spacing = 5.0;
    StreamSet rng(20240601, 0);
    const SkeletonPath path = simulate_exact(spec, state1(0.0, 1.0), burn + T, rng);

    std::vector<double> positions;
    for (double t = burn + spacing; t <= burn + T + 1e-9; t += spacing) positions.push_back(path.at(spec.flow, t).x(0));

    std::vector<double> gaps;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      if (path.event_times[k] < burn) continue;
      gaps.push_back(integrated_rate(spec, path.post_jump[k], path.event_times[k + 1] - path.event_times[k]));
    }

    const double d_pos = ks_statistic(positions, normal_cdf);
    const double d_gap = ks_statistic(gaps, [](double s) { return s <= 0.0 ? 0.0 : 1.0 - std::exp(-s); });
    const double p_pos = ks_pvalue(d_pos, positions.size());
    const double p_gap = ks_pvalue(d_gap, gaps.size());
    const char* name = style == ZzsRateStyle::PositivePart ? "positive-part" : "smooth";
    std::printf("    %s: %zu events; position KS D=%.4f p=%.3f (n=%zu); gap KS D=%.4f p=%.3f (n=%zu)\n", name,
                path.size(), d_pos, p_pos, positions.size(), d_gap, p_gap, gaps.size());
    ok = ok && p_pos > 0.01 && p_gap > 0.01;
  }
  const double elapsed = seconds_since(t0);
  std::printf("    runtime %.2f s (limit 10 s)\n", elapsed);
  return ok && elapsed < 10.0;
}

// ------------------------------------------------------------------ 2, 3
const double kTelegraphT = 2.0;
const std::vector<double> kDeltas{0.2, 0.1, 0.05, 0.025};

bool criterion_first_order() {
  const auto t0 = Clock::now();
  const PdmpSpec spec = model_to_pdmp(TelegraphModel{1.0});
  const double truth = telegraph_moments(1.0, kTelegraphT, 0.0, 1.0).mean;
  const ReplicaPlan plan{250000, 7, 0};
  bool ok = true;
  for (SchemeKind kind : {SchemeKind::FD, SchemeKind::PD}) {
    const SchemeConfig base = scheme(kind, 0.1, kTelegraphT);
    const SweepResult r = weak_error_sweep(spec, base, kDeltas, kTelegraphT, statistic_mean1, truth,
                                           fixed_initial(state1(0.0, 1.0)), plan, WeakErrorEstimator::Coupled);
    print_sweep(kind == SchemeKind::FD ? "fd" : "pd", r);
    ok = ok && slope_in(r, 0.7, 1.3);
  }
  const double elapsed = seconds_since(t0);
  std::printf("    reference E[X_T]=%.10f; runtime %.1f s (limit 120 s)\n", truth, elapsed);
  return ok && elapsed < 120.0;
}

bool criterion_second_order() {
  const auto t0 = Clock::now();
  const PdmpSpec spec = model_to_pdmp(TelegraphModel{1.0});
  const double truth = telegraph_moments(1.0, kTelegraphT, 0.0, 1.0).mean;
  SchemeConfig base = scheme(SchemeKind::OrderP, 0.1, kTelegraphT, 2);
  base.rates_by_order = {RateApproxKind::Frozen, RateApproxKind::LinearSecondOrder};
  const ReplicaPlan plan{100000, 11, 0};
  const std::vector<std::size_t> reps{100000, 200000, 400000, 1600000};
  const SweepResult r = weak_error_sweep(spec, base, kDeltas, kTelegraphT, statistic_mean1, truth,
                                         fixed_initial(state1(0.0, 1.0)), plan, WeakErrorEstimator::Coupled, reps);
  print_sweep("order2", r);
  const double elapsed = seconds_since(t0);
  std::printf("    runtime %.1f s (limit 300 s)\n", elapsed);
  return slope_in(r, 1.6, 2.4) && elapsed < 300.0;
}

// ------------------------------------------------------------------ 4
bool criterion_tv_shape() {
  const auto t0 = Clock::now();
  const ZzsModel model{GaussianPotential::standard(1), ZzsRateStyle::PositivePart, {}};
  const PdmpSpec spec = model_to_pdmp(model);
  const double T = 5.0;
  const ReplicaPlan plan{20000, 13, 0};
  std::vector<double> hazards, hazard_se;
  bool monotone = true;
  for (double delta : kDeltas) {
    const SchemeConfig cfg = scheme(SchemeKind::PD, delta, T);
    const Trace tr = tv_indicator_curve(spec, cfg, fixed_initial(state1(1.0, 1.0)), plan);
    const double p = tr.value.back();
    hazards.push_back(-std::log1p(-p));
    hazard_se.push_back(tr.se.back() / (1.0 - p));
    std::printf("    delta=%-6g P(Z_T != Zbar_T)=%.4f se=%.4f; at t=1..5:", delta, p, tr.se.back());
    double prev = -1.0, prev_se = 0.0;
    for (int k = 1; k <= 5; ++k) {
      const std::size_t n = static_cast<std::size_t>(std::llround(k / delta));
      std::printf(" %.4f", tr.value[n]);
      if (tr.value[n] < prev - 2.0 * std::hypot(tr.se[n], prev_se)) monotone = false;
      prev = tr.value[n];
      prev_se = tr.se[n];
    }
    std::printf("\n");
  }
  bool ok = monotone;
  try {
    const LogLogFit fit = fit_loglog_order(kDeltas, hazards, hazard_se);
    std::printf("    slope of -log(1 - P) vs delta: %.3f (95%% CI %.3f..%.3f)\n", fit.slope, fit.ci_low, fit.ci_high);
    ok = ok && fit.slope >= 0.7 && fit.slope <= 1.3;
  } catch (const InsufficientSignal& e) {
    std::printf("    fit failed: %s\n", e.what());
    ok = false;
  }
  const double elapsed = seconds_since(t0);
  std::printf("    monotone in T: %s; runtime %.1f s (limit 120 s)\n", monotone ? "yes" : "no", elapsed);
  return ok && elapsed < 120.0;
}

// ------------------------------------------------------------------ 5
bool criterion_wasserstein_proxy() {
  const auto t0 = Clock::now();
  const int d = 10;
  const ZzsModel model{GaussianPotential::standard(d), ZzsRateStyle::PositivePart, {}};
  const PdmpSpec spec = model_to_pdmp(model);
  const double T = 10.0;
  const std::vector<double> deltas{0.1, 0.05, 0.01};
  const ReplicaPlan plan{50, 17, 0};
  std::vector<Trace> traces;
  for (double delta : deltas) {
    traces.push_back(wasserstein_proxy_curve(spec, scheme(SchemeKind::FD, delta, T), zzs_stationary(d), plan));
  }
  // Compare on the coarsest mesh, skipping t = 0 where all curves vanish.
  const std::size_t points = traces[0].times.size();
  std::size_t overlaps = 0, violations = 0, compared = 0;
  for (std::size_t n = 1; n < points; ++n) {
    for (std::size_t k = 0; k + 1 < deltas.size(); ++k) {
      const auto& coarse = traces[k];
      const auto& fine = traces[k + 1];
      const std::size_t m = static_cast<std::size_t>(std::llround(coarse.times[n] / deltas[k + 1]));
      const double gap = fine.value[m] - coarse.value[n];
      ++compared;
      if (gap <= 0.0) continue;
      if (gap <= 2.0 * std::hypot(fine.se[m], coarse.se[n])) {
        ++overlaps;
      } else {
        ++violations;
      }
    }
  }
  std::vector<double> finals;
  for (const auto& tr : traces) finals.push_back(tr.value.back());
  const bool final_monotone = finals[0] > finals[1] && finals[1] > finals[2];
  std::printf("    final distance: %.4f %.4f %.4f (delta 0.1 0.05 0.01)\n", finals[0], finals[1], finals[2]);
  const double overlap_frac = static_cast<double>(overlaps) / static_cast<double>(compared);
  std::printf("    out of order within CI: %zu of %zu (%.1f%%), beyond CI: %zu\n", overlaps, compared,
              100.0 * overlap_frac, violations);
  const double elapsed = seconds_since(t0);
  std::printf("    runtime %.1f s (limit 60 s)\n", elapsed);
  return final_monotone && violations == 0 && overlap_frac <= 0.10 && elapsed < 60.0;
}

// ------------------------------------------------------------------ 6
bool criterion_lyapunov_moments() {
  const auto t0 = Clock::now();
  const int d = 10;
  const double T = 20.0;
  const ReplicaPlan plan{100000, 19, 0};
  auto pot = GaussianPotential::standard(d);
  bool ok = true;

  const PdmpSpec zzs = model_to_pdmp(ZzsModel{pot, ZzsRateStyle::PositivePart, {}});
  const LyapunovFn g_zzs = [pot](const State& z) { return lyapunov_zzs(*pot, 0.2, 0.1, z); };
  const PdmpSpec bps = model_to_pdmp(BpsModel{pot, 1.0, RefreshLaw::Sphere});
  const LyapunovFn g_bps = [pot](const State& z) { return lyapunov_bps(*pot, 1.0, z); };
  // Standard Gaussian plus a uniform on the unit cube; velocities from the
  // stationary law of each process.
  const InitialLaw zzs_law = [d](Rng& rng) {
    State z{Vector(d), Vector(d)};
    for (int i = 0; i < d; ++i) z.x(i) = rng.normal() + rng.uniform();
    for (int i = 0; i < d; ++i) z.v(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
    return z;
  };
  const InitialLaw bps_law = [d](Rng& rng) {
    State z{Vector(d), Vector(d)};
    for (int i = 0; i < d; ++i) z.x(i) = rng.normal() + rng.uniform();
    for (int i = 0; i < d; ++i) z.v(i) = rng.normal();
    z.v.normalize();
    return z;
  };

  for (double delta : {0.1, 0.05}) {
    const MomentTrace a = lyapunov_moment_trace(zzs, scheme(SchemeKind::FD, delta, T), g_zzs, zzs_law, plan,
                                            MomentPairing::Coupled);
    std::printf("    zzs delta=%-5g sup scheme=%.4f sup exact=%.4f ratio=%.3f\n", delta, a.sup_scheme, a.sup_exact,
                a.sup_scheme / a.sup_exact);
    ok = ok && a.sup_scheme <= 2.0 * a.sup_exact;
    const MomentTrace b = lyapunov_moment_trace(bps, scheme(SchemeKind::PD, delta, T), g_bps, bps_law, plan,
                                            MomentPairing::Coupled);
    std::printf("    bps delta=%-5g sup scheme=%.4f sup exact=%.4f ratio=%.3f\n", delta, b.sup_scheme, b.sup_exact,
                b.sup_scheme / b.sup_exact);
    ok = ok && b.sup_scheme <= 2.0 * b.sup_exact;
  }
  std::printf("    runtime %.1f s\n", seconds_since(t0));
  return ok;
}

// ------------------------------------------------------------------ 7
bool criterion_stationary_bias() {
  const auto t0 = Clock::now();
  const int d = 10;
  const double T = 500.0;
  const PdmpSpec spec = model_to_pdmp(ZzsModel{GaussianPotential::standard(d), ZzsRateStyle::PositivePart, {}});
  const ReplicaPlan plan{200, 23, 0};
  std::vector<double> bias;
  for (double delta : {0.1, 0.05, 0.02}) {
    const BiasTrace b = stationary_bias_curve(spec, scheme(SchemeKind::FD, delta, T), statistic_radius, d,
                                              zzs_stationary(d), plan, 0.2);
    bias.push_back(b.scheme.back());
    std::printf("    delta=%-5g scheme bias=%.4f se=%.4f; exact bias=%.4f se=%.4f\n", delta, b.scheme.back(),
                b.scheme_se.back(), b.exact.back(), b.exact_se.back());
  }
  const bool monotone = bias[0] > bias[1] && bias[1] > bias[2];
  const bool small = bias[2] < 0.02 * d;
  const double elapsed = seconds_since(t0);
  std::printf("    monotone: %s; delta=0.02 bias %.4f vs limit %.2f; runtime %.1f s (limit 300 s)\n",
              monotone ? "yes" : "no", bias[2], 0.02 * d, elapsed);
  return monotone && small && elapsed < 300.0;
}

// ------------------------------------------------------------------ 8
bool criterion_oracle() {
  const auto t0 = Clock::now();
  const double T = 1.0, x0 = 0.5, v0 = 1.0;
  const std::vector<TestFn1d> tests{[](double x, double) { return x * x; }};
  const OracleResult oracle = forward_pde_oracle_1d(zzs_gaussian_1d(), x0, v0, T, 1e-3, tests);

  const PdmpSpec spec = model_to_pdmp(ZzsModel{GaussianPotential::standard(1), ZzsRateStyle::PositivePart, {}});
  const RunningStats mc = parallel_replicas(1000000, 0, RunningStats{}, [&](std::size_t r, RunningStats& a) {
    StreamSet rng(29, r);
    State z = state1(x0, v0);
    ExactSimulator sim(spec);
    sim.advance(z, T, rng);
    a.add(z.x(0) * z.x(0));
  });
  const double diff = std::abs(mc.mean() - oracle.values[0]);
  const double allowed = 3.0 * mc.sem() + oracle.self_convergence;
  std::printf("    E[X_1^2]: oracle %.6f (self-convergence %.2e), Monte Carlo %.6f (se %.2e); |diff| %.2e vs %.2e\n",
              oracle.values[0], oracle.self_convergence, mc.mean(), mc.sem(), diff, allowed);
  std::printf("    runtime %.1f s\n", seconds_since(t0));
  return diff <= allowed;
}

// ------------------------------------------------------------------ 9
struct Moments {
  RunningStats m1, m2;
  void add(const State& z) {
    m1.add(z.x(0));
    m2.add(z.x(0) * z.x(0));
  }
  void merge(const Moments& o) {
    m1.merge(o.m1);
    m2.merge(o.m2);
  }
};

struct MarginalAcc {
  Moments exact, approx;
  void merge(const MarginalAcc& o) {
    exact.merge(o.exact);
    approx.merge(o.approx);
  }
};

bool within(const char* what, const RunningStats& a, const RunningStats& b) {
  const double z = std::abs(a.mean() - b.mean()) / std::hypot(a.sem(), b.sem());
  std::printf("      %-16s coupled %.5f independent %.5f  |z|=%.2f\n", what, a.mean(), b.mean(), z);
  return z <= 4.0;
}

bool criterion_marginals() {
  const auto t0 = Clock::now();
  const PdmpSpec spec = model_to_pdmp(ZzsModel{GaussianPotential::standard(1), ZzsRateStyle::PositivePart, {}});
  const std::size_t reps = 10000;
  const double T = 3.0;
  const State z0 = state1(1.0, 1.0);
  bool ok = true;
  const std::pair<CouplingKind, SchemeKind> cases[] = {{CouplingKind::Wasserstein, SchemeKind::FD},
                                                       {CouplingKind::Wasserstein, SchemeKind::PD},
                                                       {CouplingKind::TotalVariation, SchemeKind::PD}};
  for (const auto& [kind, sk] : cases) {
    const SchemeConfig cfg = scheme(sk, 0.1, T);
    const MarginalAcc coupled = parallel_replicas(reps, 0, MarginalAcc{}, [&](std::size_t r, MarginalAcc& a) {
      StreamSet rng(31, r);
      Coupler c(spec, cfg);
      const std::size_t last = cfg.mesh.size();
      c.run(kind, z0, z0, rng, [&](std::size_t n, double, const State& z, const State& zbar, bool) {
        if (n != last) return;
        a.exact.add(z);
        a.approx.add(zbar);
      });
    });
    const MarginalAcc independent = parallel_replicas(reps, 0, MarginalAcc{}, [&](std::size_t r, MarginalAcc& a) {
      StreamSet rng(37, r);
      State z = z0;
      ExactSimulator sim(spec);
      sim.advance(z, T, rng);
      a.exact.add(z);
      StreamSet rng2 = rng.fork();
      State w = z0;
      SchemeStepper stepper(spec, cfg);
      for (double d : cfg.mesh.steps) stepper.step(w, d, rng2);
      a.approx.add(w);
    });
    std::printf("    %s coupling, %s scheme:\n", std::string(to_string(kind)).c_str(),
                std::string(to_string(sk)).c_str());
    ok = within("exact E[X]", coupled.exact.m1, independent.exact.m1) && ok;
    ok = within("exact E[X^2]", coupled.exact.m2, independent.exact.m2) && ok;
    ok = within("scheme E[X]", coupled.approx.m1, independent.approx.m1) && ok;
    ok = within("scheme E[X^2]", coupled.approx.m2, independent.approx.m2) && ok;
  }
  std::printf("    runtime %.1f s\n", seconds_since(t0));
  return ok;
}

// ------------------------------------------------------------------ 10
struct Check {
  int total = 0;
  int failed = 0;
  void expect(bool cond, const char* what) {
    ++total;
    if (!cond) {
      if (failed < 5) std::printf("    failed: %s\n", what);
      ++failed;
    }
  }
};

Vector random_vector(Rng& rng, int d, double scale = 1.0) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = scale * rng.normal();
  return v;
}

Vector random_signs(Rng& rng, int d) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
  return v;
}

std::shared_ptr<GaussianPotential> random_gaussian(Rng& rng, int d) {
  Eigen::MatrixXd b(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) b(i, j) = rng.normal();
  Eigen::MatrixXd a = b * b.transpose() / d + Eigen::MatrixXd::Identity(d, d) * 0.5;
  return GaussianPotential::dense(a, random_vector(rng, d, 0.5));
}

double max_abs_diff(const State& a, const State& b) {
  return std::max((a.x - b.x).lpNorm<Eigen::Infinity>(), (a.v - b.v).lpNorm<Eigen::Infinity>());
}

bool criterion_invariants() {
  Check c;
  Rng gen(41);
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 1 + static_cast<int>(gen.index(8));
    const Vector g = random_vector(gen, d, std::exp(2.0 * gen.normal()));
    const Vector v = random_vector(gen, d);
    const Vector rv = bps_reflect(g, v);
    const Vector rrv = bps_reflect(g, rv);
    c.expect(std::abs(rv.norm() - v.norm()) <= 1e-12 * v.norm(), "BPS reflection preserves the norm");
    c.expect((rrv - v).lpNorm<Eigen::Infinity>() <= 1e-12 * std::max(1.0, v.lpNorm<Eigen::Infinity>()),
             "BPS reflection is an involution");

    const Vector s = random_signs(gen, d);
    const int i = static_cast<int>(gen.index(static_cast<std::size_t>(d)));
    c.expect(zzs_flip(zzs_flip(s, i), i) == s, "ZZS flip is an involution");
    c.expect(zzs_flip(s, i)(i) == -s(i), "ZZS flip negates coordinate i");
  }

  // Flow semigroup phi_{s+t} = phi_t o phi_s.
  auto semigroup = [&](const PdmpSpec& spec, const State& z, double s, double t, const char* what) {
    const State direct = evaluate_flow(spec.flow, z, s + t);
    const State composed = evaluate_flow(spec.flow, evaluate_flow(spec.flow, z, s), t);
    const double scale = std::max({1.0, direct.x.lpNorm<Eigen::Infinity>(), direct.v.lpNorm<Eigen::Infinity>()});
    c.expect(max_abs_diff(direct, composed) <= 1e-10 * scale, what);
  };
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + static_cast<int>(gen.index(6));
    auto pot = random_gaussian(gen, d);
    const double s = 3.0 * gen.uniform(), t = 3.0 * gen.uniform();
    const State zz(random_vector(gen, d), random_signs(gen, d));
    semigroup(model_to_pdmp(ZzsModel{pot, ZzsRateStyle::PositivePart, {}}), zz, s, t, "ZZS flow semigroup");
    const State zb(random_vector(gen, d), random_vector(gen, d));
    semigroup(model_to_pdmp(BpsModel{pot, 1.0, RefreshLaw::Gaussian}), zb, s, t, "BPS flow semigroup");
    Vector prec(d);
    for (int k = 0; k < d; ++k) prec(k) = 0.2 + 3.0 * gen.uniform();
    auto diag = GaussianPotential::diagonal(prec, random_vector(gen, d));
    semigroup(model_to_pdmp(RhmcModel{diag, 1.0}), zb, s, t, "RHMC flow semigroup");
    semigroup(model_to_pdmp(TelegraphModel{1.0}), State(random_vector(gen, 1), random_signs(gen, 1)), s, t,
              "telegraph flow semigroup");
    semigroup(model_to_pdmp(CellSizeModel{0.7, 1.0, 0.25}),
              State(Vector::Constant(1, 0.1 + gen.uniform()), Vector::Zero(1)), 0.5 * s, 0.5 * t,
              "cell size flow semigroup");
  }

  // Rate nonnegativity.
  const MorrisLecarModel ml{20.0, 2.0, 4.4, 8.0, -60.0, 120.0, -84.0, -1.2, 18.0, 2.0, 30.0, 0.04, 100};
  const PdmpSpec ml_spec = model_to_pdmp(ml);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 1 + static_cast<int>(gen.index(6));
    auto pot = random_gaussian(gen, d);
    std::vector<double> out;
    auto nonneg = [&](const PdmpSpec& spec, const State& z, const char* what) {
      out.assign(static_cast<std::size_t>(spec.rates.m), -1.0);
      spec.rates.evaluate(z, out);
      c.expect(std::all_of(out.begin(), out.end(), [](double r) { return r >= 0.0; }), what);
    };
    const State zz(random_vector(gen, d, 3.0), random_signs(gen, d));
    nonneg(model_to_pdmp(ZzsModel{pot, ZzsRateStyle::PositivePart, {}}), zz, "ZZS positive-part rates >= 0");
    nonneg(model_to_pdmp(ZzsModel{pot, ZzsRateStyle::Smooth, {}}), zz, "ZZS smooth rates >= 0");
    nonneg(model_to_pdmp(BpsModel{pot, 1.0, RefreshLaw::Gaussian}), State(random_vector(gen, d, 3.0), random_vector(gen, d)),
           "BPS rates >= 0");
    nonneg(ml_spec, State(Vector::Constant(1, -80.0 + 140.0 * gen.uniform()),
                          Vector::Constant(1, static_cast<double>(gen.index(101)))),
           "Morris-Lecar rates >= 0");
    nonneg(model_to_pdmp(CellSizeModel{}), State(Vector::Constant(1, 5.0 * gen.uniform()), Vector::Zero(1)),
           "cell size rate >= 0");

    // lambda_i(x, v) - lambda_i(x, R_i v) = v_i d_i psi(x) for smooth rates.
    const ZzsModel smooth{pot, ZzsRateStyle::Smooth, {}};
    Vector grad(d);
    pot->gradient(zz.x, grad);
    for (int i = 0; i < d; ++i) {
      const State flipped(zz.x, zzs_flip(zz.v, i));
      const double lhs = zzs_rate(smooth, zz, i) - zzs_rate(smooth, flipped, i);
      const double rhs = zz.v(i) * grad(i);
      c.expect(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)), "smooth-rate identity");
    }
  }

  // Byte-identical reruns under a fixed seed, independent of the worker count.
  {
    const PdmpSpec spec = model_to_pdmp(ZzsModel{GaussianPotential::standard(3), ZzsRateStyle::PositivePart, {}});
    const State z0(Vector::Constant(3, 0.3), Vector::Constant(3, 1.0));
    StreamSet a(99, 4), b(99, 4);
    const SkeletonPath pa = simulate_exact(spec, z0, 50.0, a);
    const SkeletonPath pb = simulate_exact(spec, z0, 50.0, b);
    c.expect(pa.event_times == pb.event_times && pa.terminal == pb.terminal && pa.kernels == pb.kernels,
             "exact path rerun identical");
    const SchemeConfig cfg = scheme(SchemeKind::PD, 0.05, 10.0);
    StreamSet s1(5, 2), s2(5, 2);
    const DiscretePath d1 = simulate_scheme(cfg, spec, z0, s1);
    const DiscretePath d2 = simulate_scheme(cfg, spec, z0, s2);
    c.expect(d1.states == d2.states, "scheme path rerun identical");
    const ReplicaPlan one{300, 3, 1}, two{300, 3, 2};
    const Trace w1 = wasserstein_proxy_curve(spec, cfg, zzs_stationary(3), one);
    const Trace w2 = wasserstein_proxy_curve(spec, cfg, zzs_stationary(3), two);
    c.expect(w1.value == w2.value && w1.se == w2.se, "coupled curves identical across worker counts");
  }

  std::printf("    %d checks, %d failed\n", c.total, c.failed);
  return c.failed == 0;
}

struct Criterion {
  int id;
  const char* name;
  std::function<bool()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "exact simulator marginal and gap KS tests", criterion_exact_simulator},
      {2, "first-order weak error of fd and pd schemes", criterion_first_order},
      {3, "second-order weak error", criterion_second_order},
      {4, "TV coupling bound shape", criterion_tv_shape},
      {5, "Wasserstein proxy ordering", criterion_wasserstein_proxy},
      {6, "Lyapunov moment boundedness", criterion_lyapunov_moments},
      {7, "stationary bias", criterion_stationary_bias},
      {8, "PDE oracle against exact Monte Carlo", criterion_oracle},
      {9, "coupling marginal consistency", criterion_marginals},
      {10, "invariant micro-suite", criterion_invariants},
  };
  std::set<int> selected;
  for (int k = 1; k < argc; ++k) selected.insert(std::atoi(argv[k]));

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    std::printf("[%d] %s\n", c.id, c.name);
    std::fflush(stdout);
    bool ok = false;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      std::printf("    error: %s\n", e.what());
    }
    std::printf("%s %d %s\n", ok ? "PASS" : "FAIL", c.id, c.name);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
