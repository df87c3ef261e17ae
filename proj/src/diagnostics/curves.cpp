#include "pdmp/diagnostics/curves.hpp"

#include <cmath>

#include "pdmp/diagnostics/stats.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/parallel.hpp"

namespace pdmp {

InitialLaw fixed_initial(State z) {
  return [z = std::move(z)](Rng&) { return z; };
}

double statistic_mean1(const State& z) { return z.x(0); }

double statistic_radius(const State& z) { return z.x.squaredNorm(); }

namespace {

Trace to_trace(const std::vector<double>& times, const StatsVector& acc) {
  Trace t;
  t.times = times;
  for (std::size_t n = 0; n < acc.size(); ++n) {
    t.value.push_back(acc[n].mean());
    t.se.push_back(acc[n].sem());
  }
  return t;
}

/// The exact process observed at the mesh points of `mesh`.
template <class Visit>
void exact_on_mesh(ExactSimulator& sim, const Mesh& mesh, State z, StreamSet& rng, Visit visit) {
  visit(0, z);
  for (std::size_t n = 0; n < mesh.size(); ++n) {
    sim.advance(z, mesh.steps[n], rng);
    visit(n + 1, z);
  }
}

template <class Visit>
void scheme_on_mesh(SchemeStepper& stepper, const Mesh& mesh, State z, StreamSet& rng, Visit visit) {
  visit(0, z);
  for (std::size_t n = 0; n < mesh.size(); ++n) {
    stepper.step(z, mesh.steps[n], rng);
    visit(n + 1, z);
  }
}

}  // namespace

Trace wasserstein_proxy_curve(const PdmpSpec& spec, const SchemeConfig& cfg, const InitialLaw& law,
                              const ReplicaPlan& plan, DistanceNorm norm) {
  const std::size_t points = cfg.mesh.size() + 1;
  const auto acc = parallel_replicas(plan.reps, plan.workers, StatsVector(points), [&](std::size_t r, StatsVector& a) {
    StreamSet rng(plan.seed, r);
    const State z0 = law(rng(Stream::Initial));
    Coupler c(spec, cfg);
    c.run(CouplingKind::Wasserstein, z0, z0, rng,
          [&](std::size_t n, double, const State& z, const State& zbar, bool) {
            a[n].add(state_distance(z, zbar, norm));
          });
  });
  return to_trace(cfg.mesh.times(), acc);
}

Trace tv_indicator_curve(const PdmpSpec& spec, const SchemeConfig& cfg, const InitialLaw& law,
                         const ReplicaPlan& plan) {
  require_tv_applicable(cfg);
  const std::size_t points = cfg.mesh.size() + 1;
  const CouplingKind kind =
      cfg.kind == SchemeKind::OrderP && cfg.order > 1 ? CouplingKind::HigherOrder : CouplingKind::TotalVariation;
  const auto acc = parallel_replicas(plan.reps, plan.workers, StatsVector(points), [&](std::size_t r, StatsVector& a) {
    StreamSet rng(plan.seed, r);
    const State z0 = law(rng(Stream::Initial));
    Coupler c(spec, cfg);
    c.run(kind, z0, z0, rng,
          [&](std::size_t n, double, const State&, const State&, bool equal) { a[n].add(equal ? 0.0 : 1.0); });
  });
  return to_trace(cfg.mesh.times(), acc);
}

namespace {

struct MomentAcc {
  StatsVector exact;
  StatsVector scheme;

  void merge(const MomentAcc& o) {
    exact.merge(o.exact);
    scheme.merge(o.scheme);
  }
};

}  // namespace

MomentTrace lyapunov_moment_trace(const PdmpSpec& spec, const SchemeConfig& cfg, const LyapunovFn& G,
                                  const InitialLaw& law, const ReplicaPlan& plan, MomentPairing pairing) {
  const std::size_t points = cfg.mesh.size() + 1;
  const MomentAcc init{StatsVector(points), StatsVector(points)};
  const auto acc = parallel_replicas(plan.reps, plan.workers, init, [&](std::size_t r, MomentAcc& a) {
    StreamSet rng(plan.seed, r);
    const State z0 = law(rng(Stream::Initial));
    if (pairing == MomentPairing::Coupled) {
      Coupler c(spec, cfg);
      c.run(CouplingKind::Wasserstein, z0, z0, rng, [&](std::size_t n, double, const State& z, const State& zbar, bool) {
        a.exact[n].add(G(z));
        a.scheme[n].add(G(zbar));
      });
      return;
    }
    StreamSet scheme_rng = rng.fork();
    const State zbar0 = pairing == MomentPairing::SharedInitial ? z0 : law(scheme_rng(Stream::Initial));
    ExactSimulator sim(spec);
    exact_on_mesh(sim, cfg.mesh, z0, rng, [&](std::size_t n, const State& z) { a.exact[n].add(G(z)); });
    SchemeStepper stepper(spec, cfg);
    scheme_on_mesh(stepper, cfg.mesh, zbar0, scheme_rng, [&](std::size_t n, const State& z) { a.scheme[n].add(G(z)); });
  });
  MomentTrace out;
  out.times = cfg.mesh.times();
  for (std::size_t n = 0; n < points; ++n) {
    out.exact.push_back(acc.exact[n].mean());
    out.exact_se.push_back(acc.exact[n].sem());
    out.scheme.push_back(acc.scheme[n].mean());
    out.scheme_se.push_back(acc.scheme[n].sem());
    out.sup_exact = std::max(out.sup_exact, out.exact.back());
    out.sup_scheme = std::max(out.sup_scheme, out.scheme.back());
  }
  return out;
}

BiasTrace stationary_bias_curve(const PdmpSpec& spec, const SchemeConfig& cfg, const StateFn& f, double truth,
                                const InitialLaw& law, const ReplicaPlan& plan, double burn_in) {
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw InvalidConfig("burn_in must lie in [0, 1)");
  const auto times = cfg.mesh.times();
  const double t_burn = burn_in * times.back();
  std::size_t first = 0;
  while (first < times.size() && times[first] < t_burn - 1e-12) ++first;
  const std::size_t points = times.size() - first;

  const MomentAcc init{StatsVector(points), StatsVector(points)};
  const auto acc = parallel_replicas(plan.reps, plan.workers, init, [&](std::size_t r, MomentAcc& a) {
    StreamSet rng(plan.seed, r);
    StreamSet scheme_rng = rng.fork();
    const State z0 = law(rng(Stream::Initial));
    const State zbar0 = law(scheme_rng(Stream::Initial));
    auto averager = [&](StatsVector& target) {
      return [&target, first, sum = 0.0, count = 0.0, &f](std::size_t n, const State& z) mutable {
        if (n < first) return;
        sum += f(z);
        count += 1.0;
        target[n - first].add(sum / count);
      };
    };
    ExactSimulator sim(spec);
    exact_on_mesh(sim, cfg.mesh, z0, rng, averager(a.exact));
    SchemeStepper stepper(spec, cfg);
    scheme_on_mesh(stepper, cfg.mesh, zbar0, scheme_rng, averager(a.scheme));
  });
  BiasTrace out;
  out.truth = truth;
  for (std::size_t k = 0; k < points; ++k) {
    out.times.push_back(times[first + k]);
    out.exact.push_back(std::abs(acc.exact[k].mean() - truth));
    out.exact_se.push_back(acc.exact[k].sem());
    out.scheme.push_back(std::abs(acc.scheme[k].mean() - truth));
    out.scheme_se.push_back(acc.scheme[k].sem());
  }
  return out;
}

SweepResult weak_error_sweep(const PdmpSpec& spec, const SchemeConfig& base, std::span<const double> deltas,
                             double T, const StateFn& g, std::optional<double> reference, const InitialLaw& law,
                             const ReplicaPlan& plan, WeakErrorEstimator estimator,
                             std::span<const std::size_t> reps_per_delta) {
  if (!reps_per_delta.empty() && reps_per_delta.size() != deltas.size()) {
    throw InvalidConfig("reps_per_delta must match the delta list");
  }
  SweepResult out;
  std::optional<RunningStats> exact_mc;
  if (estimator == WeakErrorEstimator::Coupled) {
    out.reference = "coupled exact process";
  } else if (reference) {
    out.reference = "analytic";
  } else {
    out.reference = "exact Monte Carlo";
    exact_mc = parallel_replicas(plan.reps, plan.workers, RunningStats{}, [&](std::size_t r, RunningStats& a) {
      StreamSet rng(plan.seed ^ 0x5eed5eedULL, r);
      State z = law(rng(Stream::Initial));
      ExactSimulator sim(spec);
      sim.advance(z, T, rng);
      a.add(g(z));
    });
  }

  for (std::size_t k = 0; k < deltas.size(); ++k) {
    SchemeConfig cfg = base;
    cfg.mesh = Mesh::uniform(deltas[k], T);
    const std::size_t reps = reps_per_delta.empty() ? plan.reps : reps_per_delta[k];
    const std::uint64_t seed = plan.seed + 0x9e3779b97f4a7c15ULL * (k + 1);
    RunningStats acc;
    if (estimator == WeakErrorEstimator::Coupled) {
      const CouplingKind kind = cfg.kind == SchemeKind::FD ? CouplingKind::Wasserstein : CouplingKind::HigherOrder;
      acc = parallel_replicas(reps, plan.workers, RunningStats{}, [&](std::size_t r, RunningStats& a) {
        StreamSet rng(seed, r);
        const State z0 = law(rng(Stream::Initial));
        Coupler c(spec, cfg);
        const std::size_t last = cfg.mesh.size();
        c.run(kind, z0, z0, rng, [&](std::size_t n, double, const State& z, const State& zbar, bool equal) {
          if (n == last) a.add(equal ? 0.0 : g(zbar) - g(z));
        });
      });
    } else {
      acc = parallel_replicas(reps, plan.workers, RunningStats{}, [&](std::size_t r, RunningStats& a) {
        StreamSet rng(seed, r);
        State z = law(rng(Stream::Initial));
        SchemeStepper stepper(spec, cfg);
        for (double d : cfg.mesh.steps) stepper.step(z, d, rng);
        a.add(g(z));
      });
    }
    double signed_error = acc.mean();
    double se = acc.sem();
    if (estimator == WeakErrorEstimator::Independent) {
      if (reference) {
        signed_error -= *reference;
      } else {
        signed_error -= exact_mc->mean();
        se = std::hypot(se, exact_mc->sem());
      }
    }
    out.deltas.push_back(deltas[k]);
    out.signed_errors.push_back(signed_error);
    out.errors.push_back(std::abs(signed_error));
    out.stderrs.push_back(se);
  }

  try {
    out.fit = fit_loglog_order(out.deltas, out.errors, out.stderrs);
  } catch (const InsufficientSignal& e) {
    out.fit_error = e.what();
  }
  return out;
}

}  // namespace pdmp
