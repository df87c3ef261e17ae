#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pdmp/pdmp.hpp"

namespace pdmp {

enum class SchemeKind { FD, PD, OrderP };
enum class RateApproxKind { Frozen, Endpoint, AlongIntegrator, FiniteDifference, LinearSecondOrder, Exact };
enum class IntegratorKind { ExactFlow, Euler, Leapfrog, Custom };

std::string_view to_string(SchemeKind k);
std::string_view to_string(RateApproxKind k);
std::string_view to_string(IntegratorKind k);
std::optional<SchemeKind> parse_scheme_kind(std::string_view s);
std::optional<RateApproxKind> parse_rate_approx(std::string_view s);
std::optional<IntegratorKind> parse_integrator(std::string_view s);

/// Approximate flow phi_bar_s(z; delta, q).
struct FlowApprox {
  IntegratorKind integrator = IntegratorKind::ExactFlow;
  int declared_order = 1;
  std::function<void(State& z, double s, double delta, int q)> custom;
};

/// Approximate jump maps F_bar_i(z, u; delta, q); empty means the exact F_i.
struct KernelApprox {
  std::function<void(State& z, int i, const Noise& u, double delta, int q)> apply;

  bool is_exact() const { return !apply; }
};

/// Step sizes delta_1, delta_2, ...
struct Mesh {
  std::vector<double> steps;

  static Mesh uniform(double delta, double T);
  std::size_t size() const { return steps.size(); }
  double horizon() const;
  /// t_0 = 0, t_1, ..., t_N.
  std::vector<double> times() const;
};

struct SchemeConfig {
  SchemeKind kind = SchemeKind::PD;
  int order = 1;
  /// Rate approximation used with order q at index q-1. Orders without an
  /// entry fall back to Frozen.
  std::vector<RateApproxKind> rates_by_order{RateApproxKind::Frozen};
  FlowApprox flow;
  KernelApprox kernel;
  Mesh mesh;
  double delta0 = std::numeric_limits<double>::infinity();

  RateApproxKind rate_for_order(int q) const;
  /// Throws InvalidConfig on an inconsistent configuration.
  void validate() const;
  bool exact_flow_and_kernels() const {
    return flow.integrator == IntegratorKind::ExactFlow && kernel.is_exact();
  }
};

/// An event inside a step: offset from the step start and kernel index.
struct StepEvent {
  double offset = 0.0;
  int kernel = -1;
};

struct DiscretePath {
  std::vector<double> times;
  std::vector<State> states;
  /// events[n] holds the events of step n (from times[n] to times[n+1]).
  std::vector<std::vector<StepEvent>> events;

  std::size_t event_count() const;
};

struct ApproxEvent {
  std::optional<double> time;
  int kernel = -1;
};

/// In-place phi_bar_s(z; delta, q).
void integrator_step(const FlowApprox& fa, const Flow& flow, State& z, double s, double delta, int q);
State integrator_step(const FlowApprox& fa, const Flow& flow, const State& z, double s, double delta, int q);

/// Per-kernel intensities s -> lambda_bar_i(z, s; delta, q) on [0, delta].
void rate_approx_hazards(RateApproxKind kind, const PdmpSpec& spec, const SchemeConfig& cfg, const State& z,
                         double delta, int q, std::span<Hazard> out);

/// lambda_bar_i(z, s; delta, q) for every kernel, clamped at zero.
std::vector<double> rate_approx_eval(RateApproxKind kind, const PdmpSpec& spec, const SchemeConfig& cfg,
                                     const State& z, double s, double delta, int q);

/// Stateful stepper holding scratch buffers; one per replica.
class SchemeStepper {
 public:
  SchemeStepper(const PdmpSpec& spec, const SchemeConfig& cfg);

  /// First event time tau_bar within `horizon` under lambda_bar(z, .; delta, q),
  /// with kernel drawn proportionally to lambda_bar_i(z, tau_bar).
  ApproxEvent sample_event(const State& z, double delta, int q, double horizon, StreamSet& rng);

  /// Per-kernel hazards of the rate approximation for order q (cached buffers).
  std::span<Hazard> hazards(const State& z, double delta, int q);

  void step_fd(State& z, double delta, StreamSet& rng, std::vector<StepEvent>* events = nullptr);
  void step_pd(State& z, double delta, StreamSet& rng, std::vector<StepEvent>* events = nullptr);
  void step_order_p(State& z, double delta, int p, StreamSet& rng, std::vector<StepEvent>* events = nullptr);

  /// Dispatches on cfg.kind.
  void step(State& z, double delta, StreamSet& rng, std::vector<StepEvent>* events = nullptr);

  /// Applies F_bar_i(z, u; delta, q).
  void jump(State& z, int i, const Noise& u, double delta, int q) const;
  void move(State& z, double s, double delta, int q) const;

  const SchemeConfig& config() const { return cfg_; }
  const PdmpSpec& spec() const { return spec_; }

 private:
  bool constant_rates(RateApproxKind kind, const State& z, double delta, int q);

  const PdmpSpec& spec_;
  const SchemeConfig& cfg_;
  std::vector<double> rates_;
  std::vector<Hazard> hazards_;
  Hazard total_;
  Noise noise_;
};

ApproxEvent sample_approx_event(RateApproxKind kind, const PdmpSpec& spec, const SchemeConfig& cfg, const State& z,
                                double delta, int q, StreamSet& rng);

State step_fd(const SchemeConfig& cfg, const PdmpSpec& spec, const State& z, double delta, StreamSet& rng,
              std::vector<StepEvent>* events = nullptr);
State step_pd(const SchemeConfig& cfg, const PdmpSpec& spec, const State& z, double delta, StreamSet& rng,
              std::vector<StepEvent>* events = nullptr);
State step_order_p(const SchemeConfig& cfg, const PdmpSpec& spec, const State& z, double delta, int p,
                   StreamSet& rng, std::vector<StepEvent>* events = nullptr);

/// Iterates the configured step over cfg.mesh.
DiscretePath simulate_scheme(const SchemeConfig& cfg, const PdmpSpec& spec, const State& z0, StreamSet& rng);

}  // namespace pdmp
