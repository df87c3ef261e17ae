#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "pdmp/exact.hpp"
#include "pdmp/models/models.hpp"
#include "pdmp/schemes/scheme.hpp"

namespace pdmp {

enum class CouplingKind { Wasserstein, TotalVariation, HigherOrder };
enum class DistanceNorm { L1, L2 };

std::string_view to_string(CouplingKind k);
std::optional<CouplingKind> parse_coupling(std::string_view s);

double state_distance(const State& a, const State& b, DistanceNorm norm);

/// Exact and approximate processes observed on a common mesh.
struct CoupledRun {
  std::vector<double> times;
  std::vector<State> exact;
  std::vector<State> approx;
  std::vector<double> distance;
  /// Whether the processes were still coupled (equal) at each mesh point.
  std::vector<char> equal;
  std::optional<double> decoupling_time;
};

struct CoupledStep {
  State exact;
  State approx;
  bool equal = false;
};

/// Per-replica coupling driver. Call begin() once per replica: it derives the
/// private streams used by each process after it leaves the coupling.
class Coupler {
 public:
  Coupler(const PdmpSpec& spec, const SchemeConfig& cfg);

  void begin(StreamSet& rng);

  /// Coupling 1: per-kernel clocks of both processes inverted at shared
  /// exponentials, shared jump noise. After its first event in the step the
  /// exact process continues on its private stream.
  void wasserstein_step(State& z, State& zbar, double delta, StreamSet& rng);

  /// Coupling 3 (order 1) or Coupling 2 (order p) by thinning against
  /// lambda_bar_i + lambda_i + 1 with a shared acceptance uniform. Processes
  /// that are no longer equal move independently. Returns the equality flag.
  /// `event_cap` > 0 bounds the accepted events per step before both sides
  /// fall back to independent continuation.
  bool thinning_step(State& z, State& zbar, bool equal, double delta, int order, int event_cap, StreamSet& rng);

  using Observer = std::function<void(std::size_t n, double t, const State& z, const State& zbar, bool equal)>;

  /// Runs the chosen coupling over cfg.mesh, calling `observe` at every mesh
  /// point (including t = 0).
  void run(CouplingKind kind, const State& z0, const State& zbar0, StreamSet& rng, const Observer& observe);

  const SchemeConfig& config() const { return cfg_; }

 private:
  void approx_continue(State& w, std::vector<Hazard> hazards, int q, double t_left, double delta);

  const PdmpSpec& spec_;
  const SchemeConfig& cfg_;
  SchemeStepper stepper_;
  ExactSimulator sim_;
  std::optional<StreamSet> exact_own_;
  std::optional<StreamSet> approx_own_;
  std::vector<Hazard> exact_h_;
  std::vector<Hazard> approx_h_;
  Noise noise_;
};

/// Throws InvalidConfig unless the scheme is partially discrete with the
/// exact flow and exact kernels.
void require_tv_applicable(const SchemeConfig& cfg);

std::pair<State, State> couple_wasserstein_step(const PdmpSpec& spec, const SchemeConfig& cfg, const State& z,
                                                const State& zbar, double delta, StreamSet& rng);

/// Coupling 3 from a common state z.
CoupledStep couple_tv_step(const PdmpSpec& spec, const SchemeConfig& cfg, const State& z, double delta,
                           StreamSet& rng);

/// Coupling 2 for the order-p scheme (at most p + 2 accepted events per step).
CoupledStep couple_higher_order_step(const PdmpSpec& spec, const SchemeConfig& cfg, const State& z,
                                     const State& zbar, double delta, int p, StreamSet& rng);

CoupledRun run_coupled(const PdmpSpec& spec, const SchemeConfig& cfg, CouplingKind kind, const State& z0,
                       const State& zbar0, StreamSet& rng, DistanceNorm norm = DistanceNorm::L1);

/// Coupling for Zig-Zag with subsampling: a shared datum J per step; given J,
/// the exact side follows the datum-J rates along the flow and the
/// approximation uses the frozen datum-J rates, both thinned against
/// sum_j lambda_i^j(x + v t, v) + sum_j lambda_i^j(x, v) + 1. The approximation
/// moves as the plain partially discrete update (flow, flip, flow).
CoupledStep couple_subsampling_step(const ZzsSubsamplingModel& model, const State& z, const State& zbar,
                                    bool equal, double delta, StreamSet& rng, StreamSet& exact_own,
                                    StreamSet& approx_own);

CoupledRun run_coupled_subsampling(const ZzsSubsamplingModel& model, const Mesh& mesh, const State& z0,
                                   StreamSet& rng, DistanceNorm norm = DistanceNorm::L1);

}  // namespace pdmp
