#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pdmp/pdmp.hpp"

namespace pdmp {

struct EventDraw {
  std::optional<double> time;
  std::optional<int> kernel;
};

/// Canonical record of an exactly simulated trajectory on [0, T].
struct SkeletonPath {
  State initial;
  std::vector<double> event_times;
  std::vector<State> pre_jump;
  std::vector<State> post_jump;
  std::vector<int> kernels;
  double terminal_time = 0.0;
  State terminal;

  std::size_t size() const { return event_times.size(); }

  /// Z_t, obtained by flowing from the last post-jump state before t.
  State at(const Flow& flow, double t) const;
};

/// Index i with probability w_i / sum(w). Ties in the inverse-CDF search go to
/// the smallest index. Throws ZeroTotalRate when sum(w) == 0.
int sample_kernel_index(std::span<const double> weights, Rng& rng);

/// Exact simulation of a PDMP by time inversion or thinning.
class ExactSimulator {
 public:
  using EventCallback = std::function<void(double t, const State& pre, const State& post, int kernel)>;

  explicit ExactSimulator(const PdmpSpec& spec, std::size_t max_events = 1'000'000);

  /// Next event time within `horizon` from z, together with its kernel.
  EventDraw next_event(const State& z, double horizon, StreamSet& rng);

  /// Moves z forward by `duration`, applying every event on the way.
  /// `t0` only offsets the times reported to the callback.
  std::size_t advance(State& z, double duration, StreamSet& rng, const EventCallback& on_event = {},
                      double t0 = 0.0);

  void reset_event_count() { events_ = 0; }
  std::size_t event_count() const { return events_; }
  const PdmpSpec& spec() const { return spec_; }

 private:
  const PdmpSpec& spec_;
  std::size_t max_events_;
  std::size_t events_ = 0;
  std::vector<Hazard> hazards_;
  Hazard total_;
  std::vector<double> weights_;
  Noise noise_;
};

/// Single next-event draw (convenience wrapper over ExactSimulator).
EventDraw next_event_time_exact(const PdmpSpec& spec, const State& z, double horizon, StreamSet& rng);

/// Exact trajectory on [0, T]. Throws EventStorm past `max_events`.
SkeletonPath simulate_exact(const PdmpSpec& spec, const State& z0, double T, StreamSet& rng,
                            std::size_t max_events = 1'000'000);

}  // namespace pdmp
