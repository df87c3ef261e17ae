#include "pdmp/exact.hpp"

#include <algorithm>
#include <string>

#include "pdmp/errors.hpp"

namespace pdmp {

void PdmpSpec::validate() const {
  if (rates.m != kernels.m) {
    throw InvalidConfig(name + ": rate count " + std::to_string(rates.m) + " != kernel count " +
                        std::to_string(kernels.m));
  }
  if (rates.m <= 0) throw InvalidConfig(name + ": at least one kernel required");
  if (!rates.evaluate) throw InvalidConfig(name + ": rates.evaluate missing");
  if (!kernels.apply) throw InvalidConfig(name + ": kernels.apply missing");
  if (!flow.exact && !flow.vector_field) throw InvalidConfig(name + ": flow has neither closed form nor vector field");
}

State evaluate_flow(const Flow& flow, const State& z, double t) {
  if (!flow.exact) throw NoExactFlow("model has no closed-form flow; use an integrator");
  State out = z;
  if (t != 0.0) flow.exact(out, t);
  return out;
}

State SkeletonPath::at(const Flow& flow, double t) const {
  auto it = std::upper_bound(event_times.begin(), event_times.end(), t);
  if (it == event_times.begin()) return evaluate_flow(flow, initial, t);
  const auto k = static_cast<std::size_t>(it - event_times.begin()) - 1;
  return evaluate_flow(flow, post_jump[k], t - event_times[k]);
}

int sample_kernel_index(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw ZeroTotalRate("kernel draw with zero total rate");
  const double target = rng.uniform() * total;
  double cum = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    cum += weights[i];
    last_positive = static_cast<int>(i);
    if (target < cum) return last_positive;
  }
  return last_positive;
}

ExactSimulator::ExactSimulator(const PdmpSpec& spec, std::size_t max_events)
    : spec_(spec),
      max_events_(max_events),
      hazards_(static_cast<std::size_t>(spec.rates.m)),
      weights_(static_cast<std::size_t>(spec.rates.m)) {
  if (!spec_.flow.has_exact()) throw NoExactFlow(spec_.name + ": exact simulation needs a closed-form flow");
  if (!spec_.rates.along_flow) throw NoSimulationPath(spec_.name + ": no event-time inversion or bound registered");
}

EventDraw ExactSimulator::next_event(const State& z, double horizon, StreamSet& rng) {
  for (auto& h : hazards_) h.clear();
  spec_.rates.along_flow(z, horizon, hazards_);
  total_.clear();
  for (const auto& h : hazards_) total_ += h;

  std::optional<double> tau;
  if (total_.is_affine()) {
    tau = total_.invert(rng(Stream::EventClock).exponential(), horizon);
  } else if (total_.thinnable()) {
    tau = total_.sample_thinning(rng(Stream::EventClock), rng(Stream::Acceptance), horizon);
  } else {
    throw NoSimulationPath(spec_.name + ": rate along the flow has neither closed form nor bound");
  }
  if (!tau) return {};

  double sum = 0.0;
  for (std::size_t i = 0; i < hazards_.size(); ++i) {
    weights_[i] = hazards_[i](*tau);
    sum += weights_[i];
  }
  if (!(sum > 0.0)) {
    spec_.rates.evaluate(evaluate_flow(spec_.flow, z, *tau), weights_);
  }
  return {tau, sample_kernel_index(weights_, rng(Stream::KernelSelect))};
}

std::size_t ExactSimulator::advance(State& z, double duration, StreamSet& rng, const EventCallback& on_event,
                                    double t0) {
  std::size_t count = 0;
  double elapsed = 0.0;
  while (elapsed < duration) {
    const double window = std::min(duration - elapsed, spec_.max_window);
    const EventDraw draw = next_event(z, window, rng);
    if (!draw.time) {
      spec_.flow.exact(z, window);
      elapsed = (window == duration - elapsed) ? duration : elapsed + window;
      continue;
    }
    spec_.flow.exact(z, *draw.time);
    elapsed += *draw.time;
    if (++events_ > max_events_) {
      throw EventStorm(spec_.name + ": more than " + std::to_string(max_events_) + " events in one path");
    }
    ++count;
    spec_.kernels.draw(rng(Stream::KernelNoise), noise_);
    if (on_event) {
      const State pre = z;
      spec_.kernels.apply(z, *draw.kernel, noise_);
      on_event(t0 + elapsed, pre, z, *draw.kernel);
    } else {
      spec_.kernels.apply(z, *draw.kernel, noise_);
    }
  }
  return count;
}

EventDraw next_event_time_exact(const PdmpSpec& spec, const State& z, double horizon, StreamSet& rng) {
  ExactSimulator sim(spec);
  return sim.next_event(z, horizon, rng);
}

SkeletonPath simulate_exact(const PdmpSpec& spec, const State& z0, double T, StreamSet& rng,
                            std::size_t max_events) {
  ExactSimulator sim(spec, max_events);
  SkeletonPath path;
  path.initial = z0;
  path.terminal_time = T;
  State z = z0;
  sim.advance(
      z, T, rng,
      [&](double t, const State& pre, const State& post, int kernel) {
        path.event_times.push_back(t);
        path.pre_jump.push_back(pre);
        path.post_jump.push_back(post);
        path.kernels.push_back(kernel);
      },
      0.0);
  path.terminal = std::move(z);
  return path;
}

}  // namespace pdmp
