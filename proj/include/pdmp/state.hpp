#pragma once

#include <Eigen/Core>

namespace pdmp {

using Vector = Eigen::VectorXd;

/// A point z = (x, v) of the state space.
///
/// `x` is the continuous component carried by the flow. `v` is the velocity,
/// momentum, or discrete label (e.g. an open-channel count stored as a double).
struct State {
  Vector x;
  Vector v;

  State() = default;
  State(Vector position, Vector velocity) : x(std::move(position)), v(std::move(velocity)) {}

  bool operator==(const State& other) const {
    return x.size() == other.x.size() && v.size() == other.v.size() && x == other.x && v == other.v;
  }
};

/// l1 distance over both components.
inline double l1_distance(const State& a, const State& b) {
  return (a.x - b.x).lpNorm<1>() + (a.v - b.v).lpNorm<1>();
}

/// Euclidean distance over both components.
inline double l2_distance(const State& a, const State& b) {
  return std::sqrt((a.x - b.x).squaredNorm() + (a.v - b.v).squaredNorm());
}

}  // namespace pdmp
