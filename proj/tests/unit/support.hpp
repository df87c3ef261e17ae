#pragma once

#include <cmath>
#include <cstdint>

#include <gtest/gtest.h>

#include "pdmp/rng.hpp"
#include "pdmp/state.hpp"

namespace pdmp::test {

inline State state1(double x, double v) { return State(Vector::Constant(1, x), Vector::Constant(1, v)); }

inline Vector random_vector(Rng& rng, int d, double scale = 2.0) {
  Vector out(d);
  for (int i = 0; i < d; ++i) out(i) = scale * rng.normal();
  return out;
}

inline Vector random_signs(Rng& rng, int d) {
  Vector out(d);
  for (int i = 0; i < d; ++i) out(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
  return out;
}

inline State random_zzs_state(Rng& rng, int d, double scale = 2.0) {
  return State(random_vector(rng, d, scale), random_signs(rng, d));
}

/// Runs `body(rng, case_index)` for `cases` generated cases. The seed is fixed
/// so a failing case reproduces; SCOPED_TRACE names it.
template <class Body>
void for_cases(int cases, std::uint64_t seed, Body body) {
  Rng rng(seed);
  for (int k = 0; k < cases; ++k) {
    SCOPED_TRACE("case " + std::to_string(k));
    body(rng, k);
  }
}

/// |observed - expected| within `sigmas` binomial standard errors.
inline void expect_frequency(double hits, double n, double p, double sigmas = 3.0) {
  const double se = std::sqrt(p * (1.0 - p) / n);
  EXPECT_NEAR(hits / n, p, sigmas * se);
}

}  // namespace pdmp::test
