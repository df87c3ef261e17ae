#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>

namespace pdmp {

/// Roles for independent random streams. Couplings share streams by role.
enum class Stream : int {
  EventClock = 0,
  KernelSelect,
  KernelNoise,
  Acceptance,
  Initial,
  Subsample,
  Independent,
  Count
};

/// SplitMix64 finaliser, used to derive stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Thin wrapper over a 64-bit Mersenne twister with the draws the library needs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform() {
    for (;;) {
      const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  /// Standard exponential, -log(U).
  double exponential() { return -std::log(uniform()); }

  double normal() { return normal_(engine_); }

  /// Uniform index in {0, ..., n-1}.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Per-replica family of role streams, derived deterministically from
/// (master seed, replica id, role). Streams are created lazily.
class StreamSet {
 public:
  StreamSet(std::uint64_t master_seed, std::uint64_t replica)
      : key_(splitmix64(splitmix64(master_seed) ^ splitmix64(replica + 0x51ed270b27e5f3a1ULL))) {}

  Rng& operator()(Stream role) {
    auto& slot = streams_[static_cast<int>(role)];
    if (!slot) slot.emplace(splitmix64(key_ + 0x2545f4914f6cdd1dULL * (static_cast<std::uint64_t>(role) + 1)));
    return *slot;
  }

  /// A fresh, independent stream set, e.g. for the independent continuation
  /// of a process after its coupling breaks. Repeated calls give distinct sets.
  StreamSet fork() {
    ++forks_;
    return StreamSet(key_ ^ splitmix64(0xf0f0f0f0ULL + forks_), forks_, 0);
  }

  std::uint64_t key() const { return key_; }

 private:
  StreamSet(std::uint64_t key, std::uint64_t salt, int) : key_(splitmix64(key + salt)) {}

  std::uint64_t key_;
  std::uint64_t forks_ = 0;
  std::array<std::optional<Rng>, static_cast<int>(Stream::Count)> streams_{};
};

}  // namespace pdmp
