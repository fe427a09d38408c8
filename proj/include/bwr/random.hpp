#pragma once

#include <cstdint>

namespace bwr {

/// Counter-based uniform stream.
///
/// The i-th output of a stream with key k is splitmix64(k + (i+1) * 0x9E3779B97F4A7C15),
/// i.e. the SplitMix64 finalizer applied to a Weyl sequence. Outputs depend
/// only on (key, counter), so a run is reproducible on any platform with
/// IEEE-754 doubles and a correctly rounded std::log.
///
/// Uniforms are (x >> 11 + 0.5) * 2^-53, strictly inside (0,1).
class CounterStream {
public:
  explicit CounterStream(std::uint64_t key) : key_(key) {}

  /// Key for the `index`-th independent substream of a master seed.
  static std::uint64_t derive_key(std::uint64_t master_seed, std::uint64_t index);

  std::uint64_t next_u64();
  double uniform();
  /// Exponential with the given rate by inverse CDF: -log(u) / rate.
  double exponential(double rate);
  bool bernoulli(double prob) { return uniform() < prob; }
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  std::uint64_t counter() const { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

/// Seed used by randomized commands when none is given.
inline constexpr std::uint64_t kDefaultSeed = 20240101;

}  // namespace bwr
