#include "bwr/random.hpp"

#include <cmath>

namespace bwr {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t CounterStream::derive_key(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64_mix(splitmix64_mix(master_seed) ^ splitmix64_mix(index * kGolden + 0x632BE59BD9B4E019ULL));
}

std::uint64_t CounterStream::next_u64() {
  ++counter_;
  return splitmix64_mix(key_ + counter_ * kGolden);
}

double CounterStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterStream::exponential(double rate) { return -std::log(uniform()) / rate; }

std::int64_t CounterStream::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Rejection keeps the draw unbiased; span is tiny in practice.
  const std::uint64_t limit = span == 0 ? 0 : (~std::uint64_t{0} / span) * span;
  std::uint64_t x = next_u64();
  while (span != 0 && x >= limit) x = next_u64();
  return lo + static_cast<std::int64_t>(span == 0 ? x : x % span);
}

}  // namespace bwr
