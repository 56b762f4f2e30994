#pragma once

#include <cstdint>
#include <string_view>

namespace segeval {

// Counter-based pseudo-random generator. Every draw is a pure function of
// (key, counter), so independent streams keyed by (seed, stream ids) produce
// the same values no matter which thread draws them or in what order streams
// are visited.
class CounterRng {
 public:
  CounterRng() = default;
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b);
  static std::uint64_t hash_str(std::string_view s);

  // Derives a child key; used to split one seed into independent streams.
  CounterRng fork(std::uint64_t stream) const { return CounterRng(mix(key_, stream)); }
  CounterRng fork(std::string_view stream) const { return fork(hash_str(stream)); }

  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double next_unit();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }
  // Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace segeval
