#include "segeval/rng.hpp"

namespace segeval {

namespace {

// splitmix64 finalizer (Steele, Lea, Flood 2014).
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::mix(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b));
}

std::uint64_t CounterRng::hash_str(std::string_view s) {
  // FNV-1a.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t CounterRng::next_u64() {
  return mix64(key_ + 0x9e3779b97f4a7c15ull * ++counter_);
}

double CounterRng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::int64_t CounterRng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(next_u64());  // full range
  const auto wide = static_cast<unsigned __int128>(next_u64()) * span;
  return lo + static_cast<std::int64_t>(wide >> 64);
}

}  // namespace segeval
