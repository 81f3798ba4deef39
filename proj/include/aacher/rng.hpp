#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace aacher {

// Counter-based deterministic generator. Each draw hashes (key, counter), so a
// generator is a pure value: copying it forks the stream, and named sub-streams
// derive fresh keys without touching the parent's counter. Adding a new
// consumer stream never perturbs existing ones.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x5851f42d4c957f2dULL)) {}

  // Child generator for an independent labeled stream.
  Rng stream(std::string_view label) const {
    return Rng(key_, mix(key_ ^ fnv1a(label)));
  }

  Rng stream(std::string_view label, std::uint64_t index) const {
    return Rng(key_, mix(mix(key_ ^ fnv1a(label)) ^ index));
  }

  std::uint64_t next_u64() { return mix(key_ ^ mix(counter_++)); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform index in [0, n). Lemire multiply-shift.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Draw from N(mean, stddev^2) via Box-Muller; consumes exactly two u64.
  double gaussian(double mean, double stddev) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * radius * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

 private:
  Rng(std::uint64_t, std::uint64_t derived_key) : key_(derived_key) {}

  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace aacher
