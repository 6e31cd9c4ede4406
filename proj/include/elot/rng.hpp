#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace elot {

// splitmix64 finalizer, used to whiten seed material.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic named substream of one master seed. Streams are identified
// by (name, a, b), so adding a new consumer never perturbs existing draws.
// The normal draw is hand-rolled Box-Muller on top of the raw engine output;
// std::normal_distribution has an unspecified sequence and would tie results
// to one standard-library version.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::string_view name,
            std::uint64_t a = 0, std::uint64_t b = 0)
      : engine_(derive(master_seed, name, a, b)) {}

  static std::uint64_t derive(std::uint64_t master_seed, std::string_view name,
                              std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = mix64(master_seed);
    s = mix64(s ^ fnv1a(name));
    s = mix64(s ^ a);
    s = mix64(s ^ b);
    return s;
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal. One Box-Muller pair per call; the sine branch is
  // discarded to keep the stream stateless.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace elot
