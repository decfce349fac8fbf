#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace uavloc {

// Seeded random source with a fully pinned output sequence. std::mt19937_64
// is specified bit-exactly by the standard; the distributions below are
// implemented here because std::*_distribution sequences vary across
// standard libraries and every generated dataset must be reproducible
// byte-for-byte.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(uniform01() * (hi - lo + 1.0));
  }

  // Standard normal via Box-Muller; one cached deviate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Derived generator for parallel per-item streams (seed + index scheme).
  static Rng derived(std::uint64_t seed, std::uint64_t index) {
    return Rng(seed * 0x9e3779b97f4a7c15ULL + index + 1);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace uavloc
