#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace pseudosense {

/// Portable pseudo-random source used by every synthetic fixture.
///
/// The bit stream is std::mt19937_64 (fully specified by the C++ standard, so
/// identical on every platform). The distribution layer is implemented here
/// rather than borrowed from <random>, whose distributions are
/// implementation-defined:
///   uniform()  = (next() >> 11) * 2^-53, a double in [0, 1)
///   normal()   = Box-Muller on two uniforms, u1 mapped to (0, 1]; the cosine
///                branch is returned first and the sine branch is cached.
///   below(n)   = floor(uniform() * n)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pseudosense
