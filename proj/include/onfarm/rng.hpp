#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace onfarm {

// Derives an independent engine for (root seed, replicate, purpose).
// Streams are keyed by counter rather than by call order, so replicates
// can run in any order (or concurrently) and still draw the same values.
inline std::mt19937_64 derive_stream(std::uint64_t root_seed,
                                     std::uint64_t replicate,
                                     std::uint64_t purpose) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(root_seed), static_cast<std::uint32_t>(root_seed >> 32),
      static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(replicate >> 32),
      static_cast<std::uint32_t>(purpose),   static_cast<std::uint32_t>(purpose >> 32)};
  return std::mt19937_64(seq);
}

// Box-Muller standard normal sampler. std::normal_distribution leaves the
// draw algorithm implementation-defined; this keeps draws identical for a
// given engine state on every platform.
class GaussianSampler {
public:
  explicit GaussianSampler(std::mt19937_64& engine) : engine_(engine) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double operator()(double mean, double sd) { return mean + sd * (*this)(); }

private:
  double uniform01() {
    // 53-bit mantissa in [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64& engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace onfarm
