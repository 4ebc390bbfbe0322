#pragma once

#include <cstdint>
#include <random>

namespace covsched {

/// Named, reproducible random stream: mt19937_64 seeded from
/// (seed, replication, role, sub) through std::seed_seq, with uniforms taken
/// from the top 53 bits and Gaussians via Box-Muller. Everything here is
/// fully specified by the standard, so traces are bit-identical across
/// platforms for a given seed tuple.
class RngStream {
 public:
  enum Role : std::uint64_t {
    kPlant = 1,
    kMeasurement = 2,
    kChannel = 3,
    kFeedback = 4,
    kInit = 5,
    kPolicy = 6,
    kParams = 7,
  };

  RngStream(std::uint64_t seed, std::uint64_t replication, std::uint64_t role,
            std::uint64_t sub = 0) {
    std::seed_seq seq{seed, replication, role, sub};
    gen_.seed(seq);
  }

  double uniform01() {
    // 53-bit mantissa double in [0, 1).
    return (gen_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace covsched
