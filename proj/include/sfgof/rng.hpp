#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace sfgof {

// splitmix64 step; used for seed expansion and stream-key mixing.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256++ stream with local state only.  Variates are generated by
// explicit algorithms (not <random> distributions, whose algorithms are
// implementation-defined) so that a given (seed, call sequence) produces
// bit-identical output on every platform and standard library.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : state_) w = splitmix64_next(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform on (0, 1]; never returns 0, safe under log()
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // uniform on [0, 1)
  double uniform01_halfopen() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // standard normal via Box-Muller, cosine branch; consumes two words per call
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01_halfopen();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double exponential(double theta) {
    return -theta * std::log(uniform01());
  }

  double half_normal(double sigma_u) {
    return std::abs(sigma_u * normal());
  }

  // Gamma(kappa, theta).  kappa == 1 and kappa == 2 are drawn exactly from
  // exponentials; other shapes use Marsaglia-Tsang squeeze rejection, with
  // the boost Gamma(kappa) = Gamma(kappa + 1) * U^{1/kappa} for kappa < 1.
  double gamma(double kappa, double theta) {
    if (!(kappa > 0.0) || !(theta > 0.0))
      throw std::invalid_argument("gamma variate requires kappa > 0 and theta > 0");
    if (kappa == 1.0) return exponential(theta);
    if (kappa == 2.0) return exponential(theta) + exponential(theta);
    if (kappa < 1.0) {
      const double g = gamma(kappa + 1.0, 1.0);
      return theta * g * std::pow(uniform01(), 1.0 / kappa);
    }
    const double d = kappa - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return theta * d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return theta * d * v;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> state_{};
};

// Derives an independent stream from a master seed and up to two stream keys
// (e.g. Monte Carlo iteration index and phase/attempt tag).  Streams for
// distinct keys are statistically independent and reproducible regardless of
// evaluation order, which is what makes parallel replications deterministic.
inline RngStream derive_stream(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64_next(s);
  s ^= a * 0x9e3779b97f4a7c15ULL + h;
  h = splitmix64_next(s);
  s ^= b * 0xd1b54a32d192ed03ULL + h;
  return RngStream(splitmix64_next(s));
}

}  // namespace sfgof
