#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace pnsreg {

// Deterministic random source. std::mt19937_64 output is fully specified by
// the standard, but the <random> distributions are not; to make seeded runs
// bit-reproducible across compilers we generate uniforms from the raw engine
// and derive everything else ourselves.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // N(0, sigma^2) via Box-Muller. Draws two uniforms per call; the sine
  // branch is discarded so a call consumes a fixed amount of engine state.
  double normal(double sigma = 1.0) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return sigma * std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform integer in [0, n). The multiply-shift map has bias O(n / 2^53),
  // negligible for the sizes used here and deterministic everywhere.
  int below(int n) { return static_cast<int>(uniform() * static_cast<double>(n)); }

  // Fisher-Yates permutation of 0..n-1.
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(p[i], p[below(i + 1)]);
    return p;
  }

  // von Mises(mu, kappa) sample, Best-Fisher rejection scheme.
  double vonmises(double mu, double kappa) {
    constexpr double pi = std::numbers::pi;
    if (kappa < 1e-8) return wrap_(mu + (2.0 * uniform() - 1.0) * pi);
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double r = (1.0 + rho * rho) / (2.0 * rho);
    for (;;) {
      const double z = std::cos(pi * uniform());
      const double f = (1.0 + r * z) / (r + z);
      const double c = kappa * (r - f);
      const double u2 = uniform();
      if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
        const double sign = uniform() < 0.5 ? -1.0 : 1.0;
        return wrap_(mu + sign * std::acos(f));
      }
    }
  }

 private:
  static double wrap_(double t) {
    constexpr double tau = 2.0 * std::numbers::pi;
    return t - tau * std::floor((t + std::numbers::pi) / tau);
  }

  std::mt19937_64 eng_;
};

}  // namespace pnsreg
