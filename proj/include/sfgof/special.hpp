#pragma once

#include <array>
#include <cmath>

namespace sfgof {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrtPi = 0.56418958354775628695;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;
inline constexpr double kTwoPi = 6.28318530717958647693;

inline double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

namespace detail {

// series factor of the lower-tail expansion
//   Phi(x) = phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...),  x <= -10,
// truncated at 12 terms (relative error < 1e-13 at x = -10 and shrinking
// rapidly to the left)
inline double phi_tail_series(double x) {
  const double inv2 = 1.0 / (x * x);
  double term = 1.0;
  double series = 1.0;
  for (int k = 1; k <= 12; ++k) {
    term *= -static_cast<double>(2 * k - 1) * inv2;
    series += term;
  }
  return series;
}

}  // namespace detail

// log Phi(x).  erfc stays accurate and normal down to x ~ -37, but products
// like Phi(a) * exp(b) need log Phi far beyond that, so for x < -10 the
// divergent tail expansion takes over.
inline double log_norm_cdf(double x) {
  if (x >= -10.0) return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  return -0.5 * x * x - kLogSqrt2Pi - std::log(-x) + std::log(detail::phi_tail_series(x));
}

// Dawson integral D(x) = exp(-x^2) * int_0^x exp(t^2) dt, via Rybicki's
// sampling-theorem method with h = 0.25 (13 terms give ~1e-15 relative) and a
// Taylor series near the origin.  Needed for the imaginary part of the
// half-normal characteristic function.
inline double dawson(double x) {
  constexpr double h = 0.25;
  constexpr int n_terms = 13;
  static const std::array<double, n_terms> coef = [] {
    std::array<double, n_terms> c{};
    for (int i = 0; i < n_terms; ++i) {
      const double a = (2.0 * i + 1.0) * h;
      c[i] = std::exp(-a * a);
    }
    return c;
  }();

  if (std::abs(x) < 0.5) {
    // sum (-2)^k x^(2k+1) / (2k+1)!!
    double term = x;
    double sum = x;
    for (int k = 1; k <= 20; ++k) {
      term *= -2.0 * x * x / static_cast<double>(2 * k + 1);
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }

  const double xx = std::abs(x);
  const int n0 = 2 * static_cast<int>(0.5 * xx / h + 0.5);
  const double xp = xx - n0 * h;
  double e1 = std::exp(2.0 * xp * h);
  const double e2 = e1 * e1;
  double d1 = n0 + 1.0;
  double d2 = d1 - 2.0;
  double sum = 0.0;
  for (int i = 0; i < n_terms; ++i) {
    sum += coef[i] * (e1 / d1 + 1.0 / (d2 * e1));
    d1 += 2.0;
    d2 -= 2.0;
    e1 *= e2;
  }
  const double value = kInvSqrtPi * std::exp(-xp * xp) * sum;
  return x >= 0.0 ? value : -value;
}

}  // namespace sfgof
