#pragma once

#include <complex>
#include <functional>
#include <span>

namespace sfgof {

// Which composed-error characterization the test statistic targets.
//  exp_production: D(t) = S(t) + t C(t)      (unit exponential, eps = v - u)
//  exp_cost:       D(t) = S(t) - t C(t)      (cost frontier, eps = v + u)
//  gamma2:         D(t) = (1 - t^2) S(t) + 2 t C(t)
enum class CfVariant { exp_production, exp_cost, gamma2 };

struct CfStatConfig {
  double lambda = 1.0;  // Laplace weight decay, w(t) = exp(-lambda |t|)
  CfVariant variant = CfVariant::exp_production;
};

struct EcfParts {
  double c;  // mean of cos(t r_j)
  double s;  // mean of sin(t r_j)
};

EcfParts ecf_parts(std::span<const double> residuals, double t);

double d_statistic(std::span<const double> residuals, double t, CfVariant variant);

// n * int D^2(t) exp(-lambda |t|) dt evaluated through the closed-form pair
// sums (Laplace-transform integrals of cos/sin); O(n^2), no grid over t.
// The diagonal j = k terms are ordinary terms with difference zero.
double t_stat_closed(std::span<const double> residuals, const CfStatConfig& config);

// Same statistic by adaptive quadrature of the integral on a symmetric
// truncated interval; the independent check for t_stat_closed.
double t_stat_quadrature(std::span<const double> residuals, const CfStatConfig& config);

// n * (mean(residuals) + 1)^2, the lambda -> infinity limit of
// (lambda^3 / 4) * T_{n,lambda} for the exponential variant.
double limit_stat(std::span<const double> residuals);

enum class LaplaceKernelKind { cos0, cos2, cos4, sin1, sin3 };

// int t^m trig(t z) exp(-lambda |t|) dt over the real line:
//   cos0: 2 lambda / (z^2 + lambda^2)
//   cos2: 4 lambda (lambda^2 - 3 z^2) / (z^2 + lambda^2)^3
//   cos4: 48 lambda (5 z^4 - 10 z^2 lambda^2 + lambda^4) / (z^2 + lambda^2)^5
//   sin1: 4 z lambda / (z^2 + lambda^2)^2
//   sin3: 48 z lambda (lambda^2 - z^2) / (z^2 + lambda^2)^4
double laplace_kernel(double z, double lambda, LaplaceKernelKind kind);

// n * int |phi_n(t) - phi0(t)|^2 exp(-lambda |t|) dt with phi_n the empirical
// CF of the raw residuals and phi0 the fitted null CF; applies to any null
// law whose CF is computable.
double generic_cf_distance(std::span<const double> residuals_raw,
                           const std::function<std::complex<double>(double)>& null_cf_handle,
                           double lambda);

}  // namespace sfgof
