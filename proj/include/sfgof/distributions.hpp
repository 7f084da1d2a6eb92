#pragma once

#include <complex>
#include <cstdint>
#include <variant>
#include <vector>

namespace sfgof {

enum class Orientation { production, cost };  // production: eps = v - u; cost: eps = v + u

struct NoiseSpec {
  double sigma_v;  // sd of the zero-mean normal noise, > 0
};

struct ExponentialIneff {
  double theta;  // scale, > 0
};

struct GammaIneff {
  double kappa;  // shape, > 0
  double theta;  // scale, > 0
};

// |N(0, sigma_u^2)|, density 2 phi(x; sigma_u) on x >= 0
struct HalfNormalIneff {
  double sigma_u;
};

using IneffSpec = std::variant<ExponentialIneff, GammaIneff, HalfNormalIneff>;

struct ComposedSpec {
  NoiseSpec noise;
  IneffSpec ineff;
  Orientation orientation = Orientation::production;
};

// throws std::invalid_argument on non-positive scale/shape parameters
void validate(const ComposedSpec& spec);

double ineff_mean(const IneffSpec& ineff);
double ineff_variance(const IneffSpec& ineff);
double composed_mean(const ComposedSpec& spec);
double composed_variance(const ComposedSpec& spec);

class RngStream;

// n i.i.d. draws of the composed error; identical (spec, n, seed) give a
// bit-identical vector.
std::vector<double> sample_composed(const ComposedSpec& spec, std::size_t n, std::uint64_t seed);
std::vector<double> sample_composed(const ComposedSpec& spec, std::size_t n, RngStream& rng);

// Normal/exponential composed-error density
//   f(eps) = (1/theta) Phi(-eps/sigma_v - sigma_v/theta) exp(eps/theta + sigma_v^2/(2 theta^2))
// evaluated as exp(log Phi + ...) so it stays finite far into both tails.
double normexp_density(double eps, double sigma_v, double theta);
double normexp_log_density(double eps, double sigma_v, double theta);

// Closed-form distribution function of the normal/exponential composed error
// (production orientation): F(e) = Phi(e/s) + exp(e/t + s^2/(2 t^2)) Phi(-e/s - s/t).
double normexp_cdf(double eps, double sigma_v, double theta);

// Normal/gamma(kappa = 2) closed forms; with mu = -eps - sigma_v^2/theta and
// c = eps/theta + sigma_v^2/(2 theta^2):
//   f(eps) = exp(c)/theta^2 * [mu Phi(mu/s) + s phi(mu/s)]
//   F(eps) = Phi(eps/s) + exp(c) [ (1 + mu/theta) Phi(mu/s) + (s/theta) phi(mu/s) ]
double normgamma2_density(double eps, double sigma_v, double theta);
double normgamma2_cdf(double eps, double sigma_v, double theta);

// f_eps(eps) = int_0^inf f_v(eps -+ ... +- u) f_u(u) du by adaptive quadrature
// with panel breakpoints pinned to the peak of the integrand, so remote modes
// (e.g. eps far in the inefficiency tail) are never missed.  Throws
// QuadratureError if the requested tolerance is not reached.
double composed_density_quadrature(double eps, const ComposedSpec& spec);

// Pure quadrature CDF, F(eps) = int_{-inf}^{eps} f; used directly for laws
// without a closed form and as the cross-check oracle for those with one.
double composed_cdf_quadrature(double eps, const ComposedSpec& spec);

// Distribution function of the composed error.  Dispatches to the closed
// forms for normal/exponential and normal/gamma with integer shape 1 or 2 and
// falls back to quadrature otherwise.
double composed_cdf(double eps, const ComposedSpec& spec);

// Characteristic function of the composed error: phi_v(t) * phi_u(-t) for
// production, phi_v(t) * phi_u(t) for cost.
std::complex<double> null_cf(double t, const ComposedSpec& spec);

}  // namespace sfgof
