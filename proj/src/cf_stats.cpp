#include "sfgof/cf_stats.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sfgof/quadrature.hpp"

namespace sfgof {

namespace {

struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

// bracket of the exponential-variant pair sum for p = r_k + r_j, m = r_k - r_j
inline double exp_pair_term(double p, double m, double lam2) {
  const double dp = lam2 + p * p;
  const double dm = lam2 + m * m;
  const double dp2 = dp * dp;
  return 1.0 / dm - 1.0 / dp + 4.0 * p / dp2 + 2.0 * (lam2 - 3.0 * p * p) / (dp2 * dp) +
         2.0 * (lam2 - 3.0 * m * m) / (dm * dm * dm);
}

// bracket of the gamma(kappa = 2) pair sum
inline double gamma2_pair_term(double p, double m, double lam2) {
  const double p2 = p * p;
  const double m2 = m * m;
  const double dp = lam2 + p2;
  const double dm = lam2 + m2;
  const double dp2 = dp * dp, dp3 = dp2 * dp, dp4 = dp3 * dp, dp5 = dp4 * dp;
  const double dm2 = dm * dm, dm3 = dm2 * dm, dm5 = dm3 * dm2;
  return 1.0 / dm - 1.0 / dp + 4.0 * (lam2 - 3.0 * m2) / dm3 + 12.0 * (lam2 - 3.0 * p2) / dp3 +
         8.0 * p * (dp2 - 12.0 * (lam2 - p2)) / dp4 +
         24.0 * (lam2 * lam2 - 10.0 * lam2 * m2 + 5.0 * m2 * m2) / dm5 -
         24.0 * (lam2 * lam2 - 10.0 * lam2 * p2 + 5.0 * p2 * p2) / dp5;
}

void check_config(const CfStatConfig& config) {
  if (!(config.lambda > 0.0)) throw std::invalid_argument("cf statistic requires lambda > 0");
}

// Truncation point with (1 + T)^degree exp(-lambda T) <= 1e-18, so the
// discarded tails are negligible against the kept mass.
double weight_truncation(double lambda, int degree) {
  double t = 45.0 / lambda;
  for (int i = 0; i < 6; ++i) t = (41.5 + degree * std::log1p(t)) / lambda;
  return t;
}

}  // namespace

EcfParts ecf_parts(std::span<const double> residuals, double t) {
  if (residuals.empty()) throw std::invalid_argument("ecf_parts requires n >= 1");
  double c = 0.0, s = 0.0;
  for (const double r : residuals) {
    c += std::cos(t * r);
    s += std::sin(t * r);
  }
  const double n = static_cast<double>(residuals.size());
  return {c / n, s / n};
}

double d_statistic(std::span<const double> residuals, double t, CfVariant variant) {
  const auto [c, s] = ecf_parts(residuals, t);
  switch (variant) {
    case CfVariant::exp_production:
      return s + t * c;
    case CfVariant::exp_cost:
      return s - t * c;
    case CfVariant::gamma2:
      return (1.0 - t * t) * s + 2.0 * t * c;
  }
  throw std::logic_error("unknown variant");
}

double t_stat_closed(std::span<const double> residuals, const CfStatConfig& config) {
  check_config(config);
  const std::size_t n = residuals.size();
  if (n == 0) throw std::invalid_argument("t_stat_closed requires n >= 1");
  const double lam2 = config.lambda * config.lambda;
  // S(t) flips sign under residual negation while C(t) is even, so the cost
  // statistic is the production pair sum with the sign of r_k + r_j flipped
  // (the difference enters only through its square).
  const double psign = config.variant == CfVariant::exp_cost ? -1.0 : 1.0;
  const bool gamma = config.variant == CfVariant::gamma2;

  KahanSum acc;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      const double p = psign * (residuals[k] + residuals[j]);
      const double m = residuals[k] - residuals[j];
      acc.add(2.0 * (gamma ? gamma2_pair_term(p, m, lam2) : exp_pair_term(p, m, lam2)));
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double p = psign * 2.0 * residuals[j];
    acc.add(gamma ? gamma2_pair_term(p, 0.0, lam2) : exp_pair_term(p, 0.0, lam2));
  }
  return config.lambda / static_cast<double>(n) * acc.sum;
}

double t_stat_quadrature(std::span<const double> residuals, const CfStatConfig& config) {
  check_config(config);
  const std::size_t n = residuals.size();
  if (n == 0) throw std::invalid_argument("t_stat_quadrature requires n >= 1");

  // |D(t)| <= 1 + |t| for the exponential variants, <= (1 + |t|)^2 for gamma
  const int degree = config.variant == CfVariant::gamma2 ? 4 : 2;
  const double t_max = weight_truncation(config.lambda, degree);

  auto integrand = [&](double t) {
    const double d = d_statistic(residuals, t, config.variant);
    return d * d * std::exp(-config.lambda * std::abs(t));
  };
  const double pts[3] = {-t_max, 0.0, t_max};
  const QuadratureOptions opt{1e-280, 3e-11, 20000};
  const double value =
      integrate_or_throw(integrand, std::span<const double>(pts, 3), opt, "t_stat_quadrature");
  return static_cast<double>(n) * value;
}

double limit_stat(std::span<const double> residuals) {
  if (residuals.empty()) throw std::invalid_argument("limit_stat requires n >= 1");
  KahanSum acc;
  for (const double r : residuals) acc.add(r);
  const double n = static_cast<double>(residuals.size());
  const double centered = acc.sum / n + 1.0;
  return n * centered * centered;
}

double laplace_kernel(double z, double lambda, LaplaceKernelKind kind) {
  if (!(lambda > 0.0)) throw std::invalid_argument("laplace_kernel requires lambda > 0");
  const double z2 = z * z;
  const double lam2 = lambda * lambda;
  const double d = z2 + lam2;
  switch (kind) {
    case LaplaceKernelKind::cos0:
      return 2.0 * lambda / d;
    case LaplaceKernelKind::cos2:
      return 4.0 * lambda * (lam2 - 3.0 * z2) / (d * d * d);
    case LaplaceKernelKind::cos4:
      return 48.0 * lambda * (5.0 * z2 * z2 - 10.0 * z2 * lam2 + lam2 * lam2) /
             (d * d * d * d * d);
    case LaplaceKernelKind::sin1:
      return 4.0 * z * lambda / (d * d);
    case LaplaceKernelKind::sin3:
      return 48.0 * z * lambda * (lam2 - z2) / (d * d * d * d);
  }
  throw std::logic_error("unknown kernel kind");
}

double generic_cf_distance(std::span<const double> residuals_raw,
                           const std::function<std::complex<double>(double)>& null_cf_handle,
                           double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("generic_cf_distance requires lambda > 0");
  if (residuals_raw.empty()) throw std::invalid_argument("generic_cf_distance requires n >= 1");

  const double t_max = weight_truncation(lambda, 1);  // integrand bounded by 4
  auto integrand = [&](double t) {
    const auto [c, s] = ecf_parts(residuals_raw, t);
    const std::complex<double> diff = std::complex<double>(c, s) - null_cf_handle(t);
    return std::norm(diff) * std::exp(-lambda * std::abs(t));
  };
  const double pts[3] = {-t_max, 0.0, t_max};
  const QuadratureOptions opt{1e-12, 1e-10, 20000};
  const double value =
      integrate_or_throw(integrand, std::span<const double>(pts, 3), opt, "generic_cf_distance");
  return static_cast<double>(residuals_raw.size()) * value;
}

}  // namespace sfgof
