#include "sfgof/classical_stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sfgof {

namespace {

void check_probit(const ProbitVector& probit) {
  if (probit.f0.empty()) throw std::invalid_argument("probit vector must be nonempty");
  double prev = -1.0;
  for (const double v : probit.f0) {
    if (!(v >= 0.0) || !(v <= 1.0)) throw std::invalid_argument("probit values must lie in [0,1]");
    if (v < prev) throw std::invalid_argument("probit values must be sorted ascending");
    prev = v;
  }
}

}  // namespace

ProbitVector probit_from_residuals(std::span<const double> residuals, const ComposedSpec& fitted) {
  ProbitVector probit;
  probit.f0.reserve(residuals.size());
  for (const double e : residuals) probit.f0.push_back(composed_cdf(e, fitted));
  std::sort(probit.f0.begin(), probit.f0.end());
  return probit;
}

double ks_stat(const ProbitVector& probit) {
  check_probit(probit);
  const double n = static_cast<double>(probit.f0.size());
  double d_plus = 0.0, d_minus = 0.0;
  for (std::size_t j = 0; j < probit.f0.size(); ++j) {
    const double jj = static_cast<double>(j + 1);
    d_plus = std::max(d_plus, jj / n - probit.f0[j]);
    d_minus = std::max(d_minus, probit.f0[j] - (jj - 1.0) / n);
  }
  return std::max(d_plus, d_minus);
}

double cvm_stat(const ProbitVector& probit) {
  check_probit(probit);
  const double n = static_cast<double>(probit.f0.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < probit.f0.size(); ++j) {
    const double target = (2.0 * static_cast<double>(j + 1) - 1.0) / (2.0 * n);
    const double diff = probit.f0[j] - target;
    sum += diff * diff;
  }
  return 1.0 / (12.0 * n) + sum;
}

}  // namespace sfgof
