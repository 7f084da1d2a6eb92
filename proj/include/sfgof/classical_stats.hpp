#pragma once

#include <span>
#include <vector>

#include "sfgof/distributions.hpp"

namespace sfgof {

// Fitted null CDF values F0(j) = F0(eps_(j)), sorted ascending, each in [0,1].
struct ProbitVector {
  std::vector<double> f0;
};

// Maps residuals through the fitted null CDF and sorts; F0 is monotone so
// sorting the CDF values and sorting the residuals are the same thing.
ProbitVector probit_from_residuals(std::span<const double> residuals, const ComposedSpec& fitted);

// KS = max{ max_j(j/n - F0j), max_j(F0j - (j-1)/n) }; rejects unsorted input.
double ks_stat(const ProbitVector& probit);

// CvM = 1/(12n) + sum_j (F0j - (2j-1)/(2n))^2; rejects unsorted input.
double cvm_stat(const ProbitVector& probit);

}  // namespace sfgof
