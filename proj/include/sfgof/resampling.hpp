#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfgof/estimation.hpp"
#include "sfgof/rng.hpp"

namespace sfgof {

// A test statistic evaluated on a fitted model: the CF statistics use the
// standardized residuals, KS/CvM map the raw residuals through the fitted
// null CDF.  `eval` must be pure.
struct Statistic {
  std::string name;  // "T", "KS" or "CvM"
  double lambda = std::numeric_limits<double>::quiet_NaN();
  std::function<double(const SfmFit&)> eval;

  std::string display_name() const;
};

Statistic make_cf_statistic(double lambda);
Statistic make_ks_statistic();
Statistic make_cvm_statistic();

// refit non-convergence inside a bootstrap replicate
class BootstrapRefitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// too many Monte Carlo iterations had to be redrawn (> 2% of the run)
class ResamplingBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// the primary fit of the observed data did not converge
class FitNotConvergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// i.i.d. composed errors drawn from the fitted null law
std::vector<double> draw_bootstrap_errors(const SfmFit& fit, std::size_t n, RngStream& rng);

// One parametric bootstrap replicate: draw errors from the fitted null, form
// y* = x beta_hat + eps*, refit by MLE (warm-started at the parent fit) and
// evaluate the statistic on the refit.  Throws BootstrapRefitError when the
// refit does not converge.
double single_bootstrap(const SfmFit& fit, const Eigen::MatrixXd& x, const Statistic& statistic,
                        std::uint64_t seed);

// Order statistic at index M - floor(alpha M) (1-based ascending, clamped).
double critical_point(std::vector<double> boot_stats, double alpha);

struct BootstrapRun {
  std::vector<double> t_obs;   // Monte Carlo statistics, one per iteration
  std::vector<double> t_boot;  // matched single bootstrap statistics
  double alpha = 0.05;
  double critical = 0.0;
  double rejection_rate = 0.0;
  int failures_redrawn = 0;
};

// Location-model data generator: y_j = intercept + eps_j.
struct GeneratorSpec {
  ComposedSpec error;
  double intercept = 1.0;
};

// Warp-speed Monte Carlo: per iteration draw a sample, fit the null, compute
// the statistics, then one bootstrap replicate; the M bootstrap statistics
// pooled over iterations give the critical point.  Every statistic in
// `statistics` is evaluated on the same fits, so a whole table column group
// costs one MLE plus one refit per iteration.  Iterations whose fits fail are
// redrawn with a fresh derived stream; more than 2% redraws aborts.  Results
// are bit-identical for fixed (inputs, master_seed) at any thread count.
std::vector<BootstrapRun> warp_speed_mc_multi(const GeneratorSpec& generator,
                                              const NullModel& null_model,
                                              std::span<const Statistic> statistics, int iterations,
                                              int n, double alpha, std::uint64_t master_seed,
                                              int threads = 1);

BootstrapRun warp_speed_mc(const GeneratorSpec& generator, const NullModel& null_model,
                           const Statistic& statistic, int iterations, int n, double alpha,
                           std::uint64_t master_seed, int threads = 1);

struct TestOutcome {
  std::string statistic_name;
  double statistic = 0.0;
  double critical = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  bool reject = false;
  int failures_redrawn = 0;
};

double p_value_from_counts(int count_at_least, int replicates);

// Conventional per-dataset bootstrap test: fit once, then B independent
// replicates; p = (1 + #{T*_b >= T_obs}) / (B + 1), reject when p <= alpha.
// Throws FitNotConvergedError / ResamplingBudgetError.
TestOutcome full_bootstrap_test(const Sample& sample, const NullModel& null_model,
                                const Statistic& statistic, int replicates, double alpha,
                                std::uint64_t seed, int threads = 1);

}  // namespace sfgof
