#include "sfgof/resampling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>

#include "sfgof/cf_stats.hpp"
#include "sfgof/classical_stats.hpp"
#include "sfgof/parallel.hpp"

namespace sfgof {

namespace {

constexpr int kMaxAttempts = 32;

// stream keys: one sub-stream per (iteration, phase, redraw attempt)
enum class Phase : std::uint64_t { data = 0, boot = 1 };

std::uint64_t phase_key(Phase phase, int attempt) {
  return (static_cast<std::uint64_t>(phase) << 32) | static_cast<std::uint64_t>(attempt);
}

CfVariant variant_for(const NullModel& model) {
  if (model.family == IneffFamily::gamma2) {
    if (model.orientation == Orientation::cost)
      throw std::invalid_argument("gamma(k=2) statistic is defined for the production orientation");
    return CfVariant::gamma2;
  }
  return model.orientation == Orientation::production ? CfVariant::exp_production
                                                      : CfVariant::exp_cost;
}

}  // namespace

std::string Statistic::display_name() const {
  if (std::isnan(lambda)) return name;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s[lambda=%g]", name.c_str(), lambda);
  return buf;
}

Statistic make_cf_statistic(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("cf statistic requires lambda > 0");
  Statistic s;
  s.name = "T";
  s.lambda = lambda;
  s.eval = [lambda](const SfmFit& fit) {
    const CfStatConfig config{lambda, variant_for(fit.null_model)};
    return t_stat_closed(fit.std_residuals, config);
  };
  return s;
}

Statistic make_ks_statistic() {
  Statistic s;
  s.name = "KS";
  s.eval = [](const SfmFit& fit) {
    return ks_stat(probit_from_residuals(fit.residuals, fit.fitted_spec()));
  };
  return s;
}

Statistic make_cvm_statistic() {
  Statistic s;
  s.name = "CvM";
  s.eval = [](const SfmFit& fit) {
    return cvm_stat(probit_from_residuals(fit.residuals, fit.fitted_spec()));
  };
  return s;
}

std::vector<double> draw_bootstrap_errors(const SfmFit& fit, std::size_t n, RngStream& rng) {
  return sample_composed(fit.fitted_spec(), n, rng);
}

namespace {

Sample bootstrap_sample(const SfmFit& fit, const Eigen::MatrixXd& x, RngStream& rng) {
  const std::size_t n = static_cast<std::size_t>(x.rows());
  const std::vector<double> errors = draw_bootstrap_errors(fit, n, rng);
  Sample s;
  s.x = x;
  s.y = x.cols() > 0 ? (x * fit.beta).eval() : Eigen::VectorXd::Zero(x.rows()).eval();
  for (Eigen::Index j = 0; j < s.y.size(); ++j) s.y[j] += errors[static_cast<std::size_t>(j)];
  return s;
}

SfmFit bootstrap_refit(const SfmFit& fit, const Eigen::MatrixXd& x, RngStream& rng) {
  const Sample s = bootstrap_sample(fit, x, rng);
  FitOptions options;
  options.warm = WarmStart{fit.beta, fit.sigma_v, fit.theta};
  return fit_mle(s, fit.null_model, options);
}

}  // namespace

double single_bootstrap(const SfmFit& fit, const Eigen::MatrixXd& x, const Statistic& statistic,
                        std::uint64_t seed) {
  RngStream rng(seed);
  const SfmFit refit = bootstrap_refit(fit, x, rng);
  if (!refit.converged)
    throw BootstrapRefitError("bootstrap refit did not converge (seed " + std::to_string(seed) +
                              ")");
  return statistic.eval(refit);
}

double critical_point(std::vector<double> boot_stats, double alpha) {
  const int m = static_cast<int>(boot_stats.size());
  if (m < 1) throw std::invalid_argument("critical_point requires at least one statistic");
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  int index = m - static_cast<int>(std::floor(alpha * m + 1e-9));  // 1-based
  index = std::max(1, std::min(m, index));
  std::nth_element(boot_stats.begin(), boot_stats.begin() + (index - 1), boot_stats.end());
  return boot_stats[static_cast<std::size_t>(index - 1)];
}

std::vector<BootstrapRun> warp_speed_mc_multi(const GeneratorSpec& generator,
                                              const NullModel& null_model,
                                              std::span<const Statistic> statistics, int iterations,
                                              int n, double alpha, std::uint64_t master_seed,
                                              int threads) {
  validate(generator.error);
  if (iterations < 1) throw std::invalid_argument("warp_speed_mc requires at least one iteration");
  if (n < 3) throw std::invalid_argument("warp_speed_mc requires n >= 3");
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  if (statistics.empty()) throw std::invalid_argument("warp_speed_mc requires a statistic");

  const std::size_t n_stats = statistics.size();
  std::vector<std::vector<double>> t_obs(n_stats, std::vector<double>(iterations));
  std::vector<std::vector<double>> t_boot(n_stats, std::vector<double>(iterations));
  std::vector<int> redraws(iterations, 0);
  std::vector<char> ok(iterations, 0);

  parallel_for(iterations, threads, [&](int m) {
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      RngStream data_rng = derive_stream(master_seed, static_cast<std::uint64_t>(m),
                                         phase_key(Phase::data, attempt));
      const std::vector<double> errors = sample_composed(generator.error, n, data_rng);
      std::vector<double> y(errors.size());
      for (std::size_t j = 0; j < errors.size(); ++j) y[j] = generator.intercept + errors[j];
      const Sample sample = Sample::location_model(y);

      const SfmFit fit = fit_mle(sample, null_model);
      if (!fit.converged) continue;

      RngStream boot_rng = derive_stream(master_seed, static_cast<std::uint64_t>(m),
                                         phase_key(Phase::boot, attempt));
      const SfmFit refit = bootstrap_refit(fit, sample.x, boot_rng);
      if (!refit.converged) continue;

      for (std::size_t k = 0; k < n_stats; ++k) {
        t_obs[k][static_cast<std::size_t>(m)] = statistics[k].eval(fit);
        t_boot[k][static_cast<std::size_t>(m)] = statistics[k].eval(refit);
      }
      redraws[static_cast<std::size_t>(m)] = attempt;
      ok[static_cast<std::size_t>(m)] = 1;
      return;
    }
    redraws[static_cast<std::size_t>(m)] = kMaxAttempts;
  });

  int total_redraws = 0;
  bool any_failed = false;
  for (int m = 0; m < iterations; ++m) {
    total_redraws += redraws[static_cast<std::size_t>(m)];
    if (!ok[static_cast<std::size_t>(m)]) any_failed = true;
  }
  if (any_failed || total_redraws > 0.02 * iterations)
    throw ResamplingBudgetError("Monte Carlo redraw budget exceeded: " +
                                std::to_string(total_redraws) + " redraws in " +
                                std::to_string(iterations) + " iterations");

  std::vector<BootstrapRun> runs(n_stats);
  for (std::size_t k = 0; k < n_stats; ++k) {
    BootstrapRun& run = runs[k];
    run.t_obs = std::move(t_obs[k]);
    run.t_boot = std::move(t_boot[k]);
    run.alpha = alpha;
    run.failures_redrawn = total_redraws;
    run.critical = critical_point(run.t_boot, alpha);
    int rejections = 0;
    for (const double t : run.t_obs)
      if (t > run.critical) ++rejections;
    run.rejection_rate = static_cast<double>(rejections) / static_cast<double>(iterations);
  }
  return runs;
}

BootstrapRun warp_speed_mc(const GeneratorSpec& generator, const NullModel& null_model,
                           const Statistic& statistic, int iterations, int n, double alpha,
                           std::uint64_t master_seed, int threads) {
  const Statistic stats[1] = {statistic};
  return warp_speed_mc_multi(generator, null_model, std::span<const Statistic>(stats, 1),
                             iterations, n, alpha, master_seed, threads)[0];
}

double p_value_from_counts(int count_at_least, int replicates) {
  return (1.0 + static_cast<double>(count_at_least)) / (static_cast<double>(replicates) + 1.0);
}

TestOutcome full_bootstrap_test(const Sample& sample, const NullModel& null_model,
                                const Statistic& statistic, int replicates, double alpha,
                                std::uint64_t seed, int threads) {
  if (replicates < 199) throw std::invalid_argument("full bootstrap requires B >= 199");
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");

  const SfmFit fit = fit_mle(sample, null_model);
  if (!fit.converged)
    throw FitNotConvergedError("maximum likelihood fit of the observed data did not converge");

  TestOutcome outcome;
  outcome.statistic_name = statistic.display_name();
  outcome.statistic = statistic.eval(fit);
  outcome.alpha = alpha;

  std::vector<double> t_boot(replicates);
  std::vector<int> redraws(replicates, 0);
  std::vector<char> ok(replicates, 0);

  parallel_for(replicates, threads, [&](int b) {
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      RngStream rng = derive_stream(seed, static_cast<std::uint64_t>(b),
                                    phase_key(Phase::boot, attempt));
      const SfmFit refit = bootstrap_refit(fit, sample.x, rng);
      if (!refit.converged) continue;
      t_boot[static_cast<std::size_t>(b)] = statistic.eval(refit);
      redraws[static_cast<std::size_t>(b)] = attempt;
      ok[static_cast<std::size_t>(b)] = 1;
      return;
    }
    redraws[static_cast<std::size_t>(b)] = kMaxAttempts;
  });

  int total_redraws = 0;
  bool any_failed = false;
  for (int b = 0; b < replicates; ++b) {
    total_redraws += redraws[static_cast<std::size_t>(b)];
    if (!ok[static_cast<std::size_t>(b)]) any_failed = true;
  }
  if (any_failed || total_redraws > 0.02 * replicates)
    throw ResamplingBudgetError("bootstrap redraw budget exceeded: " +
                                std::to_string(total_redraws) + " redraws in " +
                                std::to_string(replicates) + " replicates");

  int count_at_least = 0;
  for (const double t : t_boot)
    if (t >= outcome.statistic) ++count_at_least;
  outcome.p_value = p_value_from_counts(count_at_least, replicates);
  outcome.critical = critical_point(t_boot, alpha);
  outcome.reject = outcome.p_value <= alpha;
  outcome.failures_redrawn = total_redraws;
  return outcome;
}

}  // namespace sfgof
