// Acceptance suite: end-to-end checks of the statistics, the estimator, the
// resampling harness and the CLI at desk scale.  Each criterion prints one
// PASS/FAIL line; the process exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "sfgof/cf_stats.hpp"
#include "sfgof/classical_stats.hpp"
#include "sfgof/distributions.hpp"
#include "sfgof/estimation.hpp"
#include "sfgof/parallel.hpp"
#include "sfgof/quadrature.hpp"
#include "sfgof/resampling.hpp"
#include "sfgof/rng.hpp"

using namespace sfgof;

namespace {

std::string g_cli_path;
int g_threads = 0;

struct Criterion {
  int id;
  std::string label;
  std::function<bool(std::string&)> run;
};

std::vector<double> seeded_residuals(std::size_t n, std::uint64_t seed, double shift) {
  RngStream rng(seed);
  std::vector<double> r(n);
  for (double& v : r) v = rng.normal() + shift;
  return r;
}

const NullModel kExpNull{IneffFamily::exponential, Orientation::production};
const NullModel kGammaNull{IneffFamily::gamma2, Orientation::production};

GeneratorSpec generator(IneffSpec ineff) {
  return GeneratorSpec{ComposedSpec{NoiseSpec{1.0}, ineff, Orientation::production}, 1.0};
}

// --------------------------------------------------------------------------

bool criterion_closed_vs_quadrature(std::string& detail) {
  const std::size_t sizes[4] = {2, 5, 25, 100};
  const double lambdas[6] = {0.5, 1.0, 2.0, 3.0, 4.0, 5.0};
  double worst = 0.0;
  for (int set = 0; set < 50; ++set) {
    const std::size_t n = sizes[set % 4];
    const auto r = seeded_residuals(n, 1000 + static_cast<std::uint64_t>(set), -1.0);
    for (const double lambda : lambdas) {
      for (const CfVariant variant :
           {CfVariant::exp_production, CfVariant::exp_cost, CfVariant::gamma2}) {
        const double closed = t_stat_closed(r, {lambda, variant});
        const double quad = t_stat_quadrature(r, {lambda, variant});
        worst = std::max(worst, std::abs(closed - quad) / std::abs(quad));
      }
    }
  }
  std::ostringstream os;
  os << "max relative gap " << worst;
  detail = os.str();
  return worst < 1e-8;
}

bool criterion_kernels(std::string& detail) {
  struct Kind {
    LaplaceKernelKind kind;
    int power;
    bool cosine;
  };
  const Kind kinds[5] = {{LaplaceKernelKind::cos0, 0, true},
                         {LaplaceKernelKind::cos2, 2, true},
                         {LaplaceKernelKind::cos4, 4, true},
                         {LaplaceKernelKind::sin1, 1, false},
                         {LaplaceKernelKind::sin3, 3, false}};
  double worst = 0.0;
  for (const double z : {-2.0, -0.5, 0.5, 2.0}) {
    for (const double lambda : {0.5, 1.0, 5.0}) {
      for (const auto& k : kinds) {
        auto f = [&](double t) {
          const double trig = k.cosine ? std::cos(t * z) : std::sin(t * z);
          return std::pow(t, k.power) * trig * std::exp(-lambda * std::abs(t));
        };
        const double t_max = (95.0 + 10.0 * std::abs(z)) / lambda + 40.0;
        const double pts[3] = {-t_max, 0.0, t_max};
        const double oracle = integrate_or_throw(f, std::span<const double>(pts, 3),
                                                 QuadratureOptions{1e-15, 1e-12, 20000}, "kernel");
        const double closed = laplace_kernel(z, lambda, k.kind);
        worst = std::max(worst, std::abs(closed - oracle) / std::max(1.0, std::abs(closed)));
      }
    }
  }
  std::ostringstream os;
  os << "max deviation " << worst;
  detail = os.str();
  return worst < 1e-9;
}

bool criterion_limit_statistic(std::string& detail) {
  double worst3 = 0.0, worst4 = 0.0;
  for (int set = 0; set < 10; ++set) {
    const auto r = seeded_residuals(20, 400 + static_cast<std::uint64_t>(set), 0.0);
    const double lim = limit_stat(r);
    const double denom = std::max(lim, 1e-12);
    const double s3 = 1e9 / 4.0 * t_stat_closed(r, {1e3, CfVariant::exp_production});
    const double s4 = 1e12 / 4.0 * t_stat_closed(r, {1e4, CfVariant::exp_production});
    worst3 = std::max(worst3, std::abs(s3 - lim) / denom);
    worst4 = std::max(worst4, std::abs(s4 - lim) / denom);
  }
  std::ostringstream os;
  os << "relative gap " << worst3 << " at lambda=1e3, " << worst4 << " at 1e4";
  detail = os.str();
  return worst3 < 1e-2 && worst4 < 1e-4;
}

bool criterion_all_zero_identity(std::string& detail) {
  double worst = 0.0;
  for (const std::size_t n : {std::size_t{1}, std::size_t{7}, std::size_t{50}}) {
    const std::vector<double> zeros(n, 0.0);
    for (const double lambda : {0.5, 1.0, 2.0, 5.0}) {
      const double expected = 4.0 * static_cast<double>(n) / (lambda * lambda * lambda);
      const double got = t_stat_closed(zeros, {lambda, CfVariant::exp_production});
      worst = std::max(worst, std::abs(got - expected) / expected);
    }
  }
  std::ostringstream os;
  os << "max relative gap " << worst;
  detail = os.str();
  return worst <= 1e-12;
}

bool criterion_mle_consistency(std::string& detail) {
  const int datasets = 20;
  std::vector<double> err_beta(datasets), err_sigma(datasets), err_theta(datasets);
  std::vector<char> beats_truth(datasets, 0);
  const ComposedSpec spec{NoiseSpec{1.0}, ExponentialIneff{1.0}, Orientation::production};
  parallel_for(datasets, g_threads, [&](int i) {
    auto eps = sample_composed(spec, 2000, 3000 + static_cast<std::uint64_t>(i));
    for (double& e : eps) e += 0.5;
    const Sample s = Sample::location_model(eps);
    const SfmFit fit = fit_mle(s, kExpNull);
    err_beta[i] = std::abs(fit.beta[0] - 0.5);
    err_sigma[i] = std::abs(fit.sigma_v - 1.0);
    err_theta[i] = std::abs(fit.theta - 1.0);
    Eigen::VectorXd beta_true(1);
    beta_true << 0.5;
    beats_truth[i] = fit.loglik >= normexp_loglik(beta_true, 1.0, 1.0, s) ? 1 : 0;
  });
  const double mae_b = std::accumulate(err_beta.begin(), err_beta.end(), 0.0) / datasets;
  const double mae_s = std::accumulate(err_sigma.begin(), err_sigma.end(), 0.0) / datasets;
  const double mae_t = std::accumulate(err_theta.begin(), err_theta.end(), 0.0) / datasets;
  const bool all_beat = std::all_of(beats_truth.begin(), beats_truth.end(),
                                    [](char c) { return c == 1; });
  std::ostringstream os;
  os << "MAE beta " << mae_b << ", sigma_v " << mae_s << ", theta " << mae_t
     << (all_beat ? "; all fits beat the truth" : "; some fit fell below the truth");
  detail = os.str();
  return mae_b < 0.1 && mae_s < 0.1 && mae_t < 0.1 && all_beat;
}

bool criterion_exp_size(std::string& detail) {
  const BootstrapRun run = warp_speed_mc(generator(ExponentialIneff{1.0}), kExpNull,
                                         make_cf_statistic(0.5), 500, 100, 0.05, 20260501,
                                         g_threads);
  std::ostringstream os;
  os << "empirical size " << 100.0 * run.rejection_rate << "% (" << run.failures_redrawn
     << " redraws)";
  detail = os.str();
  return run.rejection_rate >= 0.02 && run.rejection_rate <= 0.09;
}

bool criterion_exp_power(std::string& detail) {
  const GeneratorSpec alt = generator(HalfNormalIneff{10.0});
  const BootstrapRun at100 =
      warp_speed_mc(alt, kExpNull, make_cf_statistic(5.0), 300, 100, 0.05, 777, g_threads);
  const BootstrapRun at500 =
      warp_speed_mc(alt, kExpNull, make_cf_statistic(5.0), 300, 500, 0.05, 778, g_threads);
  std::ostringstream os;
  os << "rejection " << 100.0 * at100.rejection_rate << "% at n=100, "
     << 100.0 * at500.rejection_rate << "% at n=500";
  detail = os.str();
  return at500.rejection_rate >= 0.90 &&
         at500.rejection_rate - at100.rejection_rate >= 0.20;
}

bool criterion_gamma_size(std::string& detail) {
  const BootstrapRun run = warp_speed_mc(generator(GammaIneff{2.0, 1.0}), kGammaNull,
                                         make_cf_statistic(0.5), 300, 100, 0.05, 515, g_threads);
  std::ostringstream os;
  os << "empirical size " << 100.0 * run.rejection_rate << "% (" << run.failures_redrawn
     << " redraws)";
  detail = os.str();
  return run.rejection_rate >= 0.015 && run.rejection_rate <= 0.095;
}

bool criterion_gamma_power(std::string& detail) {
  const BootstrapRun run = warp_speed_mc(generator(ExponentialIneff{10.0}), kGammaNull,
                                         make_cf_statistic(3.0), 300, 200, 0.05, 616, g_threads);
  std::ostringstream os;
  os << "rejection " << 100.0 * run.rejection_rate << "%";
  detail = os.str();
  return run.rejection_rate >= 0.75;
}

bool criterion_classical_golden(std::string& detail) {
  const ProbitVector one{{0.5}};
  const ProbitVector two{{0.25, 0.75}};
  const double checks[4] = {
      std::abs(ks_stat(one) - 0.5),
      std::abs(cvm_stat(one) - 1.0 / 12.0),
      std::abs(ks_stat(two) - 0.25),
      std::abs(cvm_stat(two) - 1.0 / 24.0),
  };
  const double worst = *std::max_element(checks, checks + 4);
  std::ostringstream os;
  os << "max absolute gap " << worst;
  detail = os.str();
  return worst <= 1e-15;
}

bool criterion_cli_determinism(std::string& detail) {
  if (g_cli_path.empty()) {
    detail = "no --cli path provided";
    return false;
  }
  const std::string base =
      " reproduce exp-size --only theta=1,n=100 --m 100 --seed 9 --out /tmp/sfgof_acc_";
  const int max_threads = hardware_threads();
  const int thread_counts[3] = {1, 4, max_threads};
  std::vector<std::string> contents;
  for (int i = 0; i < 3; ++i) {
    const std::string out = "/tmp/sfgof_acc_" + std::to_string(i) + ".csv";
    const std::string cmd = g_cli_path + " reproduce exp-size --only theta=1,n=100 --m 100"
                            " --seed 9 --threads " + std::to_string(thread_counts[i]) +
                            " --out " + out + " > /dev/null";
    if (std::system(cmd.c_str()) != 0) {
      detail = "cli invocation failed";
      return false;
    }
    std::ifstream f(out, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    contents.push_back(ss.str());
  }
  (void)base;
  const bool equal = contents[0] == contents[1] && contents[1] == contents[2] &&
                     !contents[0].empty();
  std::ostringstream os;
  os << "thread counts {1, 4, " << max_threads << "}, " << contents[0].size() << " bytes"
     << (equal ? ", byte-identical" : ", files differ");
  detail = os.str();
  return equal;
}

bool criterion_consistency_rate(std::string& detail) {
  const int seeds = 10;
  const int ns[3] = {200, 800, 3200};
  double alt_ratio[3] = {0, 0, 0};
  double null_ratio[3] = {0, 0, 0};
  const ComposedSpec alt{NoiseSpec{1.0}, HalfNormalIneff{5.0}, Orientation::production};
  const ComposedSpec nul{NoiseSpec{1.0}, ExponentialIneff{1.0}, Orientation::production};
  for (int which = 0; which < 2; ++which) {
    const ComposedSpec& spec = which == 0 ? alt : nul;
    double* out = which == 0 ? alt_ratio : null_ratio;
    for (int k = 0; k < 3; ++k) {
      std::vector<double> vals(seeds, 0.0);
      parallel_for(seeds, g_threads, [&](int s) {
        auto eps = sample_composed(spec, static_cast<std::size_t>(ns[k]),
                                   9000 + static_cast<std::uint64_t>(100 * which + 10 * k + s));
        for (double& e : eps) e += 1.0;
        const SfmFit fit = fit_mle(Sample::location_model(eps), kExpNull);
        vals[s] = t_stat_closed(fit.std_residuals, {2.0, CfVariant::exp_production}) / ns[k];
      });
      out[k] = std::accumulate(vals.begin(), vals.end(), 0.0) / seeds;
    }
  }
  std::ostringstream os;
  os << "T/n under the alternative: " << alt_ratio[0] << ", " << alt_ratio[1] << ", "
     << alt_ratio[2] << "; under the null: " << null_ratio[0] << ", " << null_ratio[1] << ", "
     << null_ratio[2];
  detail = os.str();
  // E[T/n] = Delta + C/n: the alternative sequence settles onto a positive
  // plateau (increments bounded by the previous increment up to 10-seed
  // noise, level bounded away from zero) while the null collapses ~ 1/n
  const bool stabilizes =
      std::abs(alt_ratio[2] - alt_ratio[1]) <=
          std::max(std::abs(alt_ratio[1] - alt_ratio[0]), 0.25 * alt_ratio[1]) &&
      alt_ratio[2] >= 0.5 * alt_ratio[0];
  const bool separated = alt_ratio[2] > 5.0 * null_ratio[2];
  const bool null_shrinks = null_ratio[2] <= 0.3 * null_ratio[0];
  return stabilizes && separated && null_shrinks;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) g_cli_path = argv[++i];
    else if (arg == "--threads" && i + 1 < argc) g_threads = std::atoi(argv[++i]);
    else if (arg == "--only" && i + 1 < argc) only.push_back(std::atoi(argv[++i]));
  }

  const std::vector<Criterion> criteria = {
      {1, "closed-form statistics match the quadrature oracle", criterion_closed_vs_quadrature},
      {2, "weighted trigonometric integrals match their closed forms", criterion_kernels},
      {3, "large-lambda limit of the scaled statistic", criterion_limit_statistic},
      {4, "degenerate residual identity T = 4n/lambda^3", criterion_all_zero_identity},
      {5, "maximum likelihood consistency at n=2000", criterion_mle_consistency},
      {6, "empirical size, exponential null (theta=1, n=100, lambda=0.5)", criterion_exp_size},
      {7, "power against the half-normal alternative (sigma_u=10)", criterion_exp_power},
      {8, "empirical size, gamma null (theta=1, n=100, lambda=0.5)", criterion_gamma_size},
      {9, "power of the gamma test against the exponential (theta=10)", criterion_gamma_power},
      {10, "KS and CvM golden micro-values", criterion_classical_golden},
      {11, "byte-identical study output across thread counts", criterion_cli_determinism},
      {12, "statistic scale separates alternative from null as n grows", criterion_consistency_rate},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2d. %s (%s; %.1fs)\n", ok ? "PASS" : "FAIL", c.id, c.label.c_str(),
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
