#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "sfgof/cf_stats.hpp"
#include "sfgof/distributions.hpp"
#include "sfgof/quadrature.hpp"
#include "sfgof/rng.hpp"

using namespace sfgof;

namespace {

std::vector<double> seeded_residuals(std::size_t n, std::uint64_t seed, double shift = -1.0) {
  RngStream rng(seed);
  std::vector<double> r(n);
  for (double& v : r) v = rng.normal() + shift;
  return r;
}

}  // namespace

TEST_CASE("ecf parts: point mass, odd symmetry, direct evaluation") {
  const std::vector<double> zero{0.0};
  const auto p0 = ecf_parts(zero, 3.7);
  CHECK(p0.c == doctest::Approx(1.0));
  CHECK(p0.s == doctest::Approx(0.0));

  const std::vector<double> sym{1.4, -1.4};
  CHECK(ecf_parts(sym, 2.1).s == doctest::Approx(0.0).epsilon(1e-15));

  const std::vector<double> two{1.0, 2.0};
  const auto p = ecf_parts(two, 0.5);
  CHECK(p.c == doctest::Approx(0.5 * (std::cos(0.5) + std::cos(1.0))).epsilon(1e-15));
  CHECK(p.s == doctest::Approx(0.5 * (std::sin(0.5) + std::sin(1.0))).epsilon(1e-15));
}

TEST_CASE("d statistic: zero at t = 0, linear for degenerate residuals, reference point") {
  const std::vector<double> r{0.4, -1.2, 0.9};
  for (const CfVariant v : {CfVariant::exp_production, CfVariant::exp_cost, CfVariant::gamma2})
    CHECK(d_statistic(r, 0.0, v) == doctest::Approx(0.0).epsilon(1e-15));

  const std::vector<double> zeros(5, 0.0);
  for (const double t : {0.3, 1.0, 4.2})
    CHECK(d_statistic(zeros, t, CfVariant::exp_production) == doctest::Approx(t).epsilon(1e-15));

  const std::vector<double> single{-1.0};
  CHECK(d_statistic(single, 1.0, CfVariant::exp_production) ==
        doctest::Approx(-0.30116867893975674).epsilon(1e-14));
  CHECK(d_statistic(single, 1.0, CfVariant::exp_cost) ==
        doctest::Approx(std::sin(-1.0) - std::cos(-1.0)).epsilon(1e-14));
  CHECK(d_statistic(single, 2.0, CfVariant::gamma2) ==
        doctest::Approx((1.0 - 4.0) * std::sin(-2.0) + 4.0 * std::cos(-2.0)).epsilon(1e-14));
}

TEST_CASE("t statistic: degenerate residuals have closed values") {
  const std::vector<double> zeros(7, 0.0);
  // D(t) = t integrates to 4 n / lambda^3; the gamma variant has D(t) = 2t
  for (const double lambda : {0.5, 1.0, 2.0}) {
    const double expect_exp = 4.0 * 7.0 / (lambda * lambda * lambda);
    CHECK(t_stat_closed(zeros, {lambda, CfVariant::exp_production}) ==
          doctest::Approx(expect_exp).epsilon(1e-12));
    CHECK(t_stat_closed(zeros, {lambda, CfVariant::gamma2}) ==
          doctest::Approx(4.0 * expect_exp).epsilon(1e-12));
  }
  const std::vector<double> zeros3(3, 0.0);
  CHECK(t_stat_closed(zeros3, {2.0, CfVariant::exp_production}) ==
        doctest::Approx(1.5).epsilon(1e-12));
  CHECK(t_stat_quadrature(zeros3, {2.0, CfVariant::exp_production}) ==
        doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("t statistic: closed form matches quadrature for every variant") {
  const double lambdas[6] = {0.5, 1.0, 2.0, 3.0, 4.0, 5.0};
  for (const std::size_t n : {std::size_t{2}, std::size_t{5}, std::size_t{25}}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto r = seeded_residuals(n, seed * 13);
      for (const double lambda : lambdas) {
        for (const CfVariant v :
             {CfVariant::exp_production, CfVariant::exp_cost, CfVariant::gamma2}) {
          const double closed = t_stat_closed(r, {lambda, v});
          const double quad = t_stat_quadrature(r, {lambda, v});
          CHECK(std::abs(closed - quad) <= 1e-8 * std::abs(quad));
        }
      }
    }
  }
}

TEST_CASE("t statistic: cost variant equals production on negated residuals") {
  const auto r = seeded_residuals(12, 99);
  auto neg = r;
  for (double& v : neg) v = -v;
  for (const double lambda : {0.5, 2.0}) {
    CHECK(t_stat_closed(r, {lambda, CfVariant::exp_cost}) ==
          t_stat_closed(neg, {lambda, CfVariant::exp_production}));
  }
}

TEST_CASE("t statistic: nonnegative on random residual sets") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = seeded_residuals(8, seed);
    for (const CfVariant v : {CfVariant::exp_production, CfVariant::exp_cost, CfVariant::gamma2})
      CHECK(t_stat_closed(r, {1.3, v}) >= -1e-12);
  }
}

TEST_CASE("t statistic: symmetric residual pair has an even integrand") {
  const std::vector<double> r{0.8, -0.8};
  const double lambda = 1.0;
  auto integrand = [&](double t) {
    const double d = d_statistic(r, t, CfVariant::exp_production);
    return d * d * std::exp(-lambda * std::abs(t));
  };
  const auto left = integrate_adaptive(integrand, -40.0, 0.0, QuadratureOptions{1e-14, 1e-12, 4000});
  const auto right = integrate_adaptive(integrand, 0.0, 40.0, QuadratureOptions{1e-14, 1e-12, 4000});
  REQUIRE(left.converged);
  REQUIRE(right.converged);
  CHECK(left.value == doctest::Approx(right.value).epsilon(1e-10));
}

TEST_CASE("limit statistic: exact cases and the large-lambda limit") {
  const std::vector<double> minus_one(6, -1.0);
  CHECK(limit_stat(minus_one) == doctest::Approx(0.0).epsilon(1e-15));
  const std::vector<double> zeros(4, 0.0);
  CHECK(limit_stat(zeros) == doctest::Approx(4.0).epsilon(1e-15));

  const auto r = seeded_residuals(20, 7, 0.0);
  const double lim = limit_stat(r);
  double prev_err = 1e300;
  for (const double lambda : {1e2, 1e3, 1e4}) {
    const double scaled =
        lambda * lambda * lambda / 4.0 * t_stat_closed(r, {lambda, CfVariant::exp_production});
    const double rel = std::abs(scaled - lim) / std::max(lim, 1e-12);
    CHECK(rel < prev_err);  // error shrinks as lambda grows
    if (lambda >= 1e3) CHECK(rel < 1e-3);
    prev_err = rel;
  }
}

TEST_CASE("laplace kernels: values at the origin and spot checks") {
  for (const double lambda : {0.5, 1.0, 5.0}) {
    CHECK(laplace_kernel(0.0, lambda, LaplaceKernelKind::cos0) ==
          doctest::Approx(2.0 / lambda).epsilon(1e-14));
    CHECK(laplace_kernel(0.0, lambda, LaplaceKernelKind::cos2) ==
          doctest::Approx(4.0 / std::pow(lambda, 3)).epsilon(1e-14));
    CHECK(laplace_kernel(0.0, lambda, LaplaceKernelKind::cos4) ==
          doctest::Approx(48.0 / std::pow(lambda, 5)).epsilon(1e-14));
    CHECK(laplace_kernel(0.0, lambda, LaplaceKernelKind::sin1) == 0.0);
    CHECK(laplace_kernel(0.0, lambda, LaplaceKernelKind::sin3) == 0.0);
  }
  CHECK(laplace_kernel(1.0, 2.0, LaplaceKernelKind::cos0) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("laplace kernels: quadrature oracle on the (z, lambda) grid") {
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
  for (const double z : {-2.0, -0.5, 0.5, 2.0}) {
    for (const double lambda : {0.5, 1.0, 5.0}) {
      for (const auto& k : kinds) {
        auto integrand = [&](double t) {
          const double trig = k.cosine ? std::cos(t * z) : std::sin(t * z);
          return std::pow(t, k.power) * trig * std::exp(-lambda * std::abs(t));
        };
        const double t_max = (90.0 + 10.0 * std::abs(z)) / lambda + 40.0;
        const double pts[3] = {-t_max, 0.0, t_max};
        const double oracle =
            integrate_or_throw(integrand, std::span<const double>(pts, 3),
                               QuadratureOptions{1e-15, 1e-12, 20000}, "kernel oracle");
        const double closed = laplace_kernel(z, lambda, k.kind);
        CHECK(std::abs(closed - oracle) <= 1e-9 * std::max(1.0, std::abs(closed)));
      }
    }
  }
}

TEST_CASE("generic cf distance: degenerate handle gives zero") {
  const auto r = seeded_residuals(40, 3);
  auto empirical = [&](double t) {
    const auto p = ecf_parts(r, t);
    return std::complex<double>(p.c, p.s);
  };
  CHECK(generic_cf_distance(r, empirical, 1.0) < 1e-6);
}

TEST_CASE("generic cf distance: single observation against a point mass") {
  const double lambda = 1.3, robs = 0.7, s = -0.4;
  const std::vector<double> r{robs};
  auto point_mass = [&](double t) {
    return std::complex<double>(std::cos(t * s), std::sin(t * s));
  };
  const double closed = 2.0 * (2.0 / lambda - 2.0 * lambda / ((robs - s) * (robs - s) + lambda * lambda));
  CHECK(generic_cf_distance(r, point_mass, lambda) == doctest::Approx(closed).epsilon(1e-9));
}

TEST_CASE("generic cf distance: small under the true law, grows under a mismatch") {
  const ComposedSpec null_spec{NoiseSpec{1.0}, ExponentialIneff{1.0}, Orientation::production};
  auto null_handle = [&](double t) { return null_cf(t, null_spec); };

  double worst_null = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto draws = sample_composed(null_spec, 10000, seed);
    worst_null = std::max(worst_null, generic_cf_distance(draws, null_handle, 1.0));
  }

  const ComposedSpec alt_spec{NoiseSpec{1.0}, HalfNormalIneff{3.0}, Orientation::production};
  double t_half = 0.0, t_full = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto half = sample_composed(alt_spec, 5000, 100 + seed);
    const auto full = sample_composed(alt_spec, 10000, 200 + seed);
    t_half += generic_cf_distance(half, null_handle, 1.0) / 5.0;
    t_full += generic_cf_distance(full, null_handle, 1.0) / 5.0;
  }
  CHECK(t_full > 10.0 * worst_null);       // mismatch dominates sampling noise
  const double growth = t_full / t_half;   // ~ linear in n under the alternative
  CHECK(growth > 1.4);
  CHECK(growth < 2.6);
}

TEST_CASE("empirical D_n stays within the sampling band under the null") {
  // pure standardized inefficiency: residuals -u with u ~ Exp(1); the
  // population identity S(t) + t C(t) = 0 bounds the empirical version by
  // roughly (1 + |t|)/sqrt(n)
  const std::size_t n = 10000;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RngStream rng(5000 + seed);
    std::vector<double> r(n);
    for (double& v : r) v = -rng.exponential(1.0);
    for (double t = -5.0; t <= 5.0; t += 0.25) {
      const double bound = 4.0 / std::sqrt(static_cast<double>(n)) * (1.0 + std::abs(t));
      CHECK(std::abs(d_statistic(r, t, CfVariant::exp_production)) <= bound);
    }
  }
}

TEST_CASE("invalid configurations are rejected") {
  const std::vector<double> r{1.0, 2.0};
  CHECK_THROWS_AS((void)t_stat_closed(r, {0.0, CfVariant::exp_production}), std::invalid_argument);
  CHECK_THROWS_AS((void)laplace_kernel(1.0, -1.0, LaplaceKernelKind::cos0), std::invalid_argument);
  const std::vector<double> empty;
  CHECK_THROWS_AS((void)ecf_parts(empty, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)limit_stat(empty), std::invalid_argument);
}
