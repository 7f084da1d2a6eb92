#include "sfgof/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sfgof/quadrature.hpp"
#include "sfgof/rng.hpp"
#include "sfgof/special.hpp"

namespace sfgof {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct IneffValidator {
  void operator()(const ExponentialIneff& e) const {
    if (!(e.theta > 0.0)) throw std::invalid_argument("exponential inefficiency requires theta > 0");
  }
  void operator()(const GammaIneff& g) const {
    if (!(g.kappa > 0.0) || !(g.theta > 0.0))
      throw std::invalid_argument("gamma inefficiency requires kappa > 0 and theta > 0");
  }
  void operator()(const HalfNormalIneff& h) const {
    if (!(h.sigma_u > 0.0)) throw std::invalid_argument("half-normal inefficiency requires sigma_u > 0");
  }
};

double orientation_sign(Orientation o) {
  return o == Orientation::production ? 1.0 : -1.0;
}

}  // namespace

void validate(const ComposedSpec& spec) {
  if (!(spec.noise.sigma_v > 0.0)) throw std::invalid_argument("noise requires sigma_v > 0");
  std::visit(IneffValidator{}, spec.ineff);
}

double ineff_mean(const IneffSpec& ineff) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ExponentialIneff>) return v.theta;
        if constexpr (std::is_same_v<T, GammaIneff>) return v.kappa * v.theta;
        if constexpr (std::is_same_v<T, HalfNormalIneff>) return v.sigma_u * std::sqrt(2.0 / kPi);
      },
      ineff);
}

double ineff_variance(const IneffSpec& ineff) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ExponentialIneff>) return v.theta * v.theta;
        if constexpr (std::is_same_v<T, GammaIneff>) return v.kappa * v.theta * v.theta;
        if constexpr (std::is_same_v<T, HalfNormalIneff>)
          return v.sigma_u * v.sigma_u * (1.0 - 2.0 / kPi);
      },
      ineff);
}

double composed_mean(const ComposedSpec& spec) {
  // E eps = -E u (production) or +E u (cost); the noise is zero-mean
  return (spec.orientation == Orientation::production ? -1.0 : 1.0) * ineff_mean(spec.ineff);
}

double composed_variance(const ComposedSpec& spec) {
  return spec.noise.sigma_v * spec.noise.sigma_v + ineff_variance(spec.ineff);
}

std::vector<double> sample_composed(const ComposedSpec& spec, std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  return sample_composed(spec, n, rng);
}

std::vector<double> sample_composed(const ComposedSpec& spec, std::size_t n, RngStream& rng) {
  validate(spec);
  if (n < 1) throw std::invalid_argument("sample_composed requires n >= 1");
  const double sv = spec.noise.sigma_v;
  const double sign = spec.orientation == Orientation::production ? -1.0 : 1.0;

  std::vector<double> eps(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double v = sv * rng.normal();
    const double u = std::visit(
        [&rng](const auto& iv) -> double {
          using T = std::decay_t<decltype(iv)>;
          if constexpr (std::is_same_v<T, ExponentialIneff>) return rng.exponential(iv.theta);
          if constexpr (std::is_same_v<T, GammaIneff>) return rng.gamma(iv.kappa, iv.theta);
          if constexpr (std::is_same_v<T, HalfNormalIneff>) return rng.half_normal(iv.sigma_u);
        },
        spec.ineff);
    eps[j] = v + sign * u;
  }
  return eps;
}

namespace {

// log[ Phi(a) exp(eps/theta + sigma_v^2/(2 theta^2)) ] with a = -eps/sigma_v -
// sigma_v/theta, the product every normal/exponential and normal/gamma closed
// form is built from.  Added up naively the two factors overflow in opposite
// directions; written as below the huge parts cancel in exact algebra:
// with r = sigma_v/theta,
//   eps/theta + r^2/2 = -r (a + r/2)
//   -a^2/2 + eps/theta + r^2/2 = -(eps/sigma_v)^2 / 2.
double log_phi_times_exp(double eps, double sigma_v, double theta) {
  const double r = sigma_v / theta;
  const double a = -eps / sigma_v - r;
  if (a >= -10.0) return std::log(0.5 * std::erfc(-a * kInvSqrt2)) - r * (a + 0.5 * r);
  const double z = eps / sigma_v;
  return -0.5 * z * z - std::log(-a) - kLogSqrt2Pi + std::log(detail::phi_tail_series(a));
}

void check_scales(double sigma_v, double theta, const char* what) {
  if (!(sigma_v > 0.0) || !(theta > 0.0))
    throw std::invalid_argument(std::string(what) + " requires sigma_v > 0 and theta > 0");
}

}  // namespace

double normexp_log_density(double eps, double sigma_v, double theta) {
  check_scales(sigma_v, theta, "normexp density");
  return log_phi_times_exp(eps, sigma_v, theta) - std::log(theta);
}

double normexp_density(double eps, double sigma_v, double theta) {
  return std::exp(normexp_log_density(eps, sigma_v, theta));
}

double normexp_cdf(double eps, double sigma_v, double theta) {
  check_scales(sigma_v, theta, "normexp cdf");
  const double f = norm_cdf(eps / sigma_v) + std::exp(log_phi_times_exp(eps, sigma_v, theta));
  return std::min(1.0, std::max(0.0, f));
}

double normgamma2_density(double eps, double sigma_v, double theta) {
  check_scales(sigma_v, theta, "normgamma2 density");
  const double mu = -eps - sigma_v * sigma_v / theta;
  // E[X 1{X>0}] for X ~ N(mu, s^2) is mu Phi(mu/s) + s phi(mu/s), and
  // exp(c) phi(mu/s) collapses to phi(eps/s) exactly
  const double t1 = mu * std::exp(log_phi_times_exp(eps, sigma_v, theta));
  const double t2 = sigma_v * norm_pdf(eps / sigma_v);
  return std::max(0.0, (t1 + t2) / (theta * theta));
}

double normgamma2_cdf(double eps, double sigma_v, double theta) {
  check_scales(sigma_v, theta, "normgamma2 cdf");
  const double mu = -eps - sigma_v * sigma_v / theta;
  const double t1 = (1.0 + mu / theta) * std::exp(log_phi_times_exp(eps, sigma_v, theta));
  const double t2 = (sigma_v / theta) * norm_pdf(eps / sigma_v);
  const double f = norm_cdf(eps / sigma_v) + t1 + t2;
  return std::min(1.0, std::max(0.0, f));
}

namespace {

// Integrand setup for the convolution f_eps(eps) = int f_v(eps -+ u) f_u(u) du
// after substituting u = scale * s, where `scale` is the natural scale of the
// inefficiency law.  The returned breakpoints pin panels around s0, the point
// where the normal factor peaks, so the integrator cannot converge on a flat
// zero region and miss a remote spike.
struct ConvolutionGrid {
  std::vector<double> points;
  double scale = 1.0;
};

ConvolutionGrid convolution_grid(double eps, double sigma_v, double scale, double sign,
                                 double s_decay_limit) {
  ConvolutionGrid grid;
  grid.scale = scale;
  const double s0 = -sign * eps / scale;      // normal argument zero
  const double w = sigma_v / scale;           // normal width in s units
  const double s_max = std::max(s_decay_limit, s0 + 40.0 * w + s_decay_limit);

  std::vector<double> pts = {0.0, s_max};
  for (double k : {-30.0, -10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0, 30.0}) {
    const double p = s0 + k * w;
    if (p > 0.0 && p < s_max) pts.push_back(p);
  }
  for (double p : {1.0, 5.0, 15.0, 40.0}) {
    if (p < s_max) pts.push_back(p);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  grid.points = std::move(pts);
  return grid;
}

const QuadratureOptions kDensityQuad{1e-300, 1e-11, 4000};

}  // namespace

double composed_density_quadrature(double eps, const ComposedSpec& spec) {
  validate(spec);
  const double sv = spec.noise.sigma_v;
  const double sign = orientation_sign(spec.orientation);  // v = eps + sign * u

  return std::visit(
      [&](const auto& iv) -> double {
        using T = std::decay_t<decltype(iv)>;
        if constexpr (std::is_same_v<T, ExponentialIneff>) {
          const auto grid = convolution_grid(eps, sv, iv.theta, sign, 60.0);
          auto f = [&](double s) {
            return norm_pdf((eps + sign * iv.theta * s) / sv) / sv * std::exp(-s);
          };
          return integrate_or_throw(f, grid.points, kDensityQuad, "composed density (exponential)");
        } else if constexpr (std::is_same_v<T, GammaIneff>) {
          const double lg = std::lgamma(iv.kappa);
          if (iv.kappa >= 1.0) {
            const auto grid = convolution_grid(eps, sv, iv.theta, sign, 60.0 + 10.0 * iv.kappa);
            auto f = [&](double s) {
              const double fu = std::pow(s, iv.kappa - 1.0) * std::exp(-s - lg);
              return norm_pdf((eps + sign * iv.theta * s) / sv) / sv * fu;
            };
            return integrate_or_throw(f, grid.points, kDensityQuad, "composed density (gamma)");
          }
          // kappa < 1: s^{kappa-1} is singular at 0; substitute s = wv^{1/kappa},
          // which absorbs the singularity exactly: ds s^{kappa-1}/Gamma(kappa)
          // = dwv / Gamma(kappa+1).
          const auto sgrid = convolution_grid(eps, sv, iv.theta, sign, 60.0);
          std::vector<double> wpts;
          wpts.reserve(sgrid.points.size());
          for (double s : sgrid.points) wpts.push_back(std::pow(s, iv.kappa));
          std::sort(wpts.begin(), wpts.end());
          wpts.erase(std::unique(wpts.begin(), wpts.end()), wpts.end());
          const double inv_kappa = 1.0 / iv.kappa;
          const double lg1 = std::lgamma(iv.kappa + 1.0);
          auto f = [&](double wv) {
            const double s = std::pow(wv, inv_kappa);
            return norm_pdf((eps + sign * iv.theta * s) / sv) / sv * std::exp(-s - lg1);
          };
          return integrate_or_throw(f, wpts, kDensityQuad, "composed density (gamma, kappa < 1)");
        } else {
          static_assert(std::is_same_v<T, HalfNormalIneff>);
          const auto grid = convolution_grid(eps, sv, iv.sigma_u, sign, 40.0);
          auto f = [&](double s) {
            return norm_pdf((eps + sign * iv.sigma_u * s) / sv) / sv * 2.0 * norm_pdf(s);
          };
          return integrate_or_throw(f, grid.points, kDensityQuad, "composed density (half-normal)");
        }
      },
      spec.ineff);
}

double composed_cdf_quadrature(double eps, const ComposedSpec& spec) {
  validate(spec);
  const double m = composed_mean(spec);
  const double sd = std::sqrt(composed_variance(spec));
  const double lo = std::min(m - 50.0 * sd, eps - 10.0 * sd);
  if (eps <= lo) return 0.0;

  std::vector<double> pts = {lo, eps};
  for (double k : {-20.0, -8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0}) {
    const double p = m + k * sd;
    if (p > lo && p < eps) pts.push_back(p);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  auto f = [&](double x) { return composed_density_quadrature(x, spec); };
  const QuadratureOptions opt{1e-12, 1e-9, 600};
  const double v = integrate_or_throw(f, pts, opt, "composed cdf");
  return std::min(1.0, std::max(0.0, v));
}

double composed_cdf(double eps, const ComposedSpec& spec) {
  validate(spec);
  const double sv = spec.noise.sigma_v;
  const bool cost = spec.orientation == Orientation::cost;
  // cost orientation by reflection: v symmetric gives P(v+u <= e) = 1 - P(v-u <= -e)
  const double e = cost ? -eps : eps;

  if (const auto* ex = std::get_if<ExponentialIneff>(&spec.ineff)) {
    const double f = normexp_cdf(e, sv, ex->theta);
    return cost ? 1.0 - f : f;
  }
  if (const auto* g = std::get_if<GammaIneff>(&spec.ineff)) {
    if (g->kappa == 1.0) {
      const double f = normexp_cdf(e, sv, g->theta);
      return cost ? 1.0 - f : f;
    }
    if (g->kappa == 2.0) {
      const double f = normgamma2_cdf(e, sv, g->theta);
      return cost ? 1.0 - f : f;
    }
  }
  return composed_cdf_quadrature(eps, spec);
}

std::complex<double> null_cf(double t, const ComposedSpec& spec) {
  validate(spec);
  const double sv = spec.noise.sigma_v;
  const std::complex<double> phi_v(std::exp(-0.5 * sv * sv * t * t), 0.0);

  const std::complex<double> phi_u = std::visit(
      [t](const auto& iv) -> std::complex<double> {
        using T = std::decay_t<decltype(iv)>;
        if constexpr (std::is_same_v<T, ExponentialIneff>) {
          return 1.0 / std::complex<double>(1.0, -iv.theta * t);
        } else if constexpr (std::is_same_v<T, GammaIneff>) {
          // (1 - i theta t)^{-kappa}, principal branch (real part 1 > 0)
          return std::exp(-iv.kappa * std::log(std::complex<double>(1.0, -iv.theta * t)));
        } else {
          static_assert(std::is_same_v<T, HalfNormalIneff>);
          const double a = iv.sigma_u * t;
          return {std::exp(-0.5 * a * a), 2.0 * kInvSqrtPi * dawson(a * kInvSqrt2)};
        }
      },
      spec.ineff);

  // eps = v - u has CF phi_v(t) conj(phi_u(t)); eps = v + u has phi_v(t) phi_u(t)
  return spec.orientation == Orientation::production ? phi_v * std::conj(phi_u) : phi_v * phi_u;
}

}  // namespace sfgof
