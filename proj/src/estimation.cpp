#include "sfgof/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sfgof/optimize.hpp"
#include "sfgof/quadrature.hpp"
#include "sfgof/special.hpp"

namespace sfgof {

Sample Sample::location_model(const std::vector<double>& values) {
  Sample s;
  s.y = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  s.x = Eigen::MatrixXd::Ones(s.y.size(), 1);
  return s;
}

void validate_sample(const Sample& sample) {
  const Eigen::Index n = sample.y.size();
  const Eigen::Index d = sample.x.cols();
  if (sample.x.rows() != n) throw std::invalid_argument("sample: y and x row counts differ");
  if (n < d + 2) throw std::invalid_argument("sample: need n >= d + 2 observations");
  if (!sample.y.allFinite() || !sample.x.allFinite())
    throw std::invalid_argument("sample: non-finite entries");
}

std::string null_model_name(const NullModel& model) {
  std::string s = model.family == IneffFamily::exponential ? "normal/exponential" : "normal/gamma(k=2)";
  s += model.orientation == Orientation::production ? " (production)" : " (cost)";
  return s;
}

ComposedSpec SfmFit::fitted_spec() const {
  ComposedSpec spec;
  spec.noise = NoiseSpec{sigma_v};
  if (null_model.family == IneffFamily::exponential)
    spec.ineff = ExponentialIneff{theta};
  else
    spec.ineff = GammaIneff{2.0, theta};
  spec.orientation = null_model.orientation;
  return spec;
}

namespace {

Eigen::VectorXd solve_least_squares(const Sample& sample) {
  const Eigen::Index d = sample.x.cols();
  if (d == 0) return Eigen::VectorXd();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sample.x);
  if (qr.rank() < d) throw std::invalid_argument("ols_init: rank-deficient design matrix");
  return qr.solve(sample.y);
}

struct ResidualMoments {
  double m2 = 0.0;
  double m3 = 0.0;
};

ResidualMoments central_moments(const Eigen::VectorXd& e) {
  const double n = static_cast<double>(e.size());
  const double mean = e.mean();
  double m2 = 0.0, m3 = 0.0;
  for (Eigen::Index j = 0; j < e.size(); ++j) {
    const double c = e[j] - mean;
    m2 += c * c;
    m3 += c * c * c;
  }
  return {m2 / n, m3 / n};
}

// index of a constant regressor column (the intercept), or -1
Eigen::Index intercept_column(const Eigen::MatrixXd& x) {
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double v = x(0, c);
    if (v != 0.0 && (x.col(c).array() - v).abs().maxCoeff() < 1e-12) return c;
  }
  return -1;
}

// moment starting values shared by both nulls; the exponential case is
// kappa = 1, the gamma null uses kappa = 2 (E u = kappa theta, third central
// moment of u is 2 kappa theta^3)
OlsInit moment_init(const Sample& sample, double kappa) {
  OlsInit init;
  init.beta = solve_least_squares(sample);
  const Eigen::VectorXd e =
      sample.x.cols() > 0 ? (sample.y - sample.x * init.beta).eval() : sample.y;
  const auto [m2, m3] = central_moments(e);

  double theta0 = std::cbrt(-m3 / (2.0 * kappa));
  theta0 = std::max(theta0, 0.05 * std::sqrt(m2));
  const double sigma0_sq = std::max(m2 - kappa * theta0 * theta0, 0.01 * m2);

  init.theta0 = theta0;
  init.sigma0 = std::sqrt(sigma0_sq);
  const Eigen::Index ic = intercept_column(sample.x);
  if (ic >= 0) init.beta[ic] += kappa * theta0 / sample.x(0, ic);
  return init;
}

}  // namespace

OlsInit ols_init(const Sample& sample) {
  validate_sample(sample);
  return moment_init(sample, 1.0);
}

double normexp_loglik(const Eigen::VectorXd& beta, double sigma_v, double theta,
                      const Sample& sample) {
  if (!(sigma_v > 0.0) || !(theta > 0.0))
    throw std::invalid_argument("normexp_loglik requires sigma_v > 0 and theta > 0");
  const Eigen::Index n = sample.y.size();
  const Eigen::VectorXd eps =
      sample.x.cols() > 0 ? (sample.y - sample.x * beta).eval() : sample.y;
  double sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) sum += normexp_log_density(eps[j], sigma_v, theta);
  return sum;
}

double normgamma_loglik(const Eigen::VectorXd& beta, double sigma_v, double theta, double kappa,
                        const Sample& sample) {
  if (!(sigma_v > 0.0) || !(theta > 0.0) || !(kappa > 0.0))
    throw std::invalid_argument("normgamma_loglik requires positive sigma_v, theta, kappa");
  const Eigen::VectorXd eps =
      sample.x.cols() > 0 ? (sample.y - sample.x * beta).eval() : sample.y;
  ComposedSpec spec{NoiseSpec{sigma_v}, GammaIneff{kappa, theta}, Orientation::production};
  double sum = 0.0;
  for (Eigen::Index j = 0; j < eps.size(); ++j)
    sum += std::log(std::max(composed_density_quadrature(eps[j], spec), 1e-300));
  return sum;
}

namespace {

constexpr double kKappaGamma2 = 2.0;

struct PackedObjective {
  const Sample* sample;
  IneffFamily family;

  // mean negative log-likelihood over p = (beta..., log sigma_v, log theta);
  // the 1/n scale makes the gradient tolerance meaningful at every n
  double operator()(const Eigen::VectorXd& p) const {
    const Eigen::Index d = sample->x.cols();
    const Eigen::VectorXd beta = p.head(d);
    const double sigma_v = std::exp(p[d]);
    const double theta = std::exp(p[d + 1]);
    if (!std::isfinite(sigma_v) || !std::isfinite(theta) || sigma_v <= 0.0 || theta <= 0.0)
      return std::numeric_limits<double>::infinity();
    double ll;
    try {
      ll = family == IneffFamily::exponential
               ? normexp_loglik(beta, sigma_v, theta, *sample)
               : normgamma_loglik(beta, sigma_v, theta, kKappaGamma2, *sample);
    } catch (const QuadratureError&) {
      return std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(ll)) return std::numeric_limits<double>::infinity();
    return -ll / static_cast<double>(sample->y.size());
  }
};

Eigen::VectorXd pack(const Eigen::VectorXd& beta, double sigma_v, double theta) {
  Eigen::VectorXd p(beta.size() + 2);
  p.head(beta.size()) = beta;
  p[beta.size()] = std::log(sigma_v);
  p[beta.size() + 1] = std::log(theta);
  return p;
}

}  // namespace

SfmFit fit_mle(const Sample& sample, const NullModel& null_model, const FitOptions& options) {
  validate_sample(sample);
  const bool cost = null_model.orientation == Orientation::cost;

  // cost orientation by reflection: y = b'x + v + u is the production model
  // for (-y, x) with coefficients -b, identical scales, mirrored residuals
  Sample work;
  work.y = cost ? (-sample.y).eval() : sample.y;
  work.x = sample.x;

  const Eigen::Index d = work.x.cols();
  const double kappa = null_model.family == IneffFamily::exponential ? 1.0 : kKappaGamma2;
  PackedObjective objective{&work, null_model.family};

  std::vector<Eigen::VectorXd> starts;
  if (options.warm) {
    Eigen::VectorXd wb = options.warm->beta;
    if (cost) wb = -wb;
    starts.push_back(pack(wb, options.warm->sigma_v, options.warm->theta));
  }
  const OlsInit base = moment_init(work, kappa);
  starts.push_back(pack(base.beta, base.sigma0, base.theta0));
  // perturbed restarts used only when the leading starts fail to converge
  const double shifts[3][2] = {{std::log(2.0), -std::log(2.0)},
                               {-std::log(2.0), std::log(2.0)},
                               {std::log(1.5), std::log(1.5)}};
  for (const auto& sh : shifts) {
    Eigen::VectorXd p = pack(base.beta, base.sigma0, base.theta0);
    p[d] += sh[0];
    p[d + 1] += sh[1];
    starts.push_back(p);
  }

  BfgsOptions bopt;
  BfgsResult best;
  bool have_best = false;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    BfgsResult run = bfgs_minimize(objective, starts[i], bopt);
    if (!have_best || run.f < best.f || (run.converged && !best.converged && run.f <= best.f)) {
      best = std::move(run);
      have_best = true;
    }
    if (best.converged) break;
  }

  SfmFit fit;
  fit.null_model = null_model;
  Eigen::VectorXd beta_work = best.x.head(d);
  fit.sigma_v = std::exp(best.x[d]);
  fit.theta = std::exp(best.x[d + 1]);
  fit.loglik = -best.f * static_cast<double>(work.y.size());
  fit.converged = best.converged;
  fit.beta = cost ? (-beta_work).eval() : beta_work;

  const Eigen::VectorXd eps =
      d > 0 ? (sample.y - sample.x * fit.beta).eval() : sample.y;
  fit.residuals.assign(eps.data(), eps.data() + eps.size());
  fit.std_residuals.resize(fit.residuals.size());
  for (std::size_t j = 0; j < fit.residuals.size(); ++j)
    fit.std_residuals[j] = fit.residuals[j] / fit.theta;
  return fit;
}

}  // namespace sfgof
