#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "sfgof/distributions.hpp"

namespace sfgof {

// Regression data.  `x` holds every regressor column, including the column of
// ones when an intercept is wanted; zero columns means a pure noise model.
struct Sample {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;

  static Sample location_model(const std::vector<double>& values);
};

// throws std::invalid_argument on non-finite entries or n < d + 2
void validate_sample(const Sample& sample);

enum class IneffFamily { exponential, gamma2 };

struct NullModel {
  IneffFamily family = IneffFamily::exponential;
  Orientation orientation = Orientation::production;
};

std::string null_model_name(const NullModel& model);

struct SfmFit {
  Eigen::VectorXd beta;
  double sigma_v = 0.0;
  double theta = 0.0;
  double loglik = 0.0;
  bool converged = false;
  std::vector<double> residuals;      // eps_j = y_j - beta' x_j
  std::vector<double> std_residuals;  // eps_j / theta
  NullModel null_model;

  ComposedSpec fitted_spec() const;
};

struct OlsInit {
  Eigen::VectorXd beta;  // intercept already shifted by +theta0
  double sigma0 = 0.0;
  double theta0 = 0.0;
};

// Corrected-OLS starting values for the exponential null: least squares for
// beta, theta0 = (-m3/2)^(1/3) from the third central residual moment
// (clamped below at 0.05 sd when the sample skew has the wrong sign),
// sigma0^2 = max(m2 - theta0^2, 0.01 m2), and the mean of the inefficiency
// added back into the intercept.  Throws on rank-deficient designs.
OlsInit ols_init(const Sample& sample);

// log L = -n log theta + n sigma_v^2/(2 theta^2)
//         + sum_j log Phi(-eps_j/sigma_v - sigma_v/theta) + sum_j eps_j/theta
double normexp_loglik(const Eigen::VectorXd& beta, double sigma_v, double theta,
                      const Sample& sample);

// sum_j log f_eps(eps_j) with the normal/gamma density obtained by quadrature;
// QuadratureError propagates to the caller (fit_mle treats it as a failed step).
double normgamma_loglik(const Eigen::VectorXd& beta, double sigma_v, double theta, double kappa,
                        const Sample& sample);

struct WarmStart {
  Eigen::VectorXd beta;
  double sigma_v = 1.0;
  double theta = 1.0;
};

struct FitOptions {
  std::optional<WarmStart> warm;  // e.g. the parent fit inside a bootstrap
};

// Maximum likelihood over (beta, log sigma_v, log theta) by quasi-Newton with
// numerical gradients; the log parameterization keeps the scales positive
// without box constraints.  If the first run does not converge, three
// perturbed restarts are tried and the best log-likelihood is kept.
// Non-convergence is reported through SfmFit::converged, never an exception.
SfmFit fit_mle(const Sample& sample, const NullModel& null_model, const FitOptions& options = {});

}  // namespace sfgof
