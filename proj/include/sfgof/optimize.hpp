#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace sfgof {

struct BfgsOptions {
  double grad_tol = 1e-6;   // infinity norm of the gradient
  double step_tol = 1e-10;  // infinity norm of the accepted step
  int max_iterations = 300;
  double fd_step = 1e-6;    // central-difference step, scaled by 1 + |x_i|
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = std::numeric_limits<double>::infinity();
  Eigen::VectorXd gradient;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool by_step_tolerance = false;  // stopped on step size, not gradient norm
};

// Central finite differences, h_i = step * (1 + |x_i|).
template <class F>
Eigen::VectorXd numerical_gradient(F&& f, const Eigen::VectorXd& x, double step, int* evals = nullptr) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step * (1.0 + std::abs(x[i]));
    const double xi = x[i];
    xp[i] = xi + h;
    const double fp = f(xp);
    xp[i] = xi - h;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  if (evals) *evals += 2 * static_cast<int>(x.size());
  return g;
}

// Quasi-Newton (BFGS) minimizer with numerical gradients and Armijo
// backtracking.  Second derivatives are never formed; the inverse Hessian
// approximation is updated only when the curvature condition y's > 0 holds,
// which keeps it positive definite.  Non-finite objective values are treated
// as rejected steps so the line search backs away from invalid regions.
//
// Termination mirrors the usual quasi-Newton library semantics: success means
// either the gradient norm tolerance was met or the step size collapsed below
// step_tol (including line-search exhaustion along steepest descent, where no
// representable step improves the objective).  The step-tolerance exit is the
// one that fires on likelihood ridges such as sigma_v -> 0, where the profile
// optimum is a kink and the gradient cannot vanish.
template <class F>
BfgsResult bfgs_minimize(F&& f, Eigen::VectorXd x0, const BfgsOptions& opt = {}) {
  const Eigen::Index dim = x0.size();
  BfgsResult res;
  res.x = std::move(x0);
  res.f = f(res.x);
  res.evaluations = 1;
  if (!std::isfinite(res.f)) return res;

  res.gradient = numerical_gradient(f, res.x, opt.fd_step, &res.evaluations);
  Eigen::MatrixXd inv_hess = Eigen::MatrixXd::Identity(dim, dim);
  bool steepest = true;  // H is currently the identity

  for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
    if (res.gradient.lpNorm<Eigen::Infinity>() <= opt.grad_tol) {
      res.converged = true;
      return res;
    }

    Eigen::VectorXd direction = -(inv_hess * res.gradient);
    double slope = direction.dot(res.gradient);
    if (!(slope < 0.0)) {  // lost descent property; reset to steepest descent
      inv_hess.setIdentity();
      steepest = true;
      direction = -res.gradient;
      slope = direction.dot(res.gradient);
    }

    // Armijo backtracking
    constexpr double c1 = 1e-4;
    double alpha = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      x_new = res.x + alpha * direction;
      f_new = f(x_new);
      ++res.evaluations;
      if (std::isfinite(f_new) && f_new <= res.f + c1 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (steepest) {
        // no improving step of any representable size: step-tolerance stop
        res.converged = true;
        res.by_step_tolerance = true;
        return res;
      }
      inv_hess.setIdentity();
      steepest = true;
      continue;
    }

    const Eigen::VectorXd step = x_new - res.x;
    Eigen::VectorXd grad_new = numerical_gradient(f, x_new, opt.fd_step, &res.evaluations);
    const Eigen::VectorXd y = grad_new - res.gradient;

    res.x = std::move(x_new);
    res.f = f_new;
    res.gradient = std::move(grad_new);

    if (step.lpNorm<Eigen::Infinity>() <= opt.step_tol) {
      res.converged = true;
      res.by_step_tolerance = res.gradient.lpNorm<Eigen::Infinity>() > opt.grad_tol;
      return res;
    }

    const double ys = y.dot(step);
    if (ys > 1e-12 * y.norm() * step.norm()) {
      const double rho = 1.0 / ys;
      const Eigen::VectorXd hy = inv_hess * y;
      // H <- (I - rho s y') H (I - rho y s') + rho s s'
      inv_hess.noalias() -= rho * (step * hy.transpose() + hy * step.transpose());
      inv_hess.noalias() += (rho * rho * (y.dot(hy)) + rho) * (step * step.transpose());
      steepest = false;
    }
  }

  res.converged = res.gradient.lpNorm<Eigen::Infinity>() <= opt.grad_tol;
  return res;
}

}  // namespace sfgof
