#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfgof {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;     // estimated absolute error bound
  int evaluations = 0;
  bool converged = false;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_segments = 4000;
};

namespace detail {

// 15-point Kronrod extension of 7-point Gauss on [-1, 1]
inline constexpr double kGkNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double kKronrodW[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double kGaussW[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <class F>
inline void gk15(F& f, double a, double b, double& value, double& err) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double result_gauss = kGaussW[3] * fc;
  double result_kronrod = kKronrodW[7] * fc;
  for (int j = 0; j < 3; ++j) {
    const double dx = half * kGkNodes[2 * j + 1];
    const double pair = f(center - dx) + f(center + dx);
    result_gauss += kGaussW[j] * pair;
    result_kronrod += kKronrodW[2 * j + 1] * pair;
  }
  for (int j = 0; j < 4; ++j) {
    const double dx = half * kGkNodes[2 * j];
    const double pair = f(center - dx) + f(center + dx);
    result_kronrod += kKronrodW[2 * j] * pair;
  }
  value = result_kronrod * half;
  // |K15 - G7| bounds the Gauss error and in practice overestimates the
  // Kronrod error by orders of magnitude, so it is a safe bound for `value`.
  err = std::abs((result_kronrod - result_gauss) * half);
}

struct Segment {
  double a, b, value, error;
};

}  // namespace detail

// Globally adaptive Gauss-Kronrod integration over the union of the panels
// [points[i], points[i+1]].  Worst-error panel is bisected until the summed
// error estimate meets max(abs_tol, rel_tol * |integral|) or the segment
// budget is exhausted (reported via converged = false).
template <class F>
QuadratureResult integrate_adaptive(F&& f, std::span<const double> points,
                                    const QuadratureOptions& opt = {}) {
  if (points.size() < 2) throw std::invalid_argument("integrate_adaptive: need at least 2 points");

  std::vector<detail::Segment> segs;
  segs.reserve(64);
  int evals = 0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i] < points[i + 1]))
      throw std::invalid_argument("integrate_adaptive: points must be strictly increasing");
    detail::Segment s{points[i], points[i + 1], 0.0, 0.0};
    detail::gk15(f, s.a, s.b, s.value, s.error);
    evals += 15;
    segs.push_back(s);
  }

  auto worse = [&segs](int lhs, int rhs) { return segs[lhs].error < segs[rhs].error; };
  std::priority_queue<int, std::vector<int>, decltype(worse)> heap(worse);
  for (int i = 0; i < static_cast<int>(segs.size()); ++i) heap.push(i);

  // compensated recombination in index order keeps the result deterministic
  auto recombine = [&segs](double& sum_out, double& err_out) {
    double sum = 0.0, comp = 0.0, err = 0.0;
    for (const auto& s : segs) {
      const double y = s.value - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
      err += s.error;
    }
    sum_out = sum;
    err_out = err;
  };
  auto tolerance = [&opt](double value) {
    return std::max(opt.abs_tol, opt.rel_tol * std::abs(value));
  };

  double total_value = 0.0, total_error = 0.0;
  recombine(total_value, total_error);

  // The inner loop tracks value/error incrementally; the exact recombination
  // afterwards can disagree in the last digits, so splitting resumes until
  // the exact totals meet the tolerance too.
  for (;;) {
    while (total_error > tolerance(total_value) &&
           static_cast<int>(segs.size()) < opt.max_segments && !heap.empty()) {
      const int idx = heap.top();
      heap.pop();
      const detail::Segment old = segs[idx];
      const double mid = 0.5 * (old.a + old.b);
      if (mid <= old.a || mid >= old.b) continue;  // interval at floating-point resolution

      detail::Segment left{old.a, mid, 0.0, 0.0};
      detail::Segment right{mid, old.b, 0.0, 0.0};
      detail::gk15(f, left.a, left.b, left.value, left.error);
      detail::gk15(f, right.a, right.b, right.value, right.error);
      evals += 30;

      total_value += left.value + right.value - old.value;
      total_error += left.error + right.error - old.error;
      segs[idx] = left;
      segs.push_back(right);
      heap.push(idx);
      heap.push(static_cast<int>(segs.size()) - 1);
    }
    recombine(total_value, total_error);
    if (!std::isfinite(total_error) || !std::isfinite(total_value) ||
        total_error <= tolerance(total_value) ||
        static_cast<int>(segs.size()) >= opt.max_segments || heap.empty())
      break;
  }

  QuadratureResult out;
  out.value = total_value;
  out.error = total_error;
  out.evaluations = evals;
  out.converged = total_error <= tolerance(total_value);
  return out;
}

template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  const double pts[2] = {a, b};
  return integrate_adaptive(f, std::span<const double>(pts, 2), opt);
}

template <class F>
double integrate_or_throw(F&& f, std::span<const double> points, const QuadratureOptions& opt,
                          const char* context) {
  const QuadratureResult r = integrate_adaptive(f, points, opt);
  if (!r.converged) {
    char msg[256];
    std::snprintf(msg, sizeof msg,
                  "%s: quadrature did not reach tolerance (value %.6e, error bound %.3e, %d "
                  "evaluations)",
                  context, r.value, r.error, r.evaluations);
    throw QuadratureError(msg);
  }
  return r.value;
}

}  // namespace sfgof
