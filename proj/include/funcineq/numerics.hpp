#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace funcineq {

/// log(sum_i exp(x_i)); -inf for an empty or all -inf input, +inf if any x_i is +inf.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  if (x.size() == 0) return -std::numeric_limits<Scalar>::infinity();
  const Scalar m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.derived().array() - m).exp().sum());
}

/// log(sum_i w_i exp(x_i)) for probability-like weights w_i >= 0.
template <typename DerivedW, typename DerivedX>
typename DerivedX::Scalar log_mean_exp(const Eigen::DenseBase<DerivedW>& w,
                                       const Eigen::DenseBase<DerivedX>& x) {
  using Scalar = typename DerivedX::Scalar;
  Scalar m = -std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (w.derived().coeff(i) > 0 && x.derived().coeff(i) > m) m = x.derived().coeff(i);
  if (!std::isfinite(m)) return m;
  Scalar acc = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (w.derived().coeff(i) > 0) acc += w.derived().coeff(i) * std::exp(x.derived().coeff(i) - m);
  return m + std::log(acc);
}

/// n points geometrically spaced on [lo, hi], endpoints included exactly.
std::vector<double> log_space(double lo, double hi, int n);

/// n points equally spaced on [lo, hi], endpoints included exactly.
std::vector<double> lin_space(double lo, double hi, int n);

struct ScalarMinimum {
  double x;
  double value;
};

/// Golden-section search for the minimum of a unimodal function on [lo, hi].
/// +inf values are allowed; they are treated as larger than every finite value.
ScalarMinimum golden_section_minimize(const std::function<double(double)>& fn, double lo,
                                      double hi, double x_tol, int max_iter = 400);

/// Minimum of a unimodal function sampled on a sorted grid, then refined by
/// golden-section search on the bracketing grid interval.
ScalarMinimum grid_then_golden(const std::function<double(double)>& fn,
                               const std::vector<double>& grid, double rel_x_tol = 1e-12);

struct QuadratureResult {
  double value;
  double error_estimate;
  int evaluations;
};

/// Adaptive Simpson quadrature with an absolute tolerance. A panel also stops once its
/// correction is at the round-off level of its own value, so large integrands terminate.
QuadratureResult adaptive_simpson(const std::function<double(double)>& fn, double a, double b,
                                  double abs_tol, int max_depth = 60);

}  // namespace funcineq
