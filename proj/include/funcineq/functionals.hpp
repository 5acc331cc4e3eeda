#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "funcineq/extended.hpp"
#include "funcineq/space.hpp"

namespace funcineq {

/// log ||f||_{L^p(mu)} for strictly positive f and any real p; p = 0 is the
/// geometric mean. Accumulated in the log domain.
double log_lp_norm(const Eigen::VectorXd& mu, const Field& f, double p);
double log_lp_norm(const MetricMeasureSpace& space, const Field& f, double p);

/// ||f||_{L^p(mu)}; +inf only when the log-domain value itself overflows.
Extended lp_norm(const MetricMeasureSpace& space, const Field& f, double p);

struct ReflectionReport {
  double norm_of_inverse;     ///< ||1/f||_p
  double inverse_of_norm;     ///< 1 / ||f||_{-p}
  double relative_error;
  bool passed;
};

/// ||f^{-1}||_p == ||f||_{-p}^{-1} within `tol` relative.
ReflectionReport negative_moment_reflection_check(const MetricMeasureSpace& space, const Field& f,
                                                  double p, double tol = 1e-12);

/// Ent(g) = sum mu g log(g / sum mu g) with 0 log 0 = 0; g >= 0, not identically 0.
double entropy(const Eigen::VectorXd& mu, const Field& g);
double entropy(const MetricMeasureSpace& space, const Field& g);

double variance(const Eigen::VectorXd& mu, const Field& f);
double variance(const MetricMeasureSpace& space, const Field& f);

struct DerivativeReport {
  double t;
  double finite_difference;  ///< central difference of t -> log ||f||_t
  double entropy_formula;    ///< Ent(f^t) / (t^2 int f^t)
  double abs_error;
  double rel_error;
  bool passed;
};

/// Compares the central difference of t -> log ||f||_t with the entropy identity.
/// Passes when the relative error is within `tol` (or both sides vanish to 1e-12).
DerivativeReport moment_log_derivative_check(const MetricMeasureSpace& space, const Field& f,
                                             double t, double h = 1e-4, double tol = 1e-5);

/// max over pairs of |log f_i - log f_j| / d_ij.
double log_lipschitz_constant(const MetricMeasureSpace& space, const Field& f);

/// One-sided log-Lipschitz data: log f(y) >= log f(x) - L(x) d(x,y) - b(x).
struct LogLipProfile {
  Eigen::VectorXd L;
  Eigen::VectorXd b;
};

enum class ProfileMode { b_zero, given_L };

/// b_zero: L(x) = max_y (log f(x) - log f(y))_+ / d(x,y), b = 0.
/// given_L: b(x) = max_y (log f(x) - log f(y) - L(x) d(x,y))_+ for the supplied L.
LogLipProfile extract_one_sided_profile(const MetricMeasureSpace& space, const Field& f,
                                        ProfileMode mode,
                                        const std::optional<Eigen::VectorXd>& given_L = {});

/// Largest violation of the one-sided condition over all ordered pairs (<= 0 when it holds).
double one_sided_violation(const MetricMeasureSpace& space, const Field& f,
                           const LogLipProfile& profile);

/// Sampled moment curve t -> log ||f||_t.
struct MomentCurve {
  std::vector<double> exponents;
  std::vector<double> log_norms;

  bool non_decreasing(double tol = 1e-12) const;
  /// t log ||f||_t convex on the sampled knots.
  bool log_moment_convex(double tol = 1e-10) const;
};

MomentCurve moment_curve(const MetricMeasureSpace& space, const Field& f,
                         std::vector<double> exponents);

}  // namespace funcineq
