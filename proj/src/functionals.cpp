#include "funcineq/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "funcineq/errors.hpp"
#include "funcineq/numerics.hpp"

namespace funcineq {

namespace {

Eigen::VectorXd checked_log(const Field& f) {
  for (Index i = 0; i < f.size(); ++i)
    if (!(f[i] > 0.0) || !std::isfinite(f[i]))
      throw DomainError("field must be strictly positive and finite");
  return f.array().log().matrix();
}

double log_norm_from_log_field(const Eigen::VectorXd& mu, const Eigen::VectorXd& log_f,
                               double p) {
  if (p == 0.0) return mu.dot(log_f);
  return log_mean_exp(mu, (p * log_f.array()).matrix()) / p;
}

}  // namespace

double log_lp_norm(const Eigen::VectorXd& mu, const Field& f, double p) {
  if (mu.size() != f.size()) throw InputError("field length does not match the measure");
  if (!std::isfinite(p)) throw DomainError("lp_norm: exponent must be finite");
  return log_norm_from_log_field(mu, checked_log(f), p);
}

double log_lp_norm(const MetricMeasureSpace& space, const Field& f, double p) {
  return log_lp_norm(space.weights(), f, p);
}

Extended lp_norm(const MetricMeasureSpace& space, const Field& f, double p) {
  return Extended(std::exp(log_lp_norm(space, f, p)));
}

ReflectionReport negative_moment_reflection_check(const MetricMeasureSpace& space, const Field& f,
                                                  double p, double tol) {
  if (!(p > 0.0)) throw DomainError("reflection check: p must be positive");
  const Field inv = f.cwiseInverse();
  const double lhs = std::exp(log_lp_norm(space, inv, p));
  const double rhs = std::exp(-log_lp_norm(space, f, -p));
  const double rel = std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
  return {lhs, rhs, rel, rel <= tol};
}

double entropy(const Eigen::VectorXd& mu, const Field& g) {
  if (mu.size() != g.size()) throw InputError("field length does not match the measure");
  if ((g.array() < 0.0).any()) throw DomainError("entropy: field must be non-negative");
  const double mass = mu.dot(g);
  if (!(mass > 0.0)) throw DomainError("entropy: field vanishes identically");
  double acc = 0.0;
  for (Index i = 0; i < g.size(); ++i)
    if (g[i] > 0.0) acc += mu[i] * g[i] * std::log(g[i] / mass);
  return acc;
}

double entropy(const MetricMeasureSpace& space, const Field& g) {
  return entropy(space.weights(), g);
}

double variance(const Eigen::VectorXd& mu, const Field& f) {
  if (mu.size() != f.size()) throw InputError("field length does not match the measure");
  const double m = mu.dot(f);
  return mu.dot((f.array() - m).square().matrix());
}

double variance(const MetricMeasureSpace& space, const Field& f) {
  return variance(space.weights(), f);
}

DerivativeReport moment_log_derivative_check(const MetricMeasureSpace& space, const Field& f,
                                             double t, double h, double tol) {
  if (!(h > 0.0)) throw DomainError("derivative check: step must be positive");
  if (std::abs(t) <= h) throw DomainError("derivative check: t lies within one step of 0");
  const Eigen::VectorXd& mu = space.weights();
  const Eigen::VectorXd log_f = checked_log(f);
  const double fd =
      (log_norm_from_log_field(mu, log_f, t + h) - log_norm_from_log_field(mu, log_f, t - h)) /
      (2.0 * h);
  // Ent(f^t) / int f^t = sum_i w_i (t log f_i - log int f^t), w the f^t-tilted weights.
  const Eigen::VectorXd tl = t * log_f;
  const double log_z = log_mean_exp(mu, tl);
  double ratio = 0.0;
  for (Index i = 0; i < mu.size(); ++i) {
    const double w = mu[i] * std::exp(tl[i] - log_z);
    ratio += w * (tl[i] - log_z);
  }
  const double formula = ratio / (t * t);
  const double abs_err = std::abs(fd - formula);
  const double rel_err = abs_err / std::max(std::abs(formula), 1e-300);
  const bool ok = rel_err <= tol || (std::abs(fd) <= 1e-12 && std::abs(formula) <= 1e-12);
  return {t, fd, formula, abs_err, rel_err, ok};
}

double log_lipschitz_constant(const MetricMeasureSpace& space, const Field& f) {
  return lipschitz_constant(space, checked_log(f));
}

LogLipProfile extract_one_sided_profile(const MetricMeasureSpace& space, const Field& f,
                                        ProfileMode mode,
                                        const std::optional<Eigen::VectorXd>& given_L) {
  const Eigen::VectorXd lf = checked_log(f);
  const Index n = space.size();
  LogLipProfile out{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  if (mode == ProfileMode::b_zero) {
    for (Index x = 0; x < n; ++x) {
      double best = 0.0;
      for (Index y = 0; y < n; ++y)
        if (y != x) best = std::max(best, (lf[x] - lf[y]) / space.distance(x, y));
      // One ulp of headroom keeps the condition exact after the product L d is rounded.
      out.L[x] = best > 0.0 ? best * (1.0 + 4.0 * std::numeric_limits<double>::epsilon()) : 0.0;
    }
    return out;
  }
  if (!given_L || given_L->size() != n || (given_L->array() < 0.0).any())
    throw DomainError("extract_one_sided_profile: given_L mode needs a non-negative L per point");
  out.L = *given_L;
  for (Index x = 0; x < n; ++x) {
    double best = 0.0;
    for (Index y = 0; y < n; ++y)
      best = std::max(best, lf[x] - lf[y] - out.L[x] * space.distance(x, y));
    out.b[x] = best > 0.0 ? best * (1.0 + 4.0 * std::numeric_limits<double>::epsilon()) : 0.0;
  }
  return out;
}

double one_sided_violation(const MetricMeasureSpace& space, const Field& f,
                           const LogLipProfile& profile) {
  const Eigen::VectorXd lf = checked_log(f);
  double worst = -std::numeric_limits<double>::infinity();
  for (Index x = 0; x < space.size(); ++x)
    for (Index y = 0; y < space.size(); ++y) {
      if (x == y) continue;
      const double rhs = lf[x] - profile.L[x] * space.distance(x, y) - profile.b[x];
      worst = std::max(worst, rhs - lf[y]);
    }
  return worst;
}

bool MomentCurve::non_decreasing(double tol) const {
  for (std::size_t k = 1; k < log_norms.size(); ++k)
    if (log_norms[k] < log_norms[k - 1] - tol * (1.0 + std::abs(log_norms[k - 1]))) return false;
  return true;
}

bool MomentCurve::log_moment_convex(double tol) const {
  for (std::size_t k = 1; k + 1 < exponents.size(); ++k) {
    const double t0 = exponents[k - 1], t1 = exponents[k], t2 = exponents[k + 1];
    const double g0 = t0 * log_norms[k - 1], g1 = t1 * log_norms[k], g2 = t2 * log_norms[k + 1];
    const double chord = ((t2 - t1) * g0 + (t1 - t0) * g2) / (t2 - t0);
    if (g1 > chord + tol * (1.0 + std::abs(chord))) return false;
  }
  return true;
}

MomentCurve moment_curve(const MetricMeasureSpace& space, const Field& f,
                         std::vector<double> exponents) {
  std::sort(exponents.begin(), exponents.end());
  MomentCurve curve{std::move(exponents), {}};
  const Eigen::VectorXd lf = checked_log(f);
  curve.log_norms.reserve(curve.exponents.size());
  for (double t : curve.exponents)
    curve.log_norms.push_back(log_norm_from_log_field(space.weights(), lf, t));
  return curve;
}

}  // namespace funcineq
