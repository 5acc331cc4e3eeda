#include "funcineq/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "funcineq/errors.hpp"
#include "funcineq/numerics.hpp"

namespace funcineq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double phi1(double u) { return u <= 1.0 ? 0.5 * u * u : u - 0.5; }

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw InputError(std::string(what) + " must be a positive finite number");
}

}  // namespace

ConvexProfile ConvexProfile::identity() {
  ConvexProfile p;
  p.kind_ = ProfileKind::identity;
  return p;
}

ConvexProfile ConvexProfile::quadratic(double lambda) {
  require_positive(lambda, "quadratic: coefficient");
  ConvexProfile p;
  p.kind_ = ProfileKind::quadratic;
  p.a_ = lambda;
  return p;
}

ConvexProfile ConvexProfile::phi1_scaled(double lambda_t1) {
  require_positive(lambda_t1, "phi1: coefficient");
  ConvexProfile p;
  p.kind_ = ProfileKind::phi1_scaled;
  p.a_ = lambda_t1;
  return p;
}

ConvexProfile ConvexProfile::linear_offset(double offset, double slope) {
  require_positive(slope, "linear_offset: slope");
  if (!std::isfinite(offset)) throw InputError("linear_offset: offset must be finite");
  ConvexProfile p;
  p.kind_ = ProfileKind::linear_offset;
  p.a_ = slope;
  p.m_ = offset;
  return p;
}

ConvexProfile ConvexProfile::grid(std::vector<double> knots, std::vector<double> values,
                                  std::function<double(double)> exact) {
  if (knots.size() < 2 || knots.size() != values.size())
    throw InputError("grid profile: need at least two knots with matching values");
  if (knots.front() != 0.0) throw InputError("grid profile: first knot must be 0");
  for (std::size_t k = 0; k < knots.size(); ++k) {
    if (!std::isfinite(knots[k]) || !std::isfinite(values[k]))
      throw InputError("grid profile: knots and values must be finite");
    if (k > 0 && !(knots[k] > knots[k - 1]))
      throw InputError("grid profile: knots must increase strictly");
    if (k > 0 && values[k] < values[k - 1] - 1e-12 * std::max(1.0, std::abs(values[k])))
      throw InputError("grid profile: values decrease at knot " + std::to_string(k));
  }
  for (std::size_t k = 1; k + 1 < knots.size(); ++k) {
    const double hl = knots[k] - knots[k - 1], hr = knots[k + 1] - knots[k];
    const double chord = (hr * values[k - 1] + hl * values[k + 1]) / (hl + hr);
    if (values[k] > chord + 1e-12 * std::max(1.0, std::abs(values[k])))
      throw InputError("grid profile: values are not convex at knot " + std::to_string(k));
  }
  ConvexProfile p;
  p.kind_ = ProfileKind::grid;
  p.grid_ = std::make_shared<const GridData>(
      GridData{std::move(knots), std::move(values), std::move(exact)});
  return p;
}

ConvexProfile ConvexProfile::sampled(const std::function<double(double)>& fn, GridOptions opts) {
  if (!(opts.t_max > 0.0) || !(opts.step > 0.0)) throw DomainError("sampled: bad grid options");
  const auto n = static_cast<std::size_t>(std::llround(opts.t_max / opts.step));
  std::vector<double> knots(n + 1), values(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    knots[k] = static_cast<double>(k) * opts.step;
    values[k] = fn(knots[k]);
  }
  return grid(std::move(knots), std::move(values), fn);
}

double ConvexProfile::operator()(double t) const {
  switch (kind_) {
    case ProfileKind::identity:
      return t;
    case ProfileKind::quadratic:
      return 0.5 * a_ * t * t;
    case ProfileKind::phi1_scaled:
      return phi1(std::sqrt(a_) * t);
    case ProfileKind::linear_offset:
      return -m_ + a_ * t;
    case ProfileKind::grid: {
      const auto& k = grid_->knots;
      const auto& v = grid_->values;
      const std::size_t n = k.size();
      if (t >= k[n - 1]) {
        const double slope = (v[n - 1] - v[n - 2]) / (k[n - 1] - k[n - 2]);
        return v[n - 1] + slope * (t - k[n - 1]);
      }
      if (t <= 0.0) return v[0];
      const auto it = std::upper_bound(k.begin(), k.end(), t);
      const std::size_t j = static_cast<std::size_t>(it - k.begin());
      const double w = (t - k[j - 1]) / (k[j] - k[j - 1]);
      return (1.0 - w) * v[j - 1] + w * v[j];
    }
    case ProfileKind::composite:
      return (*outer_)((*inner_)(t));
  }
  return 0.0;
}

Extended ConvexProfile::growth_rate() const {
  switch (kind_) {
    case ProfileKind::identity:
      return 1.0;
    case ProfileKind::quadratic:
      return Extended::infinity();
    case ProfileKind::phi1_scaled:
      return std::sqrt(a_);
    case ProfileKind::linear_offset:
      return a_;
    case ProfileKind::grid: {
      const auto& k = grid_->knots;
      const auto& v = grid_->values;
      const std::size_t n = k.size();
      return (v[n - 1] - v[n - 2]) / (k[n - 1] - k[n - 2]);
    }
    case ProfileKind::composite: {
      const Extended so = outer_->growth_rate(), si = inner_->growth_rate();
      if (so.value() == 0.0 || si.value() == 0.0) return 0.0;
      if (so.is_infinite() || si.is_infinite()) return Extended::infinity();
      return so.value() * si.value();
    }
  }
  return 0.0;
}

bool ConvexProfile::tight() const { return std::abs((*this)(0.0)) <= 1e-12; }

bool ConvexProfile::phi_role() const { return tight() && (*this)(0.0) >= -1e-12; }

const std::vector<double>& ConvexProfile::knots() const {
  if (!grid_) throw DomainError("profile has no knots");
  return grid_->knots;
}

const std::vector<double>& ConvexProfile::values() const {
  if (!grid_) throw DomainError("profile has no knots");
  return grid_->values;
}

const std::function<double(double)>& ConvexProfile::sampled_from() const {
  if (!grid_) throw DomainError("profile has no knots");
  return grid_->exact;
}

const ConvexProfile& ConvexProfile::outer() const {
  if (!outer_) throw DomainError("profile is not a composition");
  return *outer_;
}

const ConvexProfile& ConvexProfile::inner() const {
  if (!inner_) throw DomainError("profile is not a composition");
  return *inner_;
}

std::string ConvexProfile::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case ProfileKind::identity:
      os << "identity";
      break;
    case ProfileKind::quadratic:
      os << "quadratic(" << a_ << ")";
      break;
    case ProfileKind::phi1_scaled:
      os << "phi1(" << a_ << ")";
      break;
    case ProfileKind::linear_offset:
      os << "linear_offset(" << m_ << "," << a_ << ")";
      break;
    case ProfileKind::grid:
      os << "grid(" << grid_->knots.size() << " knots)";
      break;
    case ProfileKind::composite:
      os << outer_->describe() << " o " << inner_->describe();
      break;
  }
  return os.str();
}

ConvexProfile compose(const ConvexProfile& outer, const ConvexProfile& inner) {
  if (!inner.phi_role())
    throw DomainError("compose: inner profile must be non-negative with value 0 at 0");
  if (outer.kind() == ProfileKind::identity) return inner;
  if (inner.kind() == ProfileKind::identity) return outer;
  ConvexProfile p;
  p.kind_ = ProfileKind::composite;
  p.outer_ = std::make_shared<const ConvexProfile>(outer);
  p.inner_ = std::make_shared<const ConvexProfile>(inner);
  return p;
}

namespace {

Extended grid_legendre(const ConvexProfile& profile, double s) {
  const auto& k = profile.knots();
  const auto& v = profile.values();
  const std::size_t n = k.size();
  auto slope = [&](std::size_t j) { return (v[j + 1] - v[j]) / (k[j + 1] - k[j]); };
  // First segment whose slope reaches s; the knot at its left end maximises s t - v.
  std::size_t lo = 0, hi = n - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (slope(mid) < s)
      lo = mid + 1;
    else
      hi = mid;
  }
  const std::size_t best = std::min(lo, n - 1);
  double value = s * k[best] - v[best];
  // Refine against the sampled function on the bracketing interval. Knot data read
  // from files has no underlying function and the interpolant's sup is the knot.
  const auto& exact = profile.sampled_from();
  if (exact) {
    const double a = k[best == 0 ? 0 : best - 1];
    const double b = k[std::min(best + 1, n - 1)];
    const ScalarMinimum m = golden_section_minimize(
        [&](double t) { return exact(t) - s * t; }, a, b, 1e-8);
    value = std::max(value, -m.value);
  }
  return value;
}

Extended composite_legendre(const ConvexProfile& profile, double s) {
  auto gain = [&](double t) { return s * t - profile(t); };
  double hi = 1.0;
  while (hi < 1e15 && gain(2.0 * hi) > gain(hi)) hi *= 2.0;
  const ScalarMinimum m = golden_section_minimize([&](double t) { return -gain(t); }, 0.0,
                                                  2.0 * hi, 1e-13 * hi);
  return std::max(-m.value, gain(0.0));
}

}  // namespace

Extended legendre(const ConvexProfile& profile, double s) {
  if (!(s >= 0.0)) throw DomainError("legendre: slope must be non-negative");
  const Extended S = profile.growth_rate();
  if (s > S.value()) return Extended::infinity();
  switch (profile.kind()) {
    case ProfileKind::identity:
      return 0.0;
    case ProfileKind::quadratic:
      return s * s / (2.0 * profile.parameter());
    case ProfileKind::phi1_scaled: {
      const double u = s / std::sqrt(profile.parameter());
      return 0.5 * u * u;
    }
    case ProfileKind::linear_offset:
      return profile.offset();
    case ProfileKind::grid:
      return grid_legendre(profile, s);
    case ProfileKind::composite:
      return composite_legendre(profile, s);
  }
  return Extended::infinity();
}

BiconjugateReport biconjugate_check(const ConvexProfile& profile, GridOptions opts) {
  if (!(opts.t_max > 0.0) || !(opts.step > 0.0))
    throw DomainError("biconjugate_check: bad grid options");
  const auto n = static_cast<std::size_t>(std::llround(opts.t_max / opts.step));
  if (n < 2) throw DomainError("biconjugate_check: fewer than two knot intervals");
  std::vector<double> t(n + 1), v(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    t[k] = static_cast<double>(k) * opts.step;
    v[k] = profile(t[k]);
  }
  // Slopes that can support the profile on the window.
  const double end_slope = (v[n] - v[n - 1]) / (t[n] - t[n - 1]);
  const double s_max = std::min(profile.growth_rate().value(), end_slope);
  const std::size_t m = 4 * n;
  std::vector<double> s(m + 1), conj(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    s[j] = s_max * static_cast<double>(j) / static_cast<double>(m);
    conj[j] = legendre(profile, s[j]).value();
  }
  BiconjugateReport report;
  report.knots = n + 1;
  report.slopes = m + 1;
  std::size_t j = 0;
  for (std::size_t k = 1; k < n; ++k) {
    auto val = [&](std::size_t i) { return s[i] * t[k] - conj[i]; };
    while (j + 1 <= m && val(j + 1) >= val(j)) ++j;
    const double err = std::abs(val(j) - v[k]) / (1.0 + std::abs(v[k]));
    if (err > report.max_relative_error) {
      report.max_relative_error = err;
      report.worst_t = t[k];
    }
  }
  return report;
}

CompositionConjugate conjugate_of_composition(const ConvexProfile& outer,
                                              const ConvexProfile& inner, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("conjugate_of_composition: lambda must be >= 0");
  if (!inner.phi_role())
    throw DomainError("conjugate_of_composition: inner profile must be a cost profile");
  if (lambda == 0.0) return {legendre(outer, 0.0), 0.0};

  const Extended s_outer = outer.growth_rate(), s_inner = inner.growth_rate();
  double lo = s_inner.is_finite() ? lambda / s_inner.value() : 1e-6;
  if (s_inner.is_finite())
    while (lambda / lo > s_inner.value()) lo = std::nextafter(lo, kInf);
  double hi = s_outer.is_finite() ? s_outer.value() : std::max(1e6, lo * 1e6);
  if (lo > hi) return {Extended::infinity(), 0.0};

  auto objective = [&](double alpha) {
    alpha = std::clamp(alpha, lo, hi);
    const Extended a = legendre(outer, alpha);
    const Extended b = legendre(inner, lambda / alpha);
    return (a + alpha * b).value();
  };
  if (lo == hi) {
    const double v = objective(lo);
    return {v, lo};
  }
  const int per_decade = 60;
  const int count = std::max(2, static_cast<int>(std::ceil(per_decade * std::log10(hi / lo))) + 1);
  std::vector<double> grid = log_space(lo, hi, count);
  std::vector<double> log_grid(grid.size());
  std::transform(grid.begin(), grid.end(), log_grid.begin(), [](double a) { return std::log(a); });
  const ScalarMinimum best =
      grid_then_golden([&](double u) { return objective(std::exp(u)); }, log_grid, 1e-15);
  if (!std::isfinite(best.value)) return {Extended::infinity(), 0.0};
  return {best.value, std::clamp(std::exp(best.x), lo, hi)};
}

Extended generalized_inverse(const ConvexProfile& profile, double y) {
  if (profile(0.0) > y) return 0.0;
  switch (profile.kind()) {
    case ProfileKind::identity:
      return y;
    case ProfileKind::quadratic:
      return std::sqrt(2.0 * y / profile.parameter());
    case ProfileKind::phi1_scaled: {
      const double u = y <= 0.5 ? std::sqrt(2.0 * y) : y + 0.5;
      return u / std::sqrt(profile.parameter());
    }
    case ProfileKind::linear_offset:
      return (y + profile.offset()) / profile.parameter();
    case ProfileKind::grid: {
      const auto& k = profile.knots();
      const auto& v = profile.values();
      const std::size_t n = k.size();
      const double last = profile.growth_rate().value();
      if (y >= v[n - 1]) {
        if (last <= 0.0) return Extended::infinity();
        return k[n - 1] + (y - v[n - 1]) / last;
      }
      const auto it = std::upper_bound(v.begin(), v.end(), y);
      const std::size_t j = static_cast<std::size_t>(it - v.begin());
      const double w = (y - v[j - 1]) / (v[j] - v[j - 1]);
      return k[j - 1] + w * (k[j] - k[j - 1]);
    }
    case ProfileKind::composite: {
      const Extended u = generalized_inverse(profile.outer(), y);
      if (u.is_infinite()) return Extended::infinity();
      return generalized_inverse(profile.inner(), u.value());
    }
  }
  return 0.0;
}

}  // namespace funcineq
