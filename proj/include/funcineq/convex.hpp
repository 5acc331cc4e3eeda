#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "funcineq/extended.hpp"

namespace funcineq {

enum class ProfileKind { identity, quadratic, phi1_scaled, linear_offset, grid, composite };

/// Default window and knot spacing for sampled profiles.
struct GridOptions {
  double t_max = 100.0;
  double step = 1e-4;
};

/// A convex non-decreasing function on [0, inf).
///
/// Catalog entries:
///   identity              t
///   quadratic(l)          l t^2 / 2
///   phi1_scaled(l)        phi1(sqrt(l) t),  phi1(u) = u^2/2 on [0,1], u - 1/2 beyond
///   linear_offset(M, l)   -M + l t
/// Grid profiles interpolate knot values linearly and continue with the last
/// slope past the final knot, so their growth rate is that slope. Composite
/// profiles are outer(inner(t)) built by `compose`.
class ConvexProfile {
 public:
  static ConvexProfile identity();
  static ConvexProfile quadratic(double lambda);
  static ConvexProfile phi1_scaled(double lambda_t1);
  static ConvexProfile linear_offset(double offset, double slope);
  /// Knots must start at 0 and increase; values must be convex and non-decreasing
  /// on the knots (second differences >= -1e-12). `exact`, when given, is the
  /// function the knots were sampled from and is used for local refinement.
  static ConvexProfile grid(std::vector<double> knots, std::vector<double> values,
                            std::function<double(double)> exact = {});
  /// Samples `fn` on [0, t_max] with the given step.
  static ConvexProfile sampled(const std::function<double(double)>& fn, GridOptions opts = {});

  double operator()(double t) const;

  ProfileKind kind() const { return kind_; }
  bool is_catalog() const { return kind_ != ProfileKind::grid && kind_ != ProfileKind::composite; }
  /// Primary parameter (lambda / lambda_t1 / slope); 0 for identity and grids.
  double parameter() const { return a_; }
  /// Offset M of linear_offset; 0 otherwise.
  double offset() const { return m_; }

  /// S = lim profile(t) / t.
  Extended growth_rate() const;
  /// profile(0) == 0 within 1e-12.
  bool tight() const;
  /// Non-negative with value 0 at the origin, as required of a cost profile.
  bool phi_role() const;

  const std::vector<double>& knots() const;
  const std::vector<double>& values() const;
  /// Function a grid was sampled from; empty for knot data read from files.
  const std::function<double(double)>& sampled_from() const;
  const ConvexProfile& outer() const;
  const ConvexProfile& inner() const;

  std::string describe() const;

  friend ConvexProfile compose(const ConvexProfile& outer, const ConvexProfile& inner);

 private:
  struct GridData {
    std::vector<double> knots;
    std::vector<double> values;
    std::function<double(double)> exact;
  };
  ConvexProfile() = default;

  ProfileKind kind_ = ProfileKind::identity;
  double a_ = 0.0;
  double m_ = 0.0;
  std::shared_ptr<const GridData> grid_;
  std::shared_ptr<const ConvexProfile> outer_, inner_;
};

/// Psi = outer o inner. `inner` must play the cost role (non-negative, inner(0) = 0).
/// Compositions with the identity collapse to the other factor.
ConvexProfile compose(const ConvexProfile& outer, const ConvexProfile& inner);

/// Legendre-Fenchel conjugate sup_{t>0} s t - profile(t), for s >= 0.
/// Closed form for catalog entries; knot search plus golden-section refinement for
/// grids; golden-section search on the concave objective for compositions.
/// Returns +inf exactly for s > S.
Extended legendre(const ConvexProfile& profile, double s);

struct BiconjugateReport {
  double max_relative_error = 0.0;
  double worst_t = 0.0;
  std::size_t knots = 0;
  std::size_t slopes = 0;
};

/// sup over interior knots of |profile**(t) - profile(t)| / (1 + |profile(t)|) on
/// [0, t_max]. The first conjugate is `legendre` on a uniform slope grid four
/// times finer than the knots; the second is a discrete sup over that grid.
BiconjugateReport biconjugate_check(const ConvexProfile& profile, GridOptions opts = {});

struct CompositionConjugate {
  Extended value;
  double alpha = 0.0;  ///< minimising alpha; 0 when the value is +inf
};

/// inf_{alpha>0} Phi*(alpha) + alpha phi*(lambda/alpha), log-spaced alpha grid on
/// [1e-6, 1e6] at 60 points per decade (plus the edges of the finite region)
/// followed by golden-section refinement in log alpha.
CompositionConjugate conjugate_of_composition(const ConvexProfile& outer,
                                              const ConvexProfile& inner, double lambda);

/// sup{t >= 0 : profile(t) <= y}: 0 when profile(0) > y, +inf when y is never exceeded.
Extended generalized_inverse(const ConvexProfile& profile, double y);

}  // namespace funcineq
