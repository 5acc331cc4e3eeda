#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "funcineq/convex.hpp"
#include "funcineq/extended.hpp"
#include "funcineq/space.hpp"
#include "funcineq/transport.hpp"

namespace funcineq {

/// (Q_c f)(x_i) = min_j f_j + c_ij.
Field inf_convolve(const Field& f, const Eigen::MatrixXd& cost);

/// Q_{c_phi} f with c = phi o d evaluated on the fly (no n x n matrix).
Field inf_convolve(const MetricMeasureSpace& space, const Field& f, const ConvexProfile& phi);

enum class Verdict { pass, fail, vacuous };

const char* to_string(Verdict v);

struct ICEntry {
  double lambda = 0.0;
  double log_left = 0.0;  ///< log int exp(lambda Q f) dmu
  Extended right;         ///< lambda int f dmu + Phi*(lambda)
  Extended margin;        ///< right - log_left
  Verdict verdict = Verdict::pass;
};

struct ICReport {
  std::string field_id;
  std::vector<ICEntry> entries;

  /// No entry failed (vacuous entries do not count as failures).
  bool passed() const;
  std::size_t vacuous_count() const;
  /// Entry with the smallest finite margin; entries.size() when none is finite.
  std::size_t worst_entry() const;
};

/// 40 log-spaced lambdas on (1e-3, min(0.99 S, 1e3)) plus one sentinel past S when S is finite.
std::vector<double> default_lambda_grid(Extended growth_rate);

/// Infimum-convolution inequality int exp(lambda Q_{c_phi} f) <= exp(lambda int f + Phi*(lambda))
/// at every lambda of the grid, compared in the log domain.
ICReport ic_check(const MetricMeasureSpace& space, const ConvexProfile& phi,
                  const ConvexProfile& Phi, const Field& f, const std::vector<double>& lambdas,
                  double tol = 1e-9, std::string field_id = "f");

struct ConcentrationEntry {
  double t = 0.0;
  double tail = 0.0;          ///< mu{f >= int f + t}
  double chernoff = 0.0;      ///< inf_lambda exp(Phi*(lambda) - lambda t)
  double profile_bound = 0.0; ///< exp(-Phi(t))
  double rel_error = 0.0;     ///< |chernoff - profile_bound| / profile_bound
  bool tail_ok = false;
  bool conjugacy_ok = false;
};

struct ConcentrationReport {
  double lipschitz = 0.0;
  std::vector<ConcentrationEntry> entries;
  bool passed() const;
};

/// Markov-Chebyshev route from an infimum-convolution profile to tail bounds.
/// Throws DomainError when f is not 1-Lipschitz.
ConcentrationReport ic_to_concentration(const MetricMeasureSpace& space, const ConvexProfile& Phi,
                                        const Field& f, const std::vector<double>& t_grid,
                                        double rel_tol = 1e-6);

/// inf over lambda > 0 of Phi*(lambda) - lambda t (log of the Chernoff bound).
double chernoff_exponent(const ConvexProfile& Phi, double t);

struct ReductionEntry {
  double lambda = 0.0;
  double log_left = 0.0;      ///< log int exp(lambda Q_d f)
  Extended direct_right;      ///< lambda int f + (Phi o phi)*(lambda)
  Extended alpha_right;       ///< lambda int f + Phi*(alpha) + alpha phi*(lambda / alpha)
  double alpha = 0.0;
  Verdict direct = Verdict::pass;
  Verdict alpha_route = Verdict::pass;  ///< IC at (alpha, (lambda/alpha) f) chained to the bound
  bool routes_agree = false;
};

struct ReductionReport {
  std::vector<ReductionEntry> entries;
  bool passed() const;
};

/// Verifies the (Id, Phi o phi) inequality for a 1-Lipschitz f directly and by
/// applying the (phi, Phi) inequality to (lambda/alpha) f at the optimising alpha.
ReductionReport ic_reduction_check(const MetricMeasureSpace& space, const ConvexProfile& phi,
                                   const ConvexProfile& Phi, const Field& f,
                                   const std::vector<double>& lambdas, double tol = 1e-9,
                                   double agree_tol = 1e-6);

struct EquivalenceReport {
  std::size_t chain_checks = 0;
  std::size_t chain_violations = 0;       ///< lambda(int Qf dnu - int f dmu) > lambda W
  std::size_t tilt_pairs = 0;             ///< (f, lambda) pairs with a tilted witness
  std::size_t tilt_inconsistencies = 0;   ///< TE holds at nu_{lambda,f} but IC fails at (f, lambda)
  std::size_t potential_pairs = 0;        ///< nu with a Kantorovich-potential witness
  std::size_t potential_inconsistencies = 0;  ///< IC holds at (f_nu, lambda*) but TE fails at nu
  std::size_t ic_failures = 0;
  std::size_t te_failures = 0;
  std::vector<std::string> witnesses;     ///< descriptions of failing instances
  bool consistent() const {
    return chain_violations == 0 && tilt_inconsistencies == 0 && potential_inconsistencies == 0;
  }
};

/// Instance-wise cross-check of the infimum-convolution and transport-entropy forms.
EquivalenceReport prop_equivalence_smoke(const MetricMeasureSpace& space, const ConvexProfile& phi,
                                         const ConvexProfile& Phi,
                                         const std::vector<LabeledMeasure>& nu_family,
                                         const std::vector<Field>& f_family,
                                         const std::vector<double>& lambdas, double tol = 1e-9);

}  // namespace funcineq
