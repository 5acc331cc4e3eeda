#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "funcineq/convex.hpp"
#include "funcineq/extended.hpp"
#include "funcineq/functionals.hpp"
#include "funcineq/infconv.hpp"
#include "funcineq/space.hpp"

namespace funcineq {

enum class Theorem { herbst_ls, thm_1_1, thm_main, thm_Lb, thm_poincare, exp_nontight };

const char* to_string(Theorem t);

/// A moment-comparison constant C with ||f||_p <= C ||f||_0 <= C^2 ||f||_{-p}.
struct RHConstant {
  Theorem theorem = Theorem::thm_main;
  std::map<std::string, double> parameters;
  std::string profile;          ///< description of the profile(s) involved, if any
  Extended log_value;           ///< log C >= 0
  std::vector<std::string> warnings;

  Extended value() const { return exp(log_value); }
};

/// exp(L^2 p / (2 lambda_LS)).
RHConstant herbst_ls_constant(double lambda_ls, double L, double p);
/// exp(L^2 (p - q) / (2 lambda_LS)), comparing ||f||_p with ||f||_q.
RHConstant herbst_ls_constant(double lambda_ls, double L, double q, double p);

/// K(l) = (1 / (2 lambda_1)) ((2 sqrt(lambda_1) + l) / (2 sqrt(lambda_1) - l))^2 exp(l sqrt(5) / lambda_1).
double k_function(double lambda_1, double ell);

/// exp(L^2 int_q^p K(|t| L) dt) for -2 sqrt(lambda_1)/L < q <= p < 2 sqrt(lambda_1)/L.
/// Endpoints beyond 0.999 of the window are clamped with a warning.
RHConstant thm_1_1_constant(double lambda_1, double L, double q, double p);

/// exp(Psi*(p L) / p); +inf exactly when the conjugate is.
RHConstant thm_main_constant(const ConvexProfile& psi, double L, double p);

struct LbBound {
  Extended log_value;   ///< log of the optimised bound
  double gamma = 0.0;   ///< optimising gamma > 1 (0 when the bound is +inf)
  double alpha = 0.0;   ///< optimising alpha > 0 (0 when the bound is +inf)
  int refinements = 0;  ///< coordinate-descent sweeps performed
  Extended value() const { return exp(log_value); }
};

/// Bound on ||f||_p / ||f||_0 from one-sided log-Lipschitz data (L(x), b(x)):
///   inf_{gamma>1, alpha>0} exp(Phi*(p gamma/alpha) / (p gamma))
///                          * || exp((phi*(alpha L) + alpha b) / alpha) ||_{p gamma / (gamma - 1)}.
/// Throws DomainError when `profile` does not satisfy the one-sided condition for f.
LbBound thm_Lb_bound(const MetricMeasureSpace& space, const ConvexProfile& phi,
                     const ConvexProfile& Phi, const Field& f, const LogLipProfile& profile,
                     double p);

/// ((2 sqrt(lambda_1) + p L) / (2 sqrt(lambda_1) - p L))^{1/p} for 0 < p < 2 sqrt(lambda_1)/L.
RHConstant thm_poincare_constant(double lambda_1, double L, double p);

/// Non-tight exponential profile Phi(t) = -M + lambda_exp t with phi = Id: the uniform
/// constant exp(M) and the value exp(M / p) obtained from exp(Psi*(pL)/p).
struct NontightConstants {
  RHConstant displayed;
  RHConstant theorem_main;
};

NontightConstants exp_nontight_constants(double M, double lambda_exp, double L, double p);

struct RHVerification {
  std::string field_id;
  double p = 0.0;
  double log_ratio_plus = 0.0;   ///< log(||f||_p / ||f||_0)
  double log_ratio_minus = 0.0;  ///< log(||f||_0 / ||f||_{-p})
  Extended log_constant;
  double tolerance = 0.0;        ///< relative slack allowed on each ratio
  Extended margin;               ///< min over both sides of log C - log ratio
  std::string worst_side;        ///< "+p" or "-p"
  Verdict verdict = Verdict::pass;

  double ratio_plus() const { return std::exp(log_ratio_plus); }
  double ratio_minus() const { return std::exp(log_ratio_minus); }
};

/// Relative tolerance for exact finite spaces and for discretised lines.
inline constexpr double kExactTolerance = 1e-9;
inline constexpr double kLineTolerance = 1e-3;

/// Measures both moment ratios of a positive f exactly and compares them with C.
/// An infinite constant gives a vacuous verdict.
RHVerification rh_verify(const MetricMeasureSpace& space, const Field& f, double p,
                         const RHConstant& constant, double tol = kExactTolerance,
                         std::string field_id = "f");

struct PoincareEstimate {
  double relaxed = 0.0;   ///< generalized eigenvalue of the root-sum-square energy
  double max_form = 0.0;  ///< Rayleigh quotient of the max-slope energy after polishing
  Eigen::VectorXd minimizer;
  int polish_iterations = 0;
  std::vector<std::string> warnings;
  std::string caveat;
};

/// Discrete-gradient surrogate for the Poincare constant on an edge graph.
/// Diagnostic only. A disconnected graph yields 0 with a warning.
PoincareEstimate estimate_poincare_discrete(const MetricMeasureSpace& space);

/// Max-slope discrete gradient |grad g|(x) = max over edge neighbours |g(y) - g(x)| / d(x, y).
Eigen::VectorXd discrete_gradient(const MetricMeasureSpace& space, const Field& g);

struct ModifiedLSReport {
  double ell = 0.0;          ///< max discrete gradient of g
  double k_value = 0.0;      ///< K(ell)
  double entropy = 0.0;      ///< Ent(e^g)
  double energy = 0.0;       ///< K(ell) int |grad g|^2 e^g
  std::optional<double> ratio;  ///< entropy / energy; empty for 0/0
  std::string caveat;
};

/// Both sides of Ent(e^g) <= K(ell) int |grad g|^2 e^g dmu with the discrete gradient.
/// Throws DomainError when ell >= 2 sqrt(lambda_1).
ModifiedLSReport modified_ls_diagnostic(const MetricMeasureSpace& space, const Field& g,
                                        double lambda_1);

}  // namespace funcineq
