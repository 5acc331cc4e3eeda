#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "funcineq/convex.hpp"
#include "funcineq/extended.hpp"
#include "funcineq/space.hpp"

namespace funcineq {

/// c_ij = phi(d(x_i, x_j)) for a cost-role profile phi.
Eigen::MatrixXd cost_matrix(const MetricMeasureSpace& space, const ConvexProfile& phi);

/// Optimal coupling of (nu, mu) with its dual certificate.
///
/// Rows are indexed by the source measure nu, columns by the target mu. The
/// potentials satisfy u_i + v_j <= c_ij (up to `max_dual_violation`) with equality
/// on the support of the coupling.
struct TransportPlan {
  Eigen::MatrixXd coupling;
  double cost = 0.0;
  Eigen::VectorXd u;  ///< potential paired with nu
  Eigen::VectorXd v;  ///< potential paired with mu
  double dual_value = 0.0;
  double duality_gap = 0.0;
  double max_marginal_error = 0.0;
  double max_dual_violation = 0.0;
  int pivots = 0;
};

/// Exact transportation simplex (north-west corner start, MODI pivoting).
TransportPlan wasserstein(const Eigen::VectorXd& nu, const Eigen::VectorXd& mu,
                          const Eigen::MatrixXd& cost);

/// W_c(nu, mu) with mu the space's weights.
TransportPlan wasserstein(const MetricMeasureSpace& space, const Eigen::VectorXd& nu,
                          const Eigen::MatrixXd& cost);

/// H(nu | mu) = sum nu log(nu / mu), 0 log 0 = 0, +inf when nu charges a mu-null point.
Extended relative_entropy(const Eigen::VectorXd& nu, const Eigen::VectorXd& mu);

struct DualityReport {
  double transport_cost = 0.0;
  std::vector<double> trial_values;  ///< int Q_c f dnu - int f dmu per trial field
  double max_trial_excess = 0.0;     ///< max(trial - W), <= tolerance when the check passes
  double certificate_gap = 0.0;      ///< W minus the dual value of the LP potentials
  bool passed = false;
};

DualityReport kantorovich_duality_check(const MetricMeasureSpace& space, const Eigen::VectorXd& nu,
                                        const Eigen::MatrixXd& cost,
                                        const std::vector<Field>& trial_fields,
                                        double trial_tol = 1e-9, double gap_tol = 1e-8);

/// A probability vector with a label used in reports.
struct LabeledMeasure {
  std::string id;
  Eigen::VectorXd weights;
};

struct TEReport {
  std::string nu_id;
  Eigen::VectorXd nu;
  double transport_cost = 0.0;  ///< W_{c_phi}(nu, mu)
  Extended entropy;             ///< H(nu | mu)
  Extended bound;               ///< Phi^{-1}(H)
  Extended margin;              ///< bound - W (+inf when the bound is)
  bool passed = false;
};

/// Transport-entropy check W_{c_phi}(nu, mu) <= Phi^{-1}(H(nu|mu)) + tol for each nu.
std::vector<TEReport> te_check(const MetricMeasureSpace& space, const ConvexProfile& phi,
                               const ConvexProfile& Phi,
                               const std::vector<LabeledMeasure>& nu_family, double tol = 1e-9);

struct JensenReport {
  double phi_of_w1 = 0.0;   ///< phi(W_d(nu, mu))
  double w_phi = 0.0;       ///< W_{c_phi}(nu, mu)
  bool jensen_holds = false;
  /// The weakened inequality W_d <= (Phi o phi)^{-1}(H) implied by the TE inequality.
  Extended weak_bound;
  bool weak_te_holds = false;
  bool te_holds = false;
};

JensenReport jensen_te_weakening_check(const MetricMeasureSpace& space, const ConvexProfile& phi,
                                       const ConvexProfile& Phi, const Eigen::VectorXd& nu,
                                       double tol = 1e-9);

/// Point masses at the first `count` points (all points when count <= 0).
std::vector<LabeledMeasure> point_masses(const MetricMeasureSpace& space, int count = 0);

/// mu tilted by exp(theta g), one measure per theta.
std::vector<LabeledMeasure> exponential_tilts(const MetricMeasureSpace& space, const Field& g,
                                              const std::vector<double>& thetas);

/// Symmetric Dirichlet(1) random measures, deterministic per seed.
std::vector<LabeledMeasure> dirichlet_measures(const MetricMeasureSpace& space, int count,
                                               std::uint64_t seed);

}  // namespace funcineq
