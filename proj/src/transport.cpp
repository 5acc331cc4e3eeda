#include "funcineq/transport.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "funcineq/errors.hpp"
#include "funcineq/numerics.hpp"
#include "funcineq/parallel.hpp"

namespace funcineq {

Eigen::MatrixXd cost_matrix(const MetricMeasureSpace& space, const ConvexProfile& phi) {
  if (!phi.phi_role()) throw DomainError("cost profile must be non-negative with phi(0) = 0");
  const Index n = space.size();
  Eigen::MatrixXd c(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) c(i, j) = i == j ? 0.0 : phi(space.distance(i, j));
  return c;
}

namespace {

/// Spanning-tree basis of the transportation problem. Rows are nodes [0, m),
/// columns are nodes [m, m + n); every basic cell is a tree edge.
class TransportationSimplex {
 public:
  TransportationSimplex(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                        const Eigen::MatrixXd& cost)
      : m_(supply.size()),
        n_(demand.size()),
        cost_(cost),
        flow_(Eigen::MatrixXd::Zero(m_, n_)),
        basic_(m_, std::vector<bool>(static_cast<std::size_t>(n_), false)),
        adj_(static_cast<std::size_t>(m_ + n_)),
        u_(m_),
        v_(n_) {
    north_west_corner(supply, demand);
  }

  int solve() {
    const double scale = std::max(1.0, cost_.cwiseAbs().maxCoeff());
    const double tol = 1e-13 * scale;
    const long max_pivots = 200L * (m_ + n_) * (m_ + n_) + 1000;
    int pivots = 0;
    int degenerate_run = 0;
    for (;;) {
      compute_potentials();
      Index ei = -1, ej = -1;
      double best = -tol;
      const bool bland = degenerate_run > m_ + n_;
      for (Index i = 0; i < m_ && !(bland && ei >= 0); ++i)
        for (Index j = 0; j < n_; ++j) {
          if (basic_[i][j]) continue;
          const double r = cost_(i, j) - u_[i] - v_[j];
          if (r < best) {
            best = r;
            ei = i;
            ej = j;
            if (bland) break;
          }
        }
      if (ei < 0) break;
      if (++pivots > max_pivots) throw std::runtime_error("transportation simplex: pivot limit");
      const double theta = pivot(ei, ej, bland);
      degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
    }
    return pivots;
  }

  const Eigen::MatrixXd& flow() const { return flow_; }
  const Eigen::VectorXd& u() const { return u_; }
  const Eigen::VectorXd& v() const { return v_; }

 private:
  void add_basic(Index i, Index j) {
    basic_[i][j] = true;
    adj_[static_cast<std::size_t>(i)].push_back(m_ + j);
    adj_[static_cast<std::size_t>(m_ + j)].push_back(i);
  }

  void remove_basic(Index i, Index j) {
    basic_[i][j] = false;
    auto drop = [](std::vector<Index>& list, Index node) {
      list.erase(std::find(list.begin(), list.end(), node));
    };
    drop(adj_[static_cast<std::size_t>(i)], m_ + j);
    drop(adj_[static_cast<std::size_t>(m_ + j)], i);
  }

  void north_west_corner(Eigen::VectorXd supply, Eigen::VectorXd demand) {
    Index i = 0, j = 0;
    while (i < m_ && j < n_) {
      const double x = std::min(supply[i], demand[j]);
      flow_(i, j) = std::max(x, 0.0);
      add_basic(i, j);
      supply[i] -= x;
      demand[j] -= x;
      if (i == m_ - 1) {
        ++j;
      } else if (j == n_ - 1) {
        ++i;
      } else if (supply[i] <= demand[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void compute_potentials() {
    std::vector<bool> seen(static_cast<std::size_t>(m_ + n_), false);
    std::deque<Index> queue{0};
    seen[0] = true;
    u_[0] = 0.0;
    while (!queue.empty()) {
      const Index node = queue.front();
      queue.pop_front();
      for (Index next : adj_[static_cast<std::size_t>(node)]) {
        if (seen[static_cast<std::size_t>(next)]) continue;
        seen[static_cast<std::size_t>(next)] = true;
        if (node < m_)
          v_[next - m_] = cost_(node, next - m_) - u_[node];
        else
          u_[next] = cost_(next, node - m_) - v_[node - m_];
        queue.push_back(next);
      }
    }
  }

  /// Enters (ei, ej), pushes flow around the tree cycle and drops a blocking cell.
  double pivot(Index ei, Index ej, bool smallest_index_leaves) {
    // Tree path from column ej to row ei.
    std::vector<Index> parent(static_cast<std::size_t>(m_ + n_), -1);
    std::deque<Index> queue{m_ + ej};
    parent[static_cast<std::size_t>(m_ + ej)] = m_ + ej;
    while (!queue.empty()) {
      const Index node = queue.front();
      queue.pop_front();
      if (node == ei) break;
      for (Index next : adj_[static_cast<std::size_t>(node)]) {
        if (parent[static_cast<std::size_t>(next)] >= 0) continue;
        parent[static_cast<std::size_t>(next)] = node;
        queue.push_back(next);
      }
    }
    // Cells along the path, ordered from column ej; odd positions lose flow.
    std::vector<std::pair<Index, Index>> path;
    for (Index node = ei; node != m_ + ej; node = parent[static_cast<std::size_t>(node)]) {
      const Index prev = parent[static_cast<std::size_t>(node)];
      path.push_back(node < m_ ? std::pair{node, prev - m_} : std::pair{prev, node - m_});
    }
    std::reverse(path.begin(), path.end());
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = 0;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const auto [i, j] = path[k];
      const double x = flow_(i, j);
      const bool better = x < theta || (smallest_index_leaves && x == theta &&
                                        i * n_ + j < path[leave].first * n_ + path[leave].second);
      if (better) {
        theta = x;
        leave = k;
      }
    }
    flow_(ei, ej) += theta;
    for (std::size_t k = 0; k < path.size(); ++k) {
      const auto [i, j] = path[k];
      flow_(i, j) += (k % 2 == 0) ? -theta : theta;
    }
    const auto [li, lj] = path[leave];
    flow_(li, lj) = 0.0;
    remove_basic(li, lj);
    add_basic(ei, ej);
    return theta;
  }

  Index m_, n_;
  const Eigen::MatrixXd& cost_;
  Eigen::MatrixXd flow_;
  std::vector<std::vector<bool>> basic_;
  std::vector<std::vector<Index>> adj_;
  Eigen::VectorXd u_, v_;
};

}  // namespace

TransportPlan wasserstein(const Eigen::VectorXd& nu, const Eigen::VectorXd& mu,
                          const Eigen::MatrixXd& cost) {
  if (cost.rows() != nu.size() || cost.cols() != mu.size())
    throw InputError("wasserstein: cost shape does not match the marginals");
  check_probability(nu, nu.size(), "nu");
  check_probability(mu, mu.size(), "mu");
  if ((cost.array() < 0.0).any() || !cost.allFinite())
    throw InputError("wasserstein: cost must be finite and non-negative");

  TransportationSimplex simplex(nu, mu, cost);
  TransportPlan plan;
  plan.pivots = simplex.solve();
  plan.coupling = simplex.flow();
  plan.cost = (plan.coupling.array() * cost.array()).sum();
  plan.u = simplex.u();
  plan.v = simplex.v();
  plan.dual_value = nu.dot(plan.u) + mu.dot(plan.v);
  plan.duality_gap = plan.cost - plan.dual_value;
  plan.max_marginal_error = std::max((plan.coupling.rowwise().sum() - nu).cwiseAbs().maxCoeff(),
                                     (plan.coupling.colwise().sum().transpose() - mu).cwiseAbs().maxCoeff());
  double violation = 0.0;
  for (Index j = 0; j < cost.cols(); ++j)
    for (Index i = 0; i < cost.rows(); ++i)
      violation = std::max(violation, plan.u[i] + plan.v[j] - cost(i, j));
  plan.max_dual_violation = violation;
  return plan;
}

TransportPlan wasserstein(const MetricMeasureSpace& space, const Eigen::VectorXd& nu,
                          const Eigen::MatrixXd& cost) {
  return wasserstein(nu, space.weights(), cost);
}

Extended relative_entropy(const Eigen::VectorXd& nu, const Eigen::VectorXd& mu) {
  if (nu.size() != mu.size()) throw InputError("relative_entropy: measures differ in length");
  double acc = 0.0;
  for (Index i = 0; i < nu.size(); ++i) {
    if (nu[i] <= 0.0) continue;
    if (mu[i] <= 0.0) return Extended::infinity();
    acc += nu[i] * std::log(nu[i] / mu[i]);
  }
  return std::max(acc, 0.0);
}

DualityReport kantorovich_duality_check(const MetricMeasureSpace& space, const Eigen::VectorXd& nu,
                                        const Eigen::MatrixXd& cost,
                                        const std::vector<Field>& trial_fields, double trial_tol,
                                        double gap_tol) {
  const TransportPlan plan = wasserstein(space, nu, cost);
  const Eigen::VectorXd& mu = space.weights();
  DualityReport report;
  report.transport_cost = plan.cost;
  auto dual_value = [&](const Field& f) {
    double acc = 0.0;
    for (Index i = 0; i < cost.rows(); ++i) acc += nu[i] * (f + cost.row(i).transpose()).minCoeff();
    return acc - mu.dot(f);
  };
  report.max_trial_excess = -std::numeric_limits<double>::infinity();
  for (const Field& f : trial_fields) {
    if (f.size() != mu.size()) throw InputError("trial field length does not match the space");
    const double value = dual_value(f);
    report.trial_values.push_back(value);
    report.max_trial_excess = std::max(report.max_trial_excess, value - plan.cost);
  }
  // The LP potentials and their c-transform improvement both certify optimality.
  const double certified = std::max(plan.dual_value, dual_value(-plan.v));
  report.certificate_gap = plan.cost - certified;
  report.passed = (trial_fields.empty() || report.max_trial_excess <= trial_tol) &&
                  std::abs(report.certificate_gap) <= gap_tol &&
                  plan.max_dual_violation <= gap_tol && dual_value(-plan.v) <= plan.cost + trial_tol;
  return report;
}

std::vector<TEReport> te_check(const MetricMeasureSpace& space, const ConvexProfile& phi,
                               const ConvexProfile& Phi,
                               const std::vector<LabeledMeasure>& nu_family, double tol) {
  const Eigen::MatrixXd cost = cost_matrix(space, phi);
  std::vector<TEReport> reports(nu_family.size());
  parallel_for(nu_family.size(), [&](std::size_t k) {
    const auto& nu = nu_family[k];
    check_probability(nu.weights, space.size(), "nu");
    TEReport r;
    r.nu_id = nu.id;
    r.nu = nu.weights;
    r.transport_cost = wasserstein(space, nu.weights, cost).cost;
    r.entropy = relative_entropy(nu.weights, space.weights());
    r.bound = r.entropy.is_infinite() ? Extended::infinity()
                                      : generalized_inverse(Phi, r.entropy.value());
    r.margin = r.bound.is_infinite() ? Extended::infinity()
                                     : Extended(r.bound.value() - r.transport_cost);
    r.passed = r.bound.is_infinite() || r.transport_cost <= r.bound.value() + tol;
    reports[k] = std::move(r);
  });
  return reports;
}

JensenReport jensen_te_weakening_check(const MetricMeasureSpace& space, const ConvexProfile& phi,
                                       const ConvexProfile& Phi, const Eigen::VectorXd& nu,
                                       double tol) {
  const double w1 = wasserstein(space, nu, space.distance_matrix()).cost;
  const double w_phi = wasserstein(space, nu, cost_matrix(space, phi)).cost;
  JensenReport r;
  r.phi_of_w1 = phi(w1);
  r.w_phi = w_phi;
  r.jensen_holds = r.phi_of_w1 <= w_phi + tol;
  const Extended h = relative_entropy(nu, space.weights());
  r.weak_bound = h.is_infinite() ? Extended::infinity()
                                 : generalized_inverse(compose(Phi, phi), h.value());
  r.weak_te_holds = r.weak_bound.is_infinite() || w1 <= r.weak_bound.value() + tol;
  const Extended bound =
      h.is_infinite() ? Extended::infinity() : generalized_inverse(Phi, h.value());
  r.te_holds = bound.is_infinite() || w_phi <= bound.value() + tol;
  return r;
}

std::vector<LabeledMeasure> point_masses(const MetricMeasureSpace& space, int count) {
  const Index n = space.size();
  const Index k = count <= 0 ? n : std::min<Index>(count, n);
  std::vector<LabeledMeasure> out;
  for (Index i = 0; i < k; ++i)
    out.push_back({"delta:" + space.points()[static_cast<std::size_t>(i)],
                   Eigen::VectorXd::Unit(n, i)});
  return out;
}

std::vector<LabeledMeasure> exponential_tilts(const MetricMeasureSpace& space, const Field& g,
                                              const std::vector<double>& thetas) {
  check_field(space, g, false, "tilt field");
  const Eigen::VectorXd log_mu = space.weights().array().log().matrix();
  std::vector<LabeledMeasure> out;
  for (double theta : thetas) {
    const Eigen::VectorXd logits = log_mu + theta * g;
    Eigen::VectorXd w = (logits.array() - log_sum_exp(logits)).exp().matrix();
    w /= w.sum();
    out.push_back({"tilt:" + std::to_string(theta), std::move(w)});
  }
  return out;
}

std::vector<LabeledMeasure> dirichlet_measures(const MetricMeasureSpace& space, int count,
                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<LabeledMeasure> out;
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd w(space.size());
    for (Index i = 0; i < w.size(); ++i) w[i] = -std::log1p(-unit(rng));
    w /= w.sum();
    out.push_back({"dirichlet:" + std::to_string(k), std::move(w)});
  }
  return out;
}

}  // namespace funcineq
