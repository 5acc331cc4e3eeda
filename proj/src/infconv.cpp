#include "funcineq/infconv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "funcineq/errors.hpp"
#include "funcineq/numerics.hpp"

namespace funcineq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_one_lipschitz(const MetricMeasureSpace& space, const Field& f, const char* who) {
  const double lip = lipschitz_constant(space, f);
  if (lip > 1.0 + 1e-12)
    throw DomainError(std::string(who) + ": field is not 1-Lipschitz (constant " +
                      std::to_string(lip) + ")");
}

/// Slack allowed on a log-domain comparison whose right side is `right`.
double log_slack(double tol, double right) { return tol * (1.0 + std::abs(right)); }

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::vacuous:
      return "vacuous";
  }
  return "?";
}

Field inf_convolve(const Field& f, const Eigen::MatrixXd& cost) {
  if (cost.rows() != f.size() || cost.cols() != f.size())
    throw InputError("inf_convolve: cost shape does not match the field");
  Field out(f.size());
  for (Index i = 0; i < f.size(); ++i) out[i] = (f + cost.row(i).transpose()).minCoeff();
  return out;
}

Field inf_convolve(const MetricMeasureSpace& space, const Field& f, const ConvexProfile& phi) {
  check_field(space, f, false, "field");
  if (!phi.phi_role()) throw DomainError("inf_convolve: cost profile must vanish at 0");
  const Index n = space.size();
  Field out(n);
  for (Index i = 0; i < n; ++i) {
    double best = f[i];
    for (Index j = 0; j < n; ++j)
      if (j != i) best = std::min(best, f[j] + phi(space.distance(i, j)));
    out[i] = best;
  }
  return out;
}

bool ICReport::passed() const {
  return std::none_of(entries.begin(), entries.end(),
                      [](const ICEntry& e) { return e.verdict == Verdict::fail; });
}

std::size_t ICReport::vacuous_count() const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const ICEntry& e) {
    return e.verdict == Verdict::vacuous;
  }));
}

std::size_t ICReport::worst_entry() const {
  std::size_t worst = entries.size();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].margin.is_infinite()) continue;
    if (worst == entries.size() || entries[k].margin < entries[worst].margin) worst = k;
  }
  return worst;
}

std::vector<double> default_lambda_grid(Extended growth_rate) {
  const double hi = growth_rate.is_finite() ? std::min(0.99 * growth_rate.value(), 1e3) : 1e3;
  std::vector<double> grid = hi > 1e-3 ? log_space(1e-3, hi, 40) : log_space(1e-3 * hi, hi, 40);
  if (growth_rate.is_finite()) grid.push_back(1.01 * growth_rate.value());
  return grid;
}

ICReport ic_check(const MetricMeasureSpace& space, const ConvexProfile& phi,
                  const ConvexProfile& Phi, const Field& f, const std::vector<double>& lambdas,
                  double tol, std::string field_id) {
  const Field q = inf_convolve(space, f, phi);
  const double mean_f = space.mean(f);
  ICReport report{std::move(field_id), {}};
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw DomainError("ic_check: lambda must be positive");
    ICEntry e;
    e.lambda = lambda;
    e.log_left = log_mean_exp(space.weights(), (lambda * q).eval());
    const Extended conj = legendre(Phi, lambda);
    if (conj.is_infinite()) {
      e.right = Extended::infinity();
      e.margin = Extended::infinity();
      e.verdict = Verdict::vacuous;
    } else {
      const double right = lambda * mean_f + conj.value();
      e.right = right;
      e.margin = right - e.log_left;
      e.verdict = e.log_left <= right + log_slack(tol, right) ? Verdict::pass : Verdict::fail;
    }
    report.entries.push_back(e);
  }
  return report;
}

double chernoff_exponent(const ConvexProfile& Phi, double t) {
  const Extended S = Phi.growth_rate();
  const double hi = S.is_finite() ? S.value() : 1e8;
  const double lo = std::min(1e-8, 1e-8 * hi);
  const int count = static_cast<int>(std::ceil(60.0 * std::log10(hi / lo))) + 1;
  std::vector<double> grid = log_space(lo, hi, count);
  for (double& g : grid) g = std::log(g);
  auto objective = [&](double u) {
    const double lambda = std::min(std::exp(u), hi);
    return (legendre(Phi, lambda) - lambda * t).value();
  };
  const ScalarMinimum best = grid_then_golden(objective, grid, 1e-15);
  // lambda -> 0 recovers -Phi(0).
  return std::min(best.value, legendre(Phi, 0.0).value());
}

bool ConcentrationReport::passed() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const ConcentrationEntry& e) { return e.tail_ok && e.conjugacy_ok; });
}

ConcentrationReport ic_to_concentration(const MetricMeasureSpace& space, const ConvexProfile& Phi,
                                        const Field& f, const std::vector<double>& t_grid,
                                        double rel_tol) {
  check_field(space, f, false, "field");
  require_one_lipschitz(space, f, "ic_to_concentration");
  ConcentrationReport report;
  report.lipschitz = lipschitz_constant(space, f);
  const double mean_f = space.mean(f);
  for (double t : t_grid) {
    if (!(t > 0.0)) throw DomainError("ic_to_concentration: t must be positive");
    ConcentrationEntry e;
    e.t = t;
    for (Index i = 0; i < f.size(); ++i)
      if (f[i] >= mean_f + t) e.tail += space.weights()[i];
    e.chernoff = std::exp(chernoff_exponent(Phi, t));
    e.profile_bound = std::exp(-Phi(t));
    e.rel_error = std::abs(e.chernoff - e.profile_bound) / e.profile_bound;
    e.tail_ok = e.tail <= e.chernoff * (1.0 + 1e-12);
    e.conjugacy_ok = e.rel_error <= rel_tol;
    report.entries.push_back(e);
  }
  return report;
}

bool ReductionReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const ReductionEntry& e) {
    return e.direct != Verdict::fail && e.alpha_route != Verdict::fail && e.routes_agree;
  });
}

ReductionReport ic_reduction_check(const MetricMeasureSpace& space, const ConvexProfile& phi,
                                   const ConvexProfile& Phi, const Field& f,
                                   const std::vector<double>& lambdas, double tol,
                                   double agree_tol) {
  check_field(space, f, false, "field");
  require_one_lipschitz(space, f, "ic_reduction_check");
  const ConvexProfile psi = compose(Phi, phi);
  const Field q_d = inf_convolve(space, f, ConvexProfile::identity());
  const double mean_f = space.mean(f);
  ReductionReport report;
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw DomainError("ic_reduction_check: lambda must be positive");
    ReductionEntry e;
    e.lambda = lambda;
    e.log_left = log_mean_exp(space.weights(), (lambda * q_d).eval());

    const Extended direct_conj = legendre(psi, lambda);
    const CompositionConjugate via_alpha = conjugate_of_composition(Phi, phi, lambda);
    e.alpha = via_alpha.alpha;
    if (direct_conj.is_infinite()) {
      e.direct_right = Extended::infinity();
      e.direct = Verdict::vacuous;
    } else {
      const double right = lambda * mean_f + direct_conj.value();
      e.direct_right = right;
      e.direct = e.log_left <= right + log_slack(tol, right) ? Verdict::pass : Verdict::fail;
    }
    if (via_alpha.value.is_infinite()) {
      e.alpha_right = Extended::infinity();
      e.alpha_route = Verdict::vacuous;
    } else {
      const double right = lambda * mean_f + via_alpha.value.value();
      e.alpha_right = right;
      // (phi, Phi) inequality for the field (lambda / alpha) f at parameter alpha.
      const ICReport ic = ic_check(space, phi, Phi, ((lambda / e.alpha) * f).eval(), {e.alpha}, tol);
      const bool chained = e.log_left <= right + log_slack(tol, right);
      e.alpha_route = ic.passed() && chained ? Verdict::pass : Verdict::fail;
    }
    if (direct_conj.is_infinite() || via_alpha.value.is_infinite()) {
      e.routes_agree = direct_conj.is_infinite() == via_alpha.value.is_infinite();
    } else {
      const double a = direct_conj.value(), b = via_alpha.value.value();
      e.routes_agree = std::abs(a - b) <= agree_tol * std::max(1.0, std::abs(a));
    }
    report.entries.push_back(e);
  }
  return report;
}

EquivalenceReport prop_equivalence_smoke(const MetricMeasureSpace& space, const ConvexProfile& phi,
                                         const ConvexProfile& Phi,
                                         const std::vector<LabeledMeasure>& nu_family,
                                         const std::vector<Field>& f_family,
                                         const std::vector<double>& lambdas, double tol) {
  const Eigen::MatrixXd cost = cost_matrix(space, phi);
  const Eigen::VectorXd& mu = space.weights();
  EquivalenceReport report;

  std::vector<TransportPlan> plans;
  plans.reserve(nu_family.size());
  for (const auto& nu : nu_family) plans.push_back(wasserstein(space, nu.weights, cost));

  auto ic_fails = [&](const Field& q, double mean_f, double lambda, double& excess) {
    const Extended conj = legendre(Phi, lambda);
    if (conj.is_infinite()) return false;
    const double left = log_mean_exp(mu, (lambda * q).eval());
    const double right = lambda * mean_f + conj.value();
    excess = left - right;
    return excess > lambda * tol + log_slack(1e-10, right);
  };
  auto te_bound = [&](const Eigen::VectorXd& nu) {
    const Extended h = relative_entropy(nu, mu);
    return std::pair{h, h.is_infinite() ? Extended::infinity() : generalized_inverse(Phi, h.value())};
  };

  // IC side: every (f, lambda) pair, with the Gibbs-tilted witness nu ~ exp(lambda Q f) mu.
  for (std::size_t fi = 0; fi < f_family.size(); ++fi) {
    const Field& f = f_family[fi];
    const Field q = inf_convolve(f, cost);
    const double mean_f = mu.dot(f);
    for (double lambda : lambdas) {
      for (std::size_t k = 0; k < nu_family.size(); ++k) {
        ++report.chain_checks;
        const double lhs = lambda * (nu_family[k].weights.dot(q) - mean_f);
        if (lhs > lambda * plans[k].cost + tol * (1.0 + std::abs(lhs))) ++report.chain_violations;
      }
      double excess = 0.0;
      const bool ic_failed = ic_fails(q, mean_f, lambda, excess);
      if (legendre(Phi, lambda).is_infinite()) continue;
      if (ic_failed) ++report.ic_failures;

      const Eigen::VectorXd logits = mu.array().log().matrix() + lambda * q;
      Eigen::VectorXd tilted = (logits.array() - log_sum_exp(logits)).exp().matrix();
      tilted /= tilted.sum();
      const double w = wasserstein(space, tilted, cost).cost;
      const auto [h, bound] = te_bound(tilted);
      const bool te_ok = bound.is_infinite() || w <= bound.value() + tol;
      ++report.tilt_pairs;
      if (te_ok && ic_failed) {
        ++report.tilt_inconsistencies;
        std::ostringstream os;
        os << "tilt: f#" << fi << " lambda=" << lambda << " IC excess " << excess
           << " while TE holds at the tilted measure";
        report.witnesses.push_back(os.str());
      }
      if (ic_failed) {
        std::ostringstream os;
        os << "ic-fail: f#" << fi << " lambda=" << lambda << " excess " << excess
           << (te_ok ? "" : "; tilted measure violates TE");
        report.witnesses.push_back(os.str());
      }
    }
  }

  // TE side: each nu against its Kantorovich potential f_nu = -v at the optimal lambda.
  const Extended S = Phi.growth_rate();
  const double hi = S.is_finite() ? S.value() : 1e6;
  std::vector<double> log_grid = log_space(std::min(1e-6, 1e-6 * hi), hi, 721);
  for (double& g : log_grid) g = std::log(g);
  for (std::size_t k = 0; k < nu_family.size(); ++k) {
    const auto& nu = nu_family[k].weights;
    const double w = plans[k].cost;
    const auto [h, bound] = te_bound(nu);
    const bool te_ok = bound.is_infinite() || w <= bound.value() + tol;
    if (!te_ok) {
      ++report.te_failures;
      std::ostringstream os;
      os << "te-fail: " << nu_family[k].id << " W=" << w << " bound=" << bound;
      report.witnesses.push_back(os.str());
    }
    if (h.is_infinite()) continue;
    const ScalarMinimum best = grid_then_golden(
        [&](double u) {
          const double lambda = std::min(std::exp(u), hi);
          return ((h.value() + legendre(Phi, lambda)) / lambda).value();
        },
        log_grid, 1e-15);
    if (!std::isfinite(best.value)) continue;
    const double lambda_star = std::min(std::exp(best.x), hi);
    const Field f_nu = -plans[k].v;
    const Field q = inf_convolve(f_nu, cost);
    double excess = 0.0;
    const double ic_slack = lambda_star * tol + log_slack(1e-10, lambda_star * mu.dot(f_nu));
    const bool ic_failed = ic_fails(q, mu.dot(f_nu), lambda_star, excess);
    ++report.potential_pairs;
    const double implied = best.value + ic_slack / lambda_star;
    if (!ic_failed && !te_ok && w > std::max(implied, bound.value()) + tol) {
      ++report.potential_inconsistencies;
      std::ostringstream os;
      os << "potential: " << nu_family[k].id << " IC holds at lambda*=" << lambda_star
         << " but W=" << w << " exceeds " << bound;
      report.witnesses.push_back(os.str());
    }
  }
  return report;
}

}  // namespace funcineq
