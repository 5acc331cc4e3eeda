#include "funcineq/batteries.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "funcineq/convex.hpp"
#include "funcineq/errors.hpp"
#include "funcineq/functionals.hpp"
#include "funcineq/infconv.hpp"
#include "funcineq/numerics.hpp"
#include "funcineq/reverse_holder.hpp"
#include "funcineq/space.hpp"
#include "funcineq/transport.hpp"

namespace funcineq {

namespace {

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

CriterionResult start(int id, const char* name, double budget) {
  CriterionResult r;
  r.id = id;
  r.name = name;
  r.budget_seconds = budget;
  r.passed = true;
  return r;
}

}  // namespace

CriterionResult criterion_convex_calculus() {
  CriterionResult r = start(1, "convex calculus", 5.0);
  const GridOptions opts{100.0, 1e-4};
  const std::vector<ConvexProfile> catalog = {
      ConvexProfile::identity(), ConvexProfile::quadratic(1.0), ConvexProfile::phi1_scaled(1.0),
      ConvexProfile::linear_offset(0.5, 2.0)};
  for (const auto& prof : catalog) {
    const BiconjugateReport rep = biconjugate_check(prof, opts);
    const bool ok = rep.max_relative_error <= 1e-6;
    r.passed = r.passed && ok;
    r.details.push_back(fmt("biconjugate %s: max rel error %.3e at t=%.4f (%s)",
                            prof.describe().c_str(), rep.max_relative_error, rep.worst_t,
                            ok ? "ok" : "FAIL"));
  }

  const std::vector<std::pair<ConvexProfile, ConvexProfile>> pairs = {
      {ConvexProfile::identity(), ConvexProfile::quadratic(1.0)},
      {ConvexProfile::identity(), ConvexProfile::phi1_scaled(0.25)},
      {ConvexProfile::quadratic(1.0), ConvexProfile::identity()},
      {ConvexProfile::quadratic(2.0), ConvexProfile::quadratic(0.5)},
      {ConvexProfile::quadratic(1.0), ConvexProfile::phi1_scaled(1.0)},
      {ConvexProfile::linear_offset(0.5, 2.0), ConvexProfile::quadratic(1.0)},
      {ConvexProfile::linear_offset(0.5, 2.0), ConvexProfile::phi1_scaled(1.0)},
      {ConvexProfile::phi1_scaled(1.0), ConvexProfile::quadratic(3.0)},
  };
  for (const auto& [outer, inner] : pairs) {
    const ConvexProfile psi = compose(outer, inner);
    const Extended S = psi.growth_rate();
    const double hi = S.is_finite() ? 0.98 * S.value() : 10.0;
    double worst = 0.0;
    for (double lambda : log_space(1e-2, hi, 20)) {
      const Extended direct = legendre(psi, lambda);
      const Extended via = conjugate_of_composition(outer, inner, lambda).value;
      double err = 0.0;
      if (direct.is_infinite() || via.is_infinite())
        err = direct.is_infinite() == via.is_infinite() ? 0.0 : INFINITY;
      else
        err = std::abs(direct.value() - via.value()) / std::max(std::abs(direct.value()), 1e-12);
      worst = std::max(worst, err);
    }
    const bool ok = worst <= 1e-6;
    r.passed = r.passed && ok;
    r.details.push_back(fmt("composition %s o %s: max rel error %.3e over 20 lambdas (%s)",
                            outer.describe().c_str(), inner.describe().c_str(), worst,
                            ok ? "ok" : "FAIL"));
  }
  return r;
}

CriterionResult criterion_transport_exactness() {
  CriterionResult r = start(2, "transport exactness", 10.0);
  double worst_gap = 0.0, worst_excess = -INFINITY;
  int failures = 0;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const int n = 2 + k % 19;
    const MetricMeasureSpace space = random_space(n, 1000 + static_cast<std::uint64_t>(k));
    const ConvexProfile phi = k % 2 ? ConvexProfile::quadratic(1.0) : ConvexProfile::identity();
    const Eigen::MatrixXd cost = cost_matrix(space, phi);
    const Eigen::VectorXd nu =
        dirichlet_measures(space, 1, 5000 + static_cast<std::uint64_t>(k)).front().weights;
    std::vector<Field> trials;
    for (int t = 0; t < 100; ++t) {
      Field f(n);
      for (Index i = 0; i < n; ++i) f[i] = unif(rng);
      trials.push_back(f);
    }
    const TransportPlan plan = wasserstein(space, nu, cost);
    const DualityReport dual = kantorovich_duality_check(space, nu, cost, trials, 1e-9, 1e-8);
    worst_gap = std::max(worst_gap, std::abs(plan.duality_gap));
    worst_excess = std::max(worst_excess, dual.max_trial_excess);
    if (std::abs(plan.duality_gap) > 1e-8 || dual.max_trial_excess > 1e-9) ++failures;
  }
  r.passed = failures == 0;
  r.details.push_back(fmt("50 random spaces: worst primal-dual gap %.3e (limit 1e-8)", worst_gap));
  r.details.push_back(
      fmt("5000 trial fields: max (dual value - W) %.3e (limit 1e-9), failures %d", worst_excess,
          failures));
  return r;
}

CriterionResult criterion_gaussian_tightness() {
  CriterionResult r = start(3, "gaussian tightness", 5.0);
  const MetricMeasureSpace line = discretize_line(LineDensity::gaussian, 8.0, 0.0025);
  const double L = 1.0;
  const Field f = (L * line.coordinate()).array().exp().matrix();
  for (double p : {0.5, 1.0, 2.0}) {
    const double measured = std::exp(log_lp_norm(line, f, p) - log_lp_norm(line, f, 0.0));
    const double oracle = std::exp(p * L * L / 2.0);
    const RHConstant c = thm_main_constant(ConvexProfile::quadratic(1.0), L, p);
    const double err_oracle = rel_diff(measured, oracle);
    const double err_const = rel_diff(measured, c.value().value());
    const RHVerification v = rh_verify(line, f, p, c, kLineTolerance);
    const bool ok = err_oracle <= 1e-3 && err_const <= 1e-3 && v.verdict == Verdict::pass;
    r.passed = r.passed && ok;
    r.details.push_back(fmt("p=%.1f: ratio %.9f, exp(pL^2/2) %.9f, constant %.9f, rel err %.2e (%s)",
                            p, measured, oracle, c.value().value(), err_oracle,
                            ok ? "ok" : "FAIL"));
  }
  return r;
}

CriterionResult criterion_exponential_line() {
  CriterionResult r = start(4, "exponential line", 5.0);
  const MetricMeasureSpace line = discretize_line(LineDensity::two_sided_exponential, 40.0, 0.01);
  const double L = 0.25, lambda_1 = 0.25;
  const Field f = (L * line.coordinate()).array().exp().matrix();
  for (double p : {0.25, 0.5, 1.0, 1.5, 1.9}) {
    const double measured = std::exp(log_lp_norm(line, f, p) - log_lp_norm(line, f, 0.0));
    const double u = p * L;
    const double oracle = std::pow(1.0 - u * u, -1.0 / p);
    const RHConstant c = thm_poincare_constant(lambda_1, L, p);
    const double bound = c.value().value();
    const double err = rel_diff(measured, oracle);
    const bool ok = err <= 1e-3 && measured < bound && oracle < bound;
    r.passed = r.passed && ok;
    r.details.push_back(fmt("p=%.2f: ratio %.8f, oracle %.8f (rel err %.2e), bound %.8f, margin "
                            "%.3e (%s)",
                            p, measured, oracle, err, bound, bound - measured, ok ? "ok" : "FAIL"));
  }
  return r;
}

CriterionResult criterion_main_chain() {
  CriterionResult r = start(5, "moment comparison chain", 30.0);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int ic_passed = 0, counterexamples = 0, vacuous = 0;
  for (int k = 0; k < 100; ++k) {
    const int n = 4 + k % 9;
    const MetricMeasureSpace space = random_space(n, 300 + static_cast<std::uint64_t>(k));
    const double D = space.diameter();
    Field g(n);
    for (Index i = 0; i < n; ++i) g[i] = 4.0 * unif(rng) - 2.0;
    const Field log_f = lipschitz_regularize(space, g, 0.5 + 2.5 * unif(rng));
    const Field f = log_f.array().exp().matrix();
    const double L = log_lipschitz_constant(space, f);
    const double p = 0.2 + 1.8 * unif(rng);

    ConvexProfile phi = ConvexProfile::identity(), Phi = ConvexProfile::identity();
    switch (k % 4) {
      case 0:  // bounded-diameter sub-Gaussian concentration
        Phi = ConvexProfile::quadratic((1.0 + 3.0 * unif(rng)) / (D * D));
        break;
      case 1:
        phi = ConvexProfile::quadratic(0.5 + 3.5 * unif(rng));
        break;
      case 2:
        phi = ConvexProfile::phi1_scaled(0.5 + 3.5 * unif(rng));
        break;
      default:
        phi = ConvexProfile::phi1_scaled(1.0 + unif(rng));
        Phi = ConvexProfile::quadratic((1.0 + 3.0 * unif(rng)) / (D * D));
        break;
    }
    const CompositionConjugate cc = conjugate_of_composition(Phi, phi, p * L);
    if (cc.value.is_infinite()) {
      ++vacuous;
      continue;
    }
    const double lambda = cc.alpha, alpha = p / lambda;
    const ICReport plus = ic_check(space, phi, Phi, (alpha * log_f).eval(), {lambda});
    const ICReport minus = ic_check(space, phi, Phi, (-alpha * log_f).eval(), {lambda});
    if (!plus.passed() || !minus.passed()) continue;
    ++ic_passed;
    const RHVerification v = rh_verify(space, f, p, thm_main_constant(compose(Phi, phi), L, p));
    if (v.verdict == Verdict::fail) {
      ++counterexamples;
      r.details.push_back(fmt("counterexample: instance %d p=%.4f log ratio %.6e > log C %.6e", k,
                              p, std::max(v.log_ratio_plus, v.log_ratio_minus),
                              v.log_constant.value()));
    }
  }
  r.passed = counterexamples == 0 && ic_passed > 0;
  r.details.push_back(fmt("100 instances: %d with IC holding on the chain fields, %d with infinite "
                          "constant, %d counterexamples",
                          ic_passed, vacuous, counterexamples));
  return r;
}

CriterionResult criterion_lb_reduction() {
  CriterionResult r = start(6, "one-sided profile bound", 10.0);
  const MetricMeasureSpace line = discretize_line(LineDensity::gaussian, 8.0, 0.01);
  const Field x = line.coordinate();

  {
    const double L = 1.0;
    const Field f = (L * x).array().exp().matrix();
    LogLipProfile prof{Eigen::VectorXd::Constant(line.size(), L), Eigen::VectorXd::Zero(line.size())};
    for (const auto& [phi, Phi, p] :
         {std::tuple{ConvexProfile::quadratic(1.0), ConvexProfile::identity(), 0.5},
          std::tuple{ConvexProfile::quadratic(1.0), ConvexProfile::quadratic(1.0), 1.5}}) {
      const LbBound b = thm_Lb_bound(line, phi, Phi, f, prof, p);
      const RHConstant c = thm_main_constant(compose(Phi, phi), L, p);
      const double err = rel_diff(b.value().value(), c.value().value());
      const bool ok = b.log_value.is_finite() && err <= 1e-2;
      r.passed = r.passed && ok;
      r.details.push_back(fmt("constant profile (%s, %s), p=%.1f: bound %.8f vs constant %.8f, rel "
                              "diff %.2e (%s)",
                              phi.describe().c_str(), Phi.describe().c_str(), p,
                              b.value().value(), c.value().value(), err, ok ? "ok" : "FAIL"));
    }
  }

  const Field f = (0.5 * x.cwiseAbs2()).array().exp().matrix();
  const LogLipProfile prof = extract_one_sided_profile(line, f, ProfileMode::b_zero);
  {
    const LbBound b =
        thm_Lb_bound(line, ConvexProfile::identity(), ConvexProfile::identity(), f, prof, 0.5);
    const bool ok = b.log_value.is_infinite();
    r.passed = r.passed && ok;
    r.details.push_back(fmt("phi = Id, unbounded L (max %.3f): bound %s (%s)", prof.L.maxCoeff(),
                            b.log_value.is_infinite() ? "inf" : "finite", ok ? "ok" : "FAIL"));
  }
  {
    const double p = 0.5;
    const LbBound b =
        thm_Lb_bound(line, ConvexProfile::quadratic(0.9), ConvexProfile::identity(), f, prof, p);
    const double ratio = std::exp(log_lp_norm(line, f, p) - log_lp_norm(line, f, 0.0));
    const bool ok = b.log_value.is_finite() && ratio <= b.value().value() * (1.0 + 1e-9);
    r.passed = r.passed && ok;
    r.details.push_back(fmt("f = exp(x^2/2), phi quadratic(0.9), p=0.5: ratio %.6f <= bound %.6e "
                            "(gamma %.4f, alpha %.4e) (%s)",
                            ratio, b.log_value.is_finite() ? b.value().value() : INFINITY,
                            b.gamma, b.alpha, ok ? "ok" : "FAIL"));
  }
  return r;
}

CriterionResult criterion_derivative_identity() {
  CriterionResult r = start(7, "derivative identity", 2.0);
  struct Case {
    std::string name;
    MetricMeasureSpace space;
    Field f;
  };
  std::vector<Case> cases;
  const MetricMeasureSpace line = discretize_line(LineDensity::gaussian, 8.0, 0.01);
  const Field x = line.coordinate();
  cases.push_back({"gaussian exp(x)", line, x.array().exp().matrix()});
  cases.push_back({"gaussian exp(sin 3x)", line, (3.0 * x).array().sin().exp().matrix()});
  cases.push_back({"gaussian 1+x^2", line, (1.0 + x.array().square()).matrix()});
  const MetricMeasureSpace exp_line =
      discretize_line(LineDensity::two_sided_exponential, 20.0, 0.01);
  cases.push_back({"exponential exp(x/4)", exp_line,
                   (0.25 * exp_line.coordinate()).array().exp().matrix()});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.1, 3.0);
  for (int k = 0; k < 4; ++k) {
    const MetricMeasureSpace space = random_space(12, 40 + static_cast<std::uint64_t>(k));
    Field f(space.size());
    for (Index i = 0; i < f.size(); ++i) f[i] = unif(rng);
    cases.push_back({"random#" + std::to_string(k), space, f});
  }
  double worst = 0.0;
  int failures = 0;
  for (const auto& c : cases)
    for (double t : {-2.0, -0.5, 0.5, 1.0, 2.0}) {
      const DerivativeReport d = moment_log_derivative_check(c.space, c.f, t, 1e-4, 1e-5);
      worst = std::max(worst, d.rel_error);
      if (!d.passed) {
        ++failures;
        r.details.push_back(fmt("%s t=%.1f: rel error %.3e", c.name.c_str(), t, d.rel_error));
      }
    }
  r.passed = failures == 0;
  r.details.push_back(fmt("%zu fields x 5 exponents at h=1e-4: max rel error %.3e (limit 1e-5)",
                          cases.size(), worst));
  return r;
}

CriterionResult criterion_markov_conjugacy() {
  CriterionResult r = start(8, "markov-chebyshev conjugacy", 2.0);
  const std::vector<ConvexProfile> catalog = {
      ConvexProfile::identity(), ConvexProfile::quadratic(1.0), ConvexProfile::quadratic(0.5),
      ConvexProfile::phi1_scaled(1.0), ConvexProfile::phi1_scaled(4.0),
      ConvexProfile::linear_offset(0.5, 2.0)};
  for (const auto& Phi : catalog) {
    double worst = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double t = 0.1 * k;
      const double chernoff = std::exp(chernoff_exponent(Phi, t));
      worst = std::max(worst, rel_diff(chernoff, std::exp(-Phi(t))));
    }
    const bool ok = worst <= 1e-6;
    r.passed = r.passed && ok;
    r.details.push_back(fmt("%s: max rel error %.3e over t = 0.1..5 (%s)", Phi.describe().c_str(),
                            worst, ok ? "ok" : "FAIL"));
  }
  return r;
}

CriterionResult criterion_limits() {
  CriterionResult r = start(9, "limits", 1.0);
  auto check = [&](bool ok, std::string line) {
    r.passed = r.passed && ok;
    r.details.push_back(line + (ok ? " (ok)" : " (FAIL)"));
  };
  const double c_main = thm_main_constant(ConvexProfile::quadratic(1.0), 1.0, 1e-6).value().value();
  check(c_main <= 1.0 + 1e-4, fmt("thm_main quadratic(1), L=1, p=1e-6: %.12f", c_main));
  double previous = INFINITY;
  bool monotone = true;
  for (double gap : {1e-1, 1e-3, 1e-6, 1e-9}) {
    const double c = thm_1_1_constant(0.25, 1.0, 0.3 - gap, 0.3).value().value();
    monotone = monotone && c < previous;
    previous = c;
  }
  check(monotone && previous <= 1.0 + 1e-6,
        fmt("thm_1_1 lambda1=1/4, L=1, q -> p=0.3: %.12f at gap 1e-9", previous));
  const double lambda_1 = 0.25, L = 1.0;
  const double p = 2.0 * std::sqrt(lambda_1) * (1.0 - 1e-7) / L;
  const double c_poin = thm_poincare_constant(lambda_1, L, p).value().value();
  check(c_poin > 1e6, fmt("thm_poincare at pL = 2 sqrt(lambda1)(1 - 1e-7): %.6e", c_poin));
  return r;
}

CriterionResult criterion_discrete_diagnostics() {
  CriterionResult r = start(10, "discrete diagnostics", 10.0);
  Eigen::MatrixXd d(2, 2);
  d << 0, 1, 1, 0;
  const MetricMeasureSpace two = MetricMeasureSpace::from_distances(
      {"a", "b"}, d, Eigen::Vector2d(0.5, 0.5), {{0, 1}});
  const PoincareEstimate e2 = estimate_poincare_discrete(two);
  const bool ok2 = std::abs(e2.max_form - 4.0) <= 1e-12 && std::abs(e2.relaxed - 4.0) <= 1e-12;
  r.passed = ok2;
  r.details.push_back(fmt("two-point space: lambda1 estimate %.15f (relaxed %.15f) (%s)",
                          e2.max_form, e2.relaxed, ok2 ? "ok" : "FAIL"));
  const MetricMeasureSpace path = discretize_line(LineDensity::gaussian, 8.0, 0.02);
  const PoincareEstimate eg = estimate_poincare_discrete(path);
  const bool okg = std::abs(eg.max_form - 1.0) <= 0.05;
  r.passed = r.passed && okg;
  r.details.push_back(fmt("gaussian path grid (%ld points): lambda1 estimate %.6f (relaxed %.6f) (%s)",
                          static_cast<long>(path.size()), eg.max_form, eg.relaxed,
                          okg ? "ok" : "FAIL"));
  r.details.push_back(eg.caveat);
  return r;
}

std::vector<Criterion> all_criteria() {
  return {criterion_convex_calculus,     criterion_transport_exactness,
          criterion_gaussian_tightness,  criterion_exponential_line,
          criterion_main_chain,          criterion_lb_reduction,
          criterion_derivative_identity, criterion_markov_conjugacy,
          criterion_limits,              criterion_discrete_diagnostics};
}

std::vector<std::string> preset_names() {
  return {"convex-calculus", "gaussian-line", "exponential-line", "random-finite"};
}

std::vector<Criterion> preset_criteria(const std::string& preset) {
  if (preset == "convex-calculus")
    return {criterion_convex_calculus, criterion_markov_conjugacy, criterion_limits};
  if (preset == "gaussian-line")
    return {criterion_gaussian_tightness, criterion_lb_reduction, criterion_derivative_identity,
            criterion_discrete_diagnostics};
  if (preset == "exponential-line") return {criterion_exponential_line};
  if (preset == "random-finite") return {criterion_transport_exactness, criterion_main_chain};
  throw InputError("unknown preset '" + preset + "'");
}

CriterionResult run_timed(const Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r = c();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.seconds > r.budget_seconds) {
    r.passed = false;
    r.details.push_back(fmt("runtime %.2f s exceeds the %.0f s budget", r.seconds, r.budget_seconds));
  }
  return r;
}

std::string summary_line(const CriterionResult& r) {
  return fmt("[%s] %2d %s (%.2f s / %.0f s)", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
             r.seconds, r.budget_seconds);
}

}  // namespace funcineq
