#include "funcineq/reverse_holder.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "funcineq/errors.hpp"
#include "funcineq/numerics.hpp"

namespace funcineq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

constexpr const char* kDiagnosticCaveat =
    "diagnostic: the metric gradient vanishes on finite spaces; this uses the edge-neighbour "
    "max-slope surrogate";

}  // namespace

const char* to_string(Theorem t) {
  switch (t) {
    case Theorem::herbst_ls:
      return "herbst_ls";
    case Theorem::thm_1_1:
      return "thm_1_1";
    case Theorem::thm_main:
      return "thm_main";
    case Theorem::thm_Lb:
      return "thm_Lb";
    case Theorem::thm_poincare:
      return "thm_poincare";
    case Theorem::exp_nontight:
      return "exp_nontight";
  }
  return "?";
}

RHConstant herbst_ls_constant(double lambda_ls, double L, double p) {
  require(p > 0.0, "herbst_ls_constant: p must be positive");
  RHConstant c = herbst_ls_constant(lambda_ls, L, 0.0, p);
  c.parameters.erase("q");
  return c;
}

RHConstant herbst_ls_constant(double lambda_ls, double L, double q, double p) {
  require(lambda_ls > 0.0, "herbst_ls_constant: lambda_LS must be positive");
  require(L >= 0.0, "herbst_ls_constant: L must be non-negative");
  require(q <= p, "herbst_ls_constant: need q <= p");
  RHConstant c;
  c.theorem = Theorem::herbst_ls;
  c.parameters = {{"lambda_LS", lambda_ls}, {"L", L}, {"q", q}, {"p", p}};
  c.log_value = L * L * (p - q) / (2.0 * lambda_ls);
  return c;
}

double k_function(double lambda_1, double ell) {
  const double r = 2.0 * std::sqrt(lambda_1);
  require(lambda_1 > 0.0 && ell >= 0.0 && ell < r, "k_function: need 0 <= l < 2 sqrt(lambda_1)");
  const double ratio = (r + ell) / (r - ell);
  return ratio * ratio * std::exp(ell * std::sqrt(5.0) / lambda_1) / (2.0 * lambda_1);
}

RHConstant thm_1_1_constant(double lambda_1, double L, double q, double p) {
  require(lambda_1 > 0.0, "thm_1_1_constant: lambda_1 must be positive");
  require(L >= 0.0, "thm_1_1_constant: L must be non-negative");
  require(q <= p, "thm_1_1_constant: need q <= p");
  RHConstant c;
  c.theorem = Theorem::thm_1_1;
  c.parameters = {{"lambda_1", lambda_1}, {"L", L}, {"q", q}, {"p", p}};
  if (L == 0.0 || q == p) {
    c.log_value = 0.0;
    return c;
  }
  const double edge = 2.0 * std::sqrt(lambda_1) / L;
  if (!(q > -edge && p < edge))
    throw DomainError("thm_1_1_constant: (q, p) = (" + fmt(q) + ", " + fmt(p) +
                      ") outside the window (-" + fmt(edge) + ", " + fmt(edge) + ")");
  const double cap = 0.999 * edge;
  auto clamp = [&](double x, const char* name) {
    if (std::abs(x) <= cap) return x;
    c.warnings.push_back(std::string(name) + " clamped to 0.999 of the admissible window");
    return std::copysign(cap, x);
  };
  const double lo = clamp(q, "q"), hi = clamp(p, "p");
  auto integrand = [&](double t) { return k_function(lambda_1, std::abs(t) * L); };
  double integral = 0.0;
  // The |t| kink at the origin is kept on a panel boundary.
  if (lo < 0.0 && hi > 0.0) {
    integral = adaptive_simpson(integrand, lo, 0.0, 5e-11).value +
               adaptive_simpson(integrand, 0.0, hi, 5e-11).value;
  } else {
    integral = adaptive_simpson(integrand, lo, hi, 1e-10).value;
  }
  c.log_value = L * L * integral;
  return c;
}

RHConstant thm_main_constant(const ConvexProfile& psi, double L, double p) {
  require(p > 0.0, "thm_main_constant: p must be positive");
  require(L >= 0.0, "thm_main_constant: L must be non-negative");
  RHConstant c;
  c.theorem = Theorem::thm_main;
  c.parameters = {{"L", L}, {"p", p}};
  c.profile = psi.describe();
  c.log_value = legendre(psi, p * L) / p;
  if (!psi.tight()) c.warnings.push_back("profile is not tight; constant does not tend to 1");
  return c;
}

LbBound thm_Lb_bound(const MetricMeasureSpace& space, const ConvexProfile& phi,
                     const ConvexProfile& Phi, const Field& f, const LogLipProfile& profile,
                     double p) {
  require(p > 0.0, "thm_Lb_bound: p must be positive");
  check_field(space, f, true, "field");
  const Index n = space.size();
  if (profile.L.size() != n || profile.b.size() != n)
    throw InputError("thm_Lb_bound: profile length does not match the space");
  require(profile.L.minCoeff() >= 0.0 && profile.b.minCoeff() >= 0.0,
          "thm_Lb_bound: L and b must be non-negative");
  const double scale = 1.0 + f.array().log().abs().maxCoeff();
  const double violation = one_sided_violation(space, f, profile);
  if (violation > 1e-9 * scale)
    throw DomainError("thm_Lb_bound: one-sided log-Lipschitz condition violated by " +
                      fmt(violation));

  const Eigen::VectorXd& mu = space.weights();
  Eigen::VectorXd h(n);
  // Log of the bound at gamma = 1 + e^u, alpha = e^v.
  auto objective = [&](double u, double v) {
    const double gamma = 1.0 + std::exp(u), alpha = std::exp(v);
    const Extended outer = legendre(Phi, p * gamma / alpha);
    if (outer.is_infinite()) return kInf;
    for (Index i = 0; i < n; ++i) {
      const Extended inner = legendre(phi, alpha * profile.L[i]);
      if (inner.is_infinite()) return kInf;
      h[i] = (inner.value() + alpha * profile.b[i]) / alpha;
    }
    const double r = p * gamma / (gamma - 1.0);
    return outer.value() / (p * gamma) + log_mean_exp(mu, (r * h).eval()) / r;
  };

  const std::vector<double> gm1 = log_space(1e-4, 1e2, 50);
  const std::vector<double> alphas = log_space(1e-4, 1e4, 80);
  double best = kInf, bu = 0.0, bv = 0.0;
  for (double g : gm1)
    for (double a : alphas) {
      const double val = objective(std::log(g), std::log(a));
      if (val < best) best = val, bu = std::log(g), bv = std::log(a);
    }
  LbBound out;
  if (!std::isfinite(best)) {
    out.log_value = Extended::infinity();
    return out;
  }

  // Coordinate descent in (log(gamma - 1), log lambda) with lambda = p gamma / alpha: the
  // finiteness constraint on Phi* is then axis-aligned and the descent cannot stall on it.
  auto in_lambda = [&](double u, double w) {
    return objective(u, std::log(p * (1.0 + std::exp(u))) - w);
  };
  double bw = std::log(p * (1.0 + std::exp(bu))) - bv;
  const double du = std::log(1e6) / 49.0, dw = std::log(1e8) / 79.0;
  const double u_lo = std::log(1e-12), u_hi = std::log(1e3);
  for (int it = 0; it < 200; ++it) {
    const double before = best;
    const ScalarMinimum mu_u = golden_section_minimize(
        [&](double u) { return in_lambda(u, bw); }, std::max(u_lo, bu - du),
        std::min(u_hi, bu + du), 1e-10);
    if (mu_u.value < best) best = mu_u.value, bu = mu_u.x;
    const ScalarMinimum mu_w = golden_section_minimize(
        [&](double w) { return in_lambda(bu, w); }, bw - dw, bw + dw, 1e-10);
    if (mu_w.value < best) best = mu_w.value, bw = mu_w.x;
    out.refinements = it + 1;
    if (before - best <= 1e-9 * std::max(1.0, std::abs(best))) break;
  }
  bv = std::log(p * (1.0 + std::exp(bu))) - bw;
  out.log_value = best;
  out.gamma = 1.0 + std::exp(bu);
  out.alpha = std::exp(bv);
  return out;
}

RHConstant thm_poincare_constant(double lambda_1, double L, double p) {
  require(lambda_1 > 0.0, "thm_poincare_constant: lambda_1 must be positive");
  require(L >= 0.0, "thm_poincare_constant: L must be non-negative");
  require(p > 0.0, "thm_poincare_constant: p must be positive");
  RHConstant c;
  c.theorem = Theorem::thm_poincare;
  c.parameters = {{"lambda_1", lambda_1}, {"L", L}, {"p", p}};
  const double u = p * L / (2.0 * std::sqrt(lambda_1));
  if (!(u < 1.0))
    throw DomainError("thm_poincare_constant: p = " + fmt(p) + " outside (0, " +
                      fmt(2.0 * std::sqrt(lambda_1) / L) + ")");
  c.log_value = (std::log1p(u) - std::log1p(-u)) / p;
  return c;
}

NontightConstants exp_nontight_constants(double M, double lambda_exp, double L, double p) {
  require(M >= 0.0, "exp_nontight_constants: M must be non-negative");
  require(lambda_exp > 0.0, "exp_nontight_constants: lambda_exp must be positive");
  require(L >= 0.0, "exp_nontight_constants: L must be non-negative");
  require(p > 0.0 && p * L <= lambda_exp,
          "exp_nontight_constants: p must lie in (0, lambda_exp / L]");
  NontightConstants out;
  out.displayed.theorem = Theorem::exp_nontight;
  out.displayed.parameters = {{"M", M}, {"lambda_exp", lambda_exp}, {"L", L}, {"p", p}};
  out.displayed.log_value = M;
  out.theorem_main = thm_main_constant(ConvexProfile::linear_offset(M, lambda_exp), L, p);
  out.theorem_main.theorem = Theorem::exp_nontight;
  out.theorem_main.parameters = out.displayed.parameters;
  if (std::abs(out.theorem_main.log_value.value() - M) > 1e-15 * std::max(1.0, M)) {
    const std::string note = "uniform exp(M) and exp(Psi*(pL)/p) = exp(M/p) differ at this p";
    out.displayed.warnings.push_back(note);
    out.theorem_main.warnings.push_back(note);
  }
  return out;
}

RHVerification rh_verify(const MetricMeasureSpace& space, const Field& f, double p,
                         const RHConstant& constant, double tol, std::string field_id) {
  require(p > 0.0, "rh_verify: p must be positive");
  require(tol > 0.0, "rh_verify: tolerance must be positive");
  check_field(space, f, true, "field");
  RHVerification v;
  v.field_id = std::move(field_id);
  v.p = p;
  v.tolerance = tol;
  const double lp = log_lp_norm(space, f, p), l0 = log_lp_norm(space, f, 0.0),
               lm = log_lp_norm(space, f, -p);
  v.log_ratio_plus = lp - l0;
  v.log_ratio_minus = l0 - lm;
  v.log_constant = constant.log_value;
  v.worst_side = v.log_ratio_plus >= v.log_ratio_minus ? "+p" : "-p";
  if (constant.log_value.is_infinite()) {
    v.margin = Extended::infinity();
    v.verdict = Verdict::vacuous;
    return v;
  }
  const double log_c = constant.log_value.value();
  const double worst = std::max(v.log_ratio_plus, v.log_ratio_minus);
  v.margin = log_c - worst;
  v.verdict = worst <= log_c + std::log1p(tol) ? Verdict::pass : Verdict::fail;
  return v;
}

Eigen::VectorXd discrete_gradient(const MetricMeasureSpace& space, const Field& g) {
  check_field(space, g, false, "field");
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(space.size());
  for (const auto& [i, j] : space.edges()) {
    const double slope = std::abs(g[i] - g[j]) / space.distance(i, j);
    grad[i] = std::max(grad[i], slope);
    grad[j] = std::max(grad[j], slope);
  }
  return grad;
}

namespace {

bool edge_graph_connected(const MetricMeasureSpace& space) {
  const Index n = space.size();
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  Index components = n;
  for (const auto& [i, j] : space.edges()) {
    const Index a = find(i), b = find(j);
    if (a != b) parent[a] = b, --components;
  }
  return components == 1;
}

/// Second generalized eigenpair of (A, diag(mu)).
std::pair<double, Eigen::VectorXd> second_eigenpair(const Eigen::MatrixXd& A,
                                                    const Eigen::VectorXd& mu) {
  const Eigen::VectorXd s = mu.array().rsqrt().matrix();
  const Eigen::MatrixXd C = s.asDiagonal() * A * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(C);
  if (solver.info() != Eigen::Success) throw DomainError("eigen-solve did not converge");
  return {solver.eigenvalues()[1], s.asDiagonal() * solver.eigenvectors().col(1)};
}

double max_form_quotient(const MetricMeasureSpace& space, const Field& f) {
  const Eigen::VectorXd grad = discrete_gradient(space, f);
  const double var = variance(space, f);
  return space.weights().dot(grad.cwiseAbs2()) / var;
}

}  // namespace

PoincareEstimate estimate_poincare_discrete(const MetricMeasureSpace& space) {
  if (!space.has_edges()) throw DomainError("estimate_poincare_discrete: space has no edges");
  const Index n = space.size();
  if (n > 2000) throw DomainError("estimate_poincare_discrete: at most 2000 points supported");
  PoincareEstimate est;
  est.caveat = kDiagnosticCaveat;
  if (!edge_graph_connected(space)) {
    est.warnings.push_back("edge graph is disconnected; estimate is 0");
    est.minimizer = Eigen::VectorXd::Zero(n);
    return est;
  }
  const Eigen::VectorXd& mu = space.weights();

  // Root-sum-square relaxation: each edge is counted from both endpoints.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  auto add_edge = [](Eigen::MatrixXd& M, Index i, Index j, double w) {
    M(i, i) += w;
    M(j, j) += w;
    M(i, j) -= w;
    M(j, i) -= w;
  };
  for (const auto& [i, j] : space.edges()) {
    const double d = space.distance(i, j);
    add_edge(A, i, j, (mu[i] + mu[j]) / (d * d));
  }
  auto [relaxed, f] = second_eigenpair(A, mu);
  est.relaxed = relaxed;
  est.minimizer = f;
  est.max_form = max_form_quotient(space, f);

  // Polish: freeze each point's steepest neighbour and re-solve the resulting
  // quadratic form; a small multiple of A keeps the graph connected.
  for (int it = 0; it < 6; ++it) {
    Eigen::MatrixXd B = 1e-3 * A;
    for (Index i = 0; i < n; ++i) {
      Index arg = -1;
      double best = -1.0;
      for (const auto& [a, b] : space.edges()) {
        if (a != i && b != i) continue;
        const Index j = a == i ? b : a;
        const double slope = std::abs(est.minimizer[j] - est.minimizer[i]) / space.distance(i, j);
        if (slope > best) best = slope, arg = j;
      }
      const double d = space.distance(i, arg);
      add_edge(B, i, arg, mu[i] / (d * d));
    }
    const Eigen::VectorXd candidate = second_eigenpair(B, mu).second;
    const double q = max_form_quotient(space, candidate);
    est.polish_iterations = it + 1;
    if (!(q < est.max_form * (1.0 - 1e-12))) break;
    est.max_form = q;
    est.minimizer = candidate;
  }
  return est;
}

ModifiedLSReport modified_ls_diagnostic(const MetricMeasureSpace& space, const Field& g,
                                        double lambda_1) {
  if (!space.has_edges()) throw DomainError("modified_ls_diagnostic: space has no edges");
  require(lambda_1 > 0.0, "modified_ls_diagnostic: lambda_1 must be positive");
  ModifiedLSReport rep;
  rep.caveat = kDiagnosticCaveat;
  const Eigen::VectorXd grad = discrete_gradient(space, g);
  rep.ell = grad.maxCoeff();
  const double window = 2.0 * std::sqrt(lambda_1);
  if (!(rep.ell < window))
    throw DomainError("modified_ls_diagnostic: max gradient " + fmt(rep.ell) +
                      " is not below 2 sqrt(lambda_1) = " + fmt(window));
  rep.k_value = k_function(lambda_1, rep.ell);
  // Work with e^{g - max g}; both sides scale by the same factor.
  const double shift = g.maxCoeff();
  const Eigen::VectorXd h = (g.array() - shift).exp().matrix();
  const double ent = entropy(space, h);
  const double energy = rep.k_value * space.weights().dot(grad.cwiseAbs2().cwiseProduct(h));
  rep.entropy = std::exp(shift) * ent;
  rep.energy = std::exp(shift) * energy;
  if (energy > 0.0) rep.ratio = ent / energy;
  return rep;
}

}  // namespace funcineq
