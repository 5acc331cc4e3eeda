#include "funcineq/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "funcineq/batteries.hpp"
#include "funcineq/convex.hpp"
#include "funcineq/errors.hpp"
#include "funcineq/functionals.hpp"
#include "funcineq/infconv.hpp"
#include "funcineq/io.hpp"
#include "funcineq/numerics.hpp"
#include "funcineq/reverse_holder.hpp"
#include "funcineq/space.hpp"
#include "funcineq/transport.hpp"

namespace funcineq::cli {

namespace {

using io::Json;
using io::to_json;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, sep);) parts.push_back(item);
  return parts;
}

double number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw InputError(what + ": '" + text + "' is not a number");
  return v;
}

/// "a,b,c", "lin:lo:hi:n" or "log:lo:hi:n"; must be non-empty and strictly increasing.
std::vector<double> parse_grid(const std::string& spec, const std::string& what) {
  std::vector<double> grid;
  const auto parts = split(spec, ':');
  if (parts.size() == 4 && (parts[0] == "lin" || parts[0] == "log")) {
    const double lo = number(parts[1], what), hi = number(parts[2], what);
    const double n = number(parts[3], what);
    if (!(n >= 2 && n == std::floor(n)) || !(lo < hi) || (parts[0] == "log" && !(lo > 0.0)))
      throw InputError(what + ": bad range '" + spec + "'");
    grid = parts[0] == "lin" ? lin_space(lo, hi, static_cast<int>(n))
                             : log_space(lo, hi, static_cast<int>(n));
  } else {
    for (const auto& item : split(spec, ',')) grid.push_back(number(item, what));
  }
  if (grid.empty()) throw InputError(what + ": empty grid");
  if (!std::is_sorted(grid.begin(), grid.end()) ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end())
    throw InputError(what + ": grid must be strictly increasing");
  return grid;
}

/// File path or generator: gaussian:<hw>:<step>, exponential:<hw>:<step>, random:<n>:<seed>.
MetricMeasureSpace load_space(const std::string& spec) {
  const auto parts = split(spec, ':');
  try {
    if (parts.size() == 3 && (parts[0] == "gaussian" || parts[0] == "exponential"))
      return discretize_line(
          parts[0] == "gaussian" ? LineDensity::gaussian : LineDensity::two_sided_exponential,
          number(parts[1], "--space"), number(parts[2], "--space"));
    if (parts.size() == 3 && parts[0] == "random") {
      const double n = number(parts[1], "--space"), seed = number(parts[2], "--space");
      if (n != std::floor(n) || seed < 0 || seed != std::floor(seed))
        throw InputError("--space: random:<n>:<seed> needs integers");
      return random_space(static_cast<int>(n), static_cast<std::uint64_t>(seed));
    }
  } catch (const std::domain_error& e) {
    throw InputError(std::string("--space: ") + e.what());
  }
  return io::read_space(spec);
}

struct NamedField {
  std::string id;
  ScalarField field;
};

/// File path or coordinate expression: coord (x), exp-coord:<L> (e^{L x}),
/// exp-coord2:<c> (e^{c x^2}).
NamedField load_field(const std::string& spec, const MetricMeasureSpace& space) {
  const auto parts = split(spec, ':');
  auto x = [&] {
    if (!space.coordinates()) throw InputError("field '" + spec + "' needs a coordinate space");
    return space.coordinate();
  };
  if (parts.size() == 1 && parts[0] == "coord") return {spec, {x(), false}};
  if (parts.size() == 2 && parts[0] == "exp-coord")
    return {spec, {(number(parts[1], "--field") * x()).array().exp().matrix(), true}};
  if (parts.size() == 2 && parts[0] == "exp-coord2")
    return {spec, {(number(parts[1], "--field") * x().cwiseAbs2()).array().exp().matrix(), true}};
  return {spec, io::read_field(spec, space)};
}

void emit(const std::string& out_path, const std::string& content, std::ostream& out) {
  if (out_path.empty())
    out << content;
  else
    io::write_atomic(out_path, content);
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

std::string plain(double v) {
  if (!std::isfinite(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string plain(Extended e) { return e.is_infinite() ? "inf" : plain(e.value()); }

Json header(const char* command) {
  Json doc;
  doc["schema"] = 1;
  doc["command"] = command;
  return doc;
}

Json extended_or_null(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

// ---------------------------------------------------------------------------

struct Common {
  std::string out_path;
  std::string format;
};

int cmd_validate(const std::string& space_spec, const std::vector<std::string>& fields,
                 const std::vector<std::string>& profiles, const Common& c, std::ostream& out) {
  const MetricMeasureSpace space = load_space(space_spec);
  Json doc = header("validate");
  doc["space"] = {{"points", space.size()},
                  {"diameter", space.diameter()},
                  {"min_weight", space.weights().minCoeff()},
                  {"edges", space.edges().size()}};
  Json jf = Json::array();
  for (const auto& spec : fields) {
    const NamedField f = load_field(spec, space);
    jf.push_back({{"id", f.id}, {"length", f.field.values.size()}, {"positive", f.field.positive}});
  }
  doc["fields"] = jf;
  Json jp = Json::array();
  for (const auto& spec : profiles) {
    const ConvexProfile prof = io::parse_profile(spec);
    jp.push_back({{"spec", spec},
                  {"profile", prof.describe()},
                  {"growth_rate", to_json(prof.growth_rate())},
                  {"tight", prof.tight()}});
  }
  doc["profiles"] = jp;
  doc["valid"] = true;
  emit(c.out_path, dump(doc), out);
  return kOk;
}

int cmd_legendre(const std::string& profile_spec, const std::string& inner_spec,
                 const std::string& s_grid, bool biconjugate, double t_max, double step,
                 const Common& c, std::ostream& out) {
  const ConvexProfile outer = io::parse_profile(profile_spec);
  std::optional<ConvexProfile> inner;
  if (!inner_spec.empty()) inner = io::parse_profile(inner_spec);
  const ConvexProfile prof = inner ? compose(outer, *inner) : outer;
  std::vector<double> slopes;
  if (!s_grid.empty()) slopes = parse_grid(s_grid, "--s");
  if (slopes.empty() && !biconjugate) throw InputError("legendre: give --s and/or --biconjugate");
  for (double s : slopes)
    if (s < 0.0) throw InputError("--s: slopes must be non-negative");

  struct Row {
    double s;
    Extended value;
    std::optional<CompositionConjugate> via;
  };
  std::vector<Row> rows;
  for (double s : slopes) {
    Row r{s, legendre(prof, s), {}};
    if (inner) r.via = conjugate_of_composition(outer, *inner, s);
    rows.push_back(r);
  }
  std::optional<BiconjugateReport> bic;
  if (biconjugate) bic = biconjugate_check(prof, GridOptions{t_max, step});

  if (c.format == "csv") {
    std::ostringstream os;
    os << (inner ? "s,value,alpha_route,alpha\n" : "s,value\n");
    for (const auto& r : rows) {
      os << plain(r.s) << ',' << plain(r.value);
      if (r.via) os << ',' << plain(r.via->value) << ',' << plain(r.via->alpha);
      os << '\n';
    }
    emit(c.out_path, os.str(), out);
    return kOk;
  }
  Json doc = header("legendre");
  doc["profile"] = prof.describe();
  doc["growth_rate"] = to_json(prof.growth_rate());
  Json values = Json::array();
  for (const auto& r : rows) {
    Json e = {{"s", r.s}, {"value", to_json(r.value)}};
    if (r.via) {
      e["alpha_route"] = to_json(r.via->value);
      e["alpha"] = r.via->alpha;
    }
    values.push_back(e);
  }
  doc["values"] = values;
  if (bic)
    doc["biconjugate"] = {{"max_relative_error", bic->max_relative_error},
                          {"worst_t", bic->worst_t},
                          {"knots", bic->knots},
                          {"slopes", bic->slopes}};
  emit(c.out_path, dump(doc), out);
  return kOk;
}

/// point:<k>, dirichlet:<seed>, or a measure file.
LabeledMeasure load_measure(const std::string& spec, const MetricMeasureSpace& space) {
  const auto parts = split(spec, ':');
  if (parts.size() == 2 && parts[0] == "point") {
    const double k = number(parts[1], "--nu");
    if (k < 0 || k >= static_cast<double>(space.size()) || k != std::floor(k))
      throw InputError("--nu: point index out of range");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(space.size());
    w[static_cast<Index>(k)] = 1.0;
    return {"delta:" + space.points()[static_cast<std::size_t>(k)], w};
  }
  if (parts.size() == 2 && parts[0] == "dirichlet") {
    const double seed = number(parts[1], "--nu");
    if (seed < 0 || seed != std::floor(seed)) throw InputError("--nu: seed must be an integer");
    auto m = dirichlet_measures(space, 1, static_cast<std::uint64_t>(seed)).front();
    m.id = spec;
    return m;
  }
  return {spec, io::read_measure(spec, space)};
}

Json te_entry(const TEReport& r, bool with_weights) {
  Json e = {{"nu", r.nu_id},
            {"transport_cost", r.transport_cost},
            {"entropy", to_json(r.entropy)},
            {"bound", to_json(r.bound)},
            {"margin", to_json(r.margin)},
            {"passed", r.passed}};
  if (with_weights) e["weights"] = to_json(r.nu);
  return e;
}

int cmd_transport(const std::string& space_spec, const std::string& nu_spec,
                  const std::string& phi_spec, const std::string& Phi_spec, const Common& c,
                  std::ostream& out) {
  const MetricMeasureSpace space = load_space(space_spec);
  if (space.size() > 500) throw InputError("transport: at most 500 points supported");
  const ConvexProfile phi = io::parse_profile(phi_spec);
  const LabeledMeasure nu = load_measure(nu_spec, space);
  const TransportPlan plan = wasserstein(space, nu.weights, cost_matrix(space, phi));
  Json doc = header("transport");
  doc["phi"] = phi.describe();
  doc["nu"] = nu.id;
  doc["transport_cost"] = plan.cost;
  doc["dual_value"] = plan.dual_value;
  doc["duality_gap"] = plan.duality_gap;
  doc["max_marginal_error"] = plan.max_marginal_error;
  doc["max_dual_violation"] = plan.max_dual_violation;
  doc["pivots"] = plan.pivots;
  doc["relative_entropy"] = to_json(relative_entropy(nu.weights, space.weights()));
  Json coupling = Json::array();
  for (Index i = 0; i < plan.coupling.rows(); ++i)
    for (Index j = 0; j < plan.coupling.cols(); ++j)
      if (plan.coupling(i, j) > 0.0) coupling.push_back({i, j, plan.coupling(i, j)});
  doc["coupling"] = coupling;
  int code = kOk;
  if (!Phi_spec.empty()) {
    const ConvexProfile Phi = io::parse_profile(Phi_spec);
    const TEReport te = te_check(space, phi, Phi, {nu}).front();
    doc["te"] = te_entry(te, !te.passed);
    doc["Phi"] = Phi.describe();
    if (!te.passed) code = kViolation;
  }
  emit(c.out_path, dump(doc), out);
  return code;
}

int cmd_ic_check(const std::string& space_spec, const std::string& phi_spec,
                 const std::string& Phi_spec, const std::vector<std::string>& field_specs,
                 const std::string& lambda_spec, double tol, const Common& c, std::ostream& out) {
  const MetricMeasureSpace space = load_space(space_spec);
  const ConvexProfile phi = io::parse_profile(phi_spec), Phi = io::parse_profile(Phi_spec);
  const std::vector<double> lambdas =
      lambda_spec == "auto" ? default_lambda_grid(Phi.growth_rate()) : parse_grid(lambda_spec, "--lambda-grid");
  for (double l : lambdas)
    if (!(l > 0.0)) throw InputError("--lambda-grid: values must be positive");
  Json doc = header("ic-check");
  doc["phi"] = phi.describe();
  doc["Phi"] = Phi.describe();
  Json reports = Json::array();
  bool all_pass = true;
  for (const auto& spec : field_specs) {
    const NamedField f = load_field(spec, space);
    const ICReport rep = ic_check(space, phi, Phi, f.field.values, lambdas, tol, f.id);
    Json jr = {{"field", rep.field_id},
               {"passed", rep.passed()},
               {"vacuous", rep.vacuous_count()}};
    Json entries = Json::array();
    for (const auto& e : rep.entries)
      entries.push_back({{"lambda", e.lambda},
                         {"log_left", e.log_left},
                         {"right", to_json(e.right)},
                         {"margin", to_json(e.margin)},
                         {"verdict", to_string(e.verdict)}});
    jr["entries"] = entries;
    if (!rep.passed()) {
      all_pass = false;
      const ICEntry& w = rep.entries[rep.worst_entry()];
      jr["witness"] = {{"lambda", w.lambda},
                       {"margin", to_json(w.margin)},
                       {"values", to_json(f.field.values)}};
    }
    reports.push_back(jr);
  }
  doc["reports"] = reports;
  doc["passed"] = all_pass;
  emit(c.out_path, dump(doc), out);
  return all_pass ? kOk : kViolation;
}

int cmd_te_check(const std::string& space_spec, const std::string& phi_spec,
                 const std::string& Phi_spec, const std::vector<std::string>& nu_specs,
                 const std::vector<std::string>& generators, int count, bool point_family,
                 int dirichlet_count, std::uint64_t seed, double tol, const Common& c,
                 std::ostream& out) {
  const MetricMeasureSpace space = load_space(space_spec);
  if (space.size() > 500) throw InputError("te-check: at most 500 points supported");
  const ConvexProfile phi = io::parse_profile(phi_spec), Phi = io::parse_profile(Phi_spec);
  std::vector<LabeledMeasure> family;
  for (const auto& spec : nu_specs) family.push_back(load_measure(spec, space));
  if (point_family)
    for (auto& m : point_masses(space)) family.push_back(std::move(m));
  if (dirichlet_count > 0)
    for (auto& m : dirichlet_measures(space, dirichlet_count, seed)) family.push_back(std::move(m));
  // Generated families; `count` caps each one (8 by default, all points for deltas).
  for (const auto& gen : generators) {
    if (gen == "deltas") {
      for (auto& m : point_masses(space, count)) family.push_back(std::move(m));
    } else if (gen == "dirichlet") {
      for (auto& m : dirichlet_measures(space, count > 0 ? count : 8, seed))
        family.push_back(std::move(m));
    } else if (gen == "tilts") {
      // Tilts along a 1-Lipschitz direction: the first coordinate when there is
      // one, otherwise the distance to the first point.
      Field g(space.size());
      if (space.coordinates() && space.coordinate_metric() == Combine::l2 &&
          space.coordinates()->cols() == 1) {
        g = space.coordinate(0);
      } else {
        for (Index i = 0; i < space.size(); ++i) g[i] = space.distance(0, i);
      }
      for (auto& m : exponential_tilts(space, g, lin_space(-2.0, 2.0, count > 1 ? count : 8)))
        family.push_back(std::move(m));
    } else {
      throw InputError("--nu-family: unknown family '" + gen + "' (tilts, deltas or dirichlet)");
    }
  }
  if (family.empty()) throw InputError("te-check: empty measure family");
  const std::vector<TEReport> reports = te_check(space, phi, Phi, family, tol);
  Json doc = header("te-check");
  doc["phi"] = phi.describe();
  doc["Phi"] = Phi.describe();
  Json entries = Json::array();
  bool all_pass = true;
  for (const auto& r : reports) {
    entries.push_back(te_entry(r, !r.passed));
    all_pass = all_pass && r.passed;
  }
  doc["entries"] = entries;
  doc["passed"] = all_pass;
  emit(c.out_path, dump(doc), out);
  return all_pass ? kOk : kViolation;
}

struct ConstantArgs {
  std::string theorem;
  std::optional<double> lambda_ls, lambda_1, L, p, q, M, lambda_exp;
  std::string psi, Phi, phi;
  std::string space, field;
};

double need(const std::optional<double>& v, const char* flag) {
  if (!v) throw InputError(std::string("missing ") + flag);
  return *v;
}

ConvexProfile psi_from(const ConstantArgs& a) {
  if (!a.psi.empty()) {
    if (!a.Phi.empty() || !a.phi.empty()) throw InputError("give either Psi or (Phi, phi)");
    return io::parse_profile(a.psi);
  }
  if (a.Phi.empty()) throw InputError("main: give Psi or Phi (with optional phi)");
  const ConvexProfile Phi = io::parse_profile(a.Phi);
  return a.phi.empty() ? Phi : compose(Phi, io::parse_profile(a.phi));
}

Json constant_json(const RHConstant& c) {
  Json params = Json::object();
  for (const auto& [k, v] : c.parameters) params[k] = v;
  Json doc = {{"theorem", to_string(c.theorem)},
              {"parameters", params},
              {"value", to_json(c.value())},
              {"log_value", to_json(c.log_value)}};
  if (!c.profile.empty()) doc["profile"] = c.profile;
  doc["warnings"] = c.warnings;
  return doc;
}

int cmd_rh_constant(const ConstantArgs& a, const Common& c, std::ostream& out) {
  const std::string& t = a.theorem;
  Json doc = header("rh-constant");
  std::string text;
  if (t == "herbst") {
    const RHConstant k =
        a.q ? herbst_ls_constant(need(a.lambda_ls, "--lambda-ls"), need(a.L, "--L"), *a.q,
                                 need(a.p, "--p"))
            : herbst_ls_constant(need(a.lambda_ls, "--lambda-ls"), need(a.L, "--L"),
                                 need(a.p, "--p"));
    doc["constant"] = constant_json(k);
    text = plain(k.value());
  } else if (t == "t11") {
    const RHConstant k = thm_1_1_constant(need(a.lambda_1, "--lambda1"), need(a.L, "--L"),
                                          a.q.value_or(0.0), need(a.p, "--p"));
    doc["constant"] = constant_json(k);
    text = plain(k.value());
  } else if (t == "main") {
    const RHConstant k = thm_main_constant(psi_from(a), need(a.L, "--L"), need(a.p, "--p"));
    doc["constant"] = constant_json(k);
    text = plain(k.value());
  } else if (t == "poincare") {
    const RHConstant k =
        thm_poincare_constant(need(a.lambda_1, "--lambda1"), need(a.L, "--L"), need(a.p, "--p"));
    doc["constant"] = constant_json(k);
    text = plain(k.value());
  } else if (t == "expnt") {
    const NontightConstants k = exp_nontight_constants(
        need(a.M, "--M"), need(a.lambda_exp, "--lambda-exp"), need(a.L, "--L"), need(a.p, "--p"));
    doc["displayed"] = constant_json(k.displayed);
    doc["theorem_main"] = constant_json(k.theorem_main);
    text = "displayed " + plain(k.displayed.value()) + "\nthm_main " +
           plain(k.theorem_main.value());
  } else if (t == "lb") {
    if (a.space.empty() || a.field.empty()) throw InputError("lb: --space and --field are required");
    const MetricMeasureSpace space = load_space(a.space);
    const NamedField f = load_field(a.field, space);
    const ConvexProfile phi = io::parse_profile(a.phi.empty() ? "identity" : a.phi);
    const ConvexProfile Phi = io::parse_profile(a.Phi.empty() ? "identity" : a.Phi);
    const LogLipProfile prof = a.L ? extract_one_sided_profile(
                                         space, f.field.values, ProfileMode::given_L,
                                         Eigen::VectorXd::Constant(space.size(), *a.L))
                                   : extract_one_sided_profile(space, f.field.values,
                                                               ProfileMode::b_zero);
    const double p = need(a.p, "--p");
    const LbBound b = thm_Lb_bound(space, phi, Phi, f.field.values, prof, p);
    doc["constant"] = {{"theorem", "thm_Lb"},
                       {"parameters", {{"p", p}}},
                       {"phi", phi.describe()},
                       {"Phi", Phi.describe()},
                       {"field", f.id},
                       {"value", to_json(b.value())},
                       {"log_value", to_json(b.log_value)},
                       {"gamma", b.gamma},
                       {"alpha", b.alpha},
                       {"measured_ratio",
                        std::exp(log_lp_norm(space, f.field.values, p) -
                                 log_lp_norm(space, f.field.values, 0.0))}};
    text = plain(b.value());
  } else {
    throw InputError("--theorem must be one of herbst, t11, main, lb, poincare, expnt");
  }
  if (c.format == "json")
    emit(c.out_path, dump(doc), out);
  else
    emit(c.out_path, text + "\n", out);
  return kOk;
}

/// "<theorem>,key=value,...": main (Psi | Phi[,phi]), herbst (lambda_LS), poincare (lambda1),
/// t11 (lambda1), expnt (M, lambda_exp[, variant=displayed|main]); L defaults to the measured
/// log-Lipschitz constant of the field.
std::function<RHConstant(double)> constant_from(const std::string& spec, double measured_L) {
  const auto parts = split(spec, ',');
  if (parts.empty()) throw InputError("--constant-from: empty specification");
  std::map<std::string, std::string> kv;
  for (std::size_t k = 1; k < parts.size(); ++k) {
    const auto eq = parts[k].find('=');
    if (eq == std::string::npos) throw InputError("--constant-from: expected key=value, got '" + parts[k] + "'");
    kv[parts[k].substr(0, eq)] = parts[k].substr(eq + 1);
  }
  auto take = [&](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto take_num = [&](const char* key) {
    auto v = take(key);
    if (!v) throw InputError(std::string("--constant-from: missing ") + key);
    return number(*v, std::string("--constant-from ") + key);
  };
  const std::string theorem = parts[0];
  double L = measured_L;
  if (auto v = take("L")) L = number(*v, "--constant-from L");
  std::function<RHConstant(double)> make;
  if (theorem == "main") {
    ConstantArgs a;
    a.psi = take("Psi").value_or("");
    a.Phi = take("Phi").value_or("");
    a.phi = take("phi").value_or("");
    const ConvexProfile psi = psi_from(a);
    make = [psi, L](double p) { return thm_main_constant(psi, L, p); };
  } else if (theorem == "herbst") {
    const double lls = take_num("lambda_LS");
    make = [lls, L](double p) { return herbst_ls_constant(lls, L, p); };
  } else if (theorem == "poincare") {
    const double l1 = take_num("lambda1");
    make = [l1, L](double p) { return thm_poincare_constant(l1, L, p); };
  } else if (theorem == "t11") {
    const double l1 = take_num("lambda1");
    make = [l1, L](double p) { return thm_1_1_constant(l1, L, 0.0, p); };
  } else if (theorem == "expnt") {
    const double M = take_num("M"), le = take_num("lambda_exp");
    const std::string variant = take("variant").value_or("main");
    if (variant != "main" && variant != "displayed")
      throw InputError("--constant-from: variant must be main or displayed");
    make = [M, le, L, variant](double p) {
      const NontightConstants k = exp_nontight_constants(M, le, L, p);
      return variant == "main" ? k.theorem_main : k.displayed;
    };
  } else if (theorem == "lb") {
    throw InputError("--constant-from: lb bounds only the upper ratio; use rh-constant --theorem lb");
  } else {
    throw InputError("--constant-from: unknown theorem '" + theorem + "'");
  }
  if (!kv.empty()) throw InputError("--constant-from: unknown key '" + kv.begin()->first + "'");
  return make;
}

int cmd_rh_verify(const std::string& space_spec, const std::string& field_spec,
                  const std::string& p_spec, const std::string& constant_spec, double tol,
                  const Common& c, std::ostream& out) {
  const MetricMeasureSpace space = load_space(space_spec);
  const NamedField f = load_field(field_spec, space);
  check_field(space, f.field.values, true, "field");
  const std::vector<double> ps = parse_grid(p_spec, "--p-grid");
  for (double p : ps)
    if (!(p > 0.0)) throw InputError("--p-grid: values must be positive");
  const double L = log_lipschitz_constant(space, f.field.values);
  const auto make = constant_from(constant_spec, L);
  std::vector<RHVerification> results;
  for (double p : ps) results.push_back(rh_verify(space, f.field.values, p, make(p), tol, f.id));
  const bool all_pass = std::none_of(results.begin(), results.end(), [](const RHVerification& v) {
    return v.verdict == Verdict::fail;
  });

  auto record = [&](const RHVerification& v) {
    Json e = {{"schema", 1},
              {"field", v.field_id},
              {"p", v.p},
              {"ratio_plus", v.ratio_plus()},
              {"ratio_minus", v.ratio_minus()},
              {"constant", to_json(exp(v.log_constant))},
              {"margin", to_json(v.margin)},
              {"worst_side", v.worst_side},
              {"tolerance", v.tolerance},
              {"verdict", to_string(v.verdict)}};
    if (v.verdict == Verdict::fail) e["witness_values"] = to_json(f.field.values);
    return e;
  };
  std::ostringstream os;
  if (c.format == "csv") {
    os << "p,ratio_plus,ratio_minus,constant,margin,verdict\n";
    for (const auto& v : results)
      os << plain(v.p) << ',' << plain(v.ratio_plus()) << ',' << plain(v.ratio_minus()) << ','
         << plain(exp(v.log_constant)) << ',' << plain(v.margin) << ',' << to_string(v.verdict)
         << '\n';
  } else if (c.format == "json") {
    Json doc = header("rh-verify");
    doc["log_lipschitz"] = L;
    doc["constant_from"] = constant_spec;
    Json arr = Json::array();
    for (const auto& v : results) arr.push_back(record(v));
    doc["records"] = arr;
    doc["passed"] = all_pass;
    os << dump(doc);
  } else {
    for (const auto& v : results) os << record(v).dump() << '\n';
  }
  emit(c.out_path, os.str(), out);
  return all_pass ? kOk : kViolation;
}

int cmd_concentration(const std::string& space_spec, const std::vector<std::string>& field_specs,
                      const std::string& t_spec, const std::string& Phi_spec, const Common& c,
                      std::ostream& out) {
  const MetricMeasureSpace space = load_space(space_spec);
  if (field_specs.empty()) throw InputError("concentration-profile: empty field family");
  const std::vector<double> ts = parse_grid(t_spec, "--t-grid");
  std::optional<ConvexProfile> Phi;
  if (!Phi_spec.empty()) Phi = io::parse_profile(Phi_spec);

  std::vector<Field> family;
  std::vector<std::string> notes;
  for (const auto& spec : field_specs) {
    Field f = load_field(spec, space).field.values;
    const double lip = lipschitz_constant(space, f);
    if (lip > 1.0) {
      f /= lip;
      notes.push_back(spec + " divided by its Lipschitz constant " + plain(lip));
    }
    family.push_back(std::move(f));
  }
  struct Row {
    double t, tail;
    std::optional<double> bound;
  };
  std::vector<Row> rows;
  bool ok = true;
  for (double t : ts) {
    double tail = 0.0;
    for (const auto& f : family) {
      const double m = space.mean(f);
      double mass = 0.0;
      for (Index i = 0; i < f.size(); ++i)
        if (f[i] >= m + t) mass += space.weights()[i];
      tail = std::max(tail, mass);
    }
    Row r{t, tail, {}};
    if (Phi) {
      r.bound = std::exp(-(*Phi)(t));
      ok = ok && tail <= *r.bound * (1.0 + 1e-12);
    }
    rows.push_back(r);
  }
  std::ostringstream os;
  if (c.format == "json") {
    Json doc = header("concentration-profile");
    if (Phi) doc["Phi"] = Phi->describe();
    doc["notes"] = notes;
    Json arr = Json::array();
    for (const auto& r : rows)
      arr.push_back({{"t", r.t}, {"tail", r.tail}, {"bound", extended_or_null(r.bound)}});
    doc["rows"] = arr;
    doc["passed"] = ok;
    os << dump(doc);
  } else {
    os << (Phi ? "t,tail,bound\n" : "t,tail\n");
    for (const auto& r : rows) {
      os << plain(r.t) << ',' << plain(r.tail);
      if (r.bound) os << ',' << plain(*r.bound);
      os << '\n';
    }
  }
  emit(c.out_path, os.str(), out);
  return ok ? kOk : kViolation;
}

int cmd_suite(const std::string& preset, const Common& c, std::ostream& out) {
  const auto criteria = preset == "all" ? all_criteria() : preset_criteria(preset);
  Json doc = header("suite");
  doc["preset"] = preset;
  Json arr = Json::array();
  bool ok = true;
  for (const auto& criterion : criteria) {
    const CriterionResult r = run_timed(criterion);
    out << summary_line(r) << '\n';
    for (const auto& line : r.details) out << "      " << line << '\n';
    out.flush();
    ok = ok && r.passed;
    arr.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"details", r.details}});
  }
  doc["criteria"] = arr;
  doc["passed"] = ok;
  if (!c.out_path.empty()) io::write_atomic(c.out_path, dump(doc));
  return ok ? kOk : kViolation;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Verification toolkit for reverse Hoelder, transport-entropy and "
               "infimum-convolution inequalities on finite metric-measure spaces",
               "funcineq"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common common;
  // The default format is per subcommand; it is filled in once parsing tells us which one ran.
  std::vector<std::pair<CLI::App*, std::string>> default_format;
  auto add_out = [&](CLI::App* sub, std::vector<std::string> formats, std::string fallback) {
    sub->add_option("--out", common.out_path, "Write the report here (atomically) instead of stdout");
    sub->add_option("--format", common.format, "Output format")
        ->check(CLI::IsMember(formats))
        ->default_str(fallback);
    default_format.emplace_back(sub, std::move(fallback));
  };

  const char* space_help = "Space file, or gaussian:<hw>:<step>, exponential:<hw>:<step>, random:<n>:<seed>";
  const char* field_help = "Field file, or coord, exp-coord:<L>, exp-coord2:<c>";
  const char* profile_help = "identity, quadratic:<l>, phi1:<l>, linear_offset:<M>:<l> or a profile file";

  std::string space, phi = "identity", Phi, lambda_grid = "auto", nu, inner, s_grid, p_grid,
                     constant_spec, t_grid, preset;
  std::vector<std::string> fields, profiles, nus;
  double tol = 1e-9, t_max = 100.0, step = 1e-4;
  bool biconj = false, point_family = false;
  int dirichlet = 0, count = 0;
  std::vector<std::string> nu_families;
  std::uint64_t seed = 1;
  ConstantArgs ca;

  auto* validate = app.add_subcommand("validate", "Validate a space and optional fields/profiles");
  validate->add_option("--space", space, space_help)->required();
  validate->add_option("--field", fields, field_help);
  validate->add_option("--profile", profiles, profile_help);
  add_out(validate, {"json"}, "json");

  auto* leg = app.add_subcommand("legendre", "Legendre-Fenchel conjugate of a profile");
  leg->add_option("--profile", Phi, profile_help)->required();
  leg->add_option("--inner", inner, "Inner profile: conjugate of profile o inner by both routes");
  leg->add_option("--s", s_grid, "Slopes: a,b,c or lin:lo:hi:n or log:lo:hi:n");
  leg->add_flag("--biconjugate", biconj, "Run the biconjugate check");
  leg->add_option("--t-max", t_max, "Biconjugate window")->capture_default_str();
  leg->add_option("--step", step, "Biconjugate knot spacing")->capture_default_str();
  add_out(leg, {"json", "csv"}, "json");

  auto* tr = app.add_subcommand("transport", "Optimal transport cost W_{c_phi}(nu, mu)");
  tr->add_option("--space", space, space_help)->required();
  tr->add_option("--nu", nu, "Measure file, point:<k> or dirichlet:<seed>")->required();
  tr->add_option("--phi", phi, profile_help)->capture_default_str();
  tr->add_option("--Phi", Phi, "Also check W <= Phi^{-1}(H)");
  add_out(tr, {"json"}, "json");

  auto* ic = app.add_subcommand("ic-check", "Infimum-convolution inequality check");
  ic->add_option("--space", space, space_help)->required();
  ic->add_option("--phi", phi, profile_help)->capture_default_str();
  ic->add_option("--Phi", Phi, profile_help)->required();
  ic->add_option("--field", fields, field_help)->required();
  ic->add_option("--lambda-grid", lambda_grid, "auto, a,b,c, lin:lo:hi:n or log:lo:hi:n")
      ->capture_default_str();
  ic->add_option("--tol", tol, "Tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  add_out(ic, {"json"}, "json");

  auto* te = app.add_subcommand("te-check", "Transport-entropy inequality check");
  te->add_option("--space", space, space_help)->required();
  te->add_option("--phi", phi, profile_help)->capture_default_str();
  te->add_option("--Phi", Phi, profile_help)->required();
  te->add_option("--nu", nus, "Measure file, point:<k> or dirichlet:<seed>");
  te->add_option("--nu-family", nu_families, "Generated family: tilts, deltas or dirichlet")
      ->check(CLI::IsMember({"tilts", "deltas", "dirichlet"}));
  te->add_option("--count", count, "Measures per generated family")
      ->check(CLI::NonNegativeNumber);
  te->add_flag("--point-masses", point_family, "Add every point mass");
  te->add_option("--dirichlet", dirichlet, "Add this many Dirichlet(1) measures");
  te->add_option("--seed", seed, "Seed for --dirichlet")->capture_default_str();
  te->add_option("--tol", tol, "Tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  add_out(te, {"json"}, "json");

  auto* rc = app.add_subcommand("rh-constant", "Evaluate a reverse Hoelder constant");
  rc->add_option("--theorem", ca.theorem, "herbst | t11 | main | lb | poincare | expnt")
      ->required()
      ->check(CLI::IsMember({"herbst", "t11", "main", "lb", "poincare", "expnt"}));
  rc->add_option("--lambda-ls", ca.lambda_ls, "Log-Sobolev constant");
  rc->add_option("--lambda1", ca.lambda_1, "Poincare constant");
  rc->add_option("--L", ca.L, "Log-Lipschitz constant");
  rc->add_option("--p", ca.p, "Moment exponent");
  rc->add_option("--q", ca.q, "Lower exponent (herbst, t11)");
  rc->add_option("--M", ca.M, "Offset of the non-tight profile");
  rc->add_option("--lambda-exp", ca.lambda_exp, "Slope of the non-tight profile");
  rc->add_option("--Psi", ca.psi, profile_help);
  rc->add_option("--Phi", ca.Phi, profile_help);
  rc->add_option("--phi", ca.phi, profile_help);
  rc->add_option("--space", ca.space, space_help);
  rc->add_option("--field", ca.field, field_help);
  add_out(rc, {"text", "json"}, "text");

  auto* rv = app.add_subcommand("rh-verify", "Verify moment comparisons against a constant");
  rv->add_option("--space", space, space_help)->required();
  rv->add_option("--field", fields, field_help)->required()->expected(1);
  rv->add_option("--p-grid", p_grid, "a,b,c or lin:lo:hi:n or log:lo:hi:n")->required();
  rv->add_option("--constant-from", constant_spec,
                 "main,Psi=<profile> | main,Phi=<profile>[,phi=<profile>] | herbst,lambda_LS=<v> | "
                 "poincare,lambda1=<v> | t11,lambda1=<v> | expnt,M=<v>,lambda_exp=<v>[,variant=...]; "
                 "optional L=<v>")
      ->required();
  rv->add_option("--tol", tol, "Relative tolerance (1e-9 exact spaces, 1e-3 lines)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_out(rv, {"jsonl", "json", "csv"}, "jsonl");

  auto* cp = app.add_subcommand("concentration-profile", "Worst empirical tails of 1-Lipschitz fields");
  cp->add_option("--space", space, space_help)->required();
  cp->add_option("--field", fields, field_help)->required();
  cp->add_option("--t-grid", t_grid, "a,b,c or lin:lo:hi:n or log:lo:hi:n")->required();
  cp->add_option("--Phi", Phi, "Add the bound exp(-Phi(t))");
  add_out(cp, {"csv", "json"}, "csv");

  auto* su = app.add_subcommand("suite", "Run a preset acceptance battery");
  su->add_option("--preset", preset, "convex-calculus | gaussian-line | exponential-line | "
                                     "random-finite | all")
      ->required();
  su->add_option("--out", common.out_path, "Write a JSON summary here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return kOk;
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  if (common.format.empty())
    for (const auto& [sub, fallback] : default_format)
      if (sub->parsed()) common.format = fallback;

  // Subcommand help is raised inside parse; reaching here means a command runs.
  try {
    if (validate->parsed()) return cmd_validate(space, fields, profiles, common, out);
    if (leg->parsed())
      return cmd_legendre(Phi, inner, s_grid, biconj, t_max, step, common, out);
    if (tr->parsed()) return cmd_transport(space, nu, phi, Phi, common, out);
    if (ic->parsed()) return cmd_ic_check(space, phi, Phi, fields, lambda_grid, tol, common, out);
    if (te->parsed())
      return cmd_te_check(space, phi, Phi, nus, nu_families, count, point_family, dirichlet, seed,
                          tol, common, out);
    if (rc->parsed()) return cmd_rh_constant(ca, common, out);
    if (rv->parsed())
      return cmd_rh_verify(space, fields.front(), p_grid, constant_spec, tol, common, out);
    if (cp->parsed()) return cmd_concentration(space, fields, t_grid, Phi, common, out);
    if (su->parsed()) {
      if (preset != "all") {
        const auto names = preset_names();
        if (std::find(names.begin(), names.end(), preset) == names.end())
          throw InputError("--preset: unknown preset '" + preset + "'");
      }
      return cmd_suite(preset, common, out);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  err << "error: no subcommand\n";
  return kInputError;
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace funcineq::cli
