#include <doctest.h>

#include <cmath>

#include "funcineq/functionals.hpp"
#include "funcineq/space.hpp"

using namespace funcineq;

namespace {

MetricMeasureSpace two_points() {
  Eigen::MatrixXd d(2, 2);
  d << 0, 1, 1, 0;
  return MetricMeasureSpace::from_distances({"a", "b"}, d, Eigen::Vector2d(0.5, 0.5));
}

const double e = std::exp(1.0);

Field random_positive(Index n, double scale) {
  Field f(n);
  for (Index i = 0; i < n; ++i) f[i] = std::exp(scale * std::sin(3.1 * i + 0.4));
  return f;
}

}  // namespace

TEST_CASE("lp norms on two points") {
  const auto s = two_points();
  const Field f = Eigen::Vector2d(1.0, e);
  CHECK(lp_norm(s, f, 0.0).value() == doctest::Approx(std::exp(0.5)).epsilon(1e-14));
  CHECK(lp_norm(s, f, 1.0).value() == doctest::Approx((1.0 + e) / 2.0).epsilon(1e-14));
  CHECK(lp_norm(s, f, 2.0).value() == doctest::Approx(std::sqrt((1.0 + e * e) / 2.0)).epsilon(1e-14));
  CHECK(lp_norm(s, f, -1.0).value() == doctest::Approx(1.0 / ((1.0 + 1.0 / e) / 2.0)).epsilon(1e-14));
  const Field c = Eigen::Vector2d(3.0, 3.0);
  for (double p : {-4.0, -1.0, 0.0, 0.5, 7.0}) CHECK(lp_norm(s, c, p).value() == doctest::Approx(3.0));
}

TEST_CASE("lp norms survive extreme dynamic range") {
  const auto s = two_points();
  const Field f = Eigen::Vector2d(std::exp(-400.0), std::exp(400.0));
  // log((e^{-800} + e^{800}) / 2) / 2 = 400 - log(2) / 2 up to e^{-1600}.
  CHECK(log_lp_norm(s, f, 2.0) == doctest::Approx(400.0 - 0.5 * std::log(2.0)).epsilon(1e-14));
  CHECK(log_lp_norm(s, f, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("exponential moment on the exponential line") {
  const auto s = discretize_line(LineDensity::two_sided_exponential, 40.0, 0.01);
  const Field f = (0.25 * s.coordinate(0)).array().exp().matrix();
  CHECK(std::abs(lp_norm(s, f, 2.0).value() - std::pow(0.75, -0.5)) <= 1e-3);
}

TEST_CASE("negative moment reflection") {
  const auto s = two_points();
  CHECK(negative_moment_reflection_check(s, Eigen::Vector2d(2.0, 2.0), 1.5).passed);

  const auto rs = random_space(20, 7);
  const auto rep = negative_moment_reflection_check(rs, random_positive(20, 2.0), 1.3);
  CHECK(rep.passed);
  CHECK(rep.relative_error <= 1e-12);

  const auto line = discretize_line(LineDensity::two_sided_exponential, 40.0, 0.01);
  const Field ex = line.coordinate(0).array().exp().matrix();
  CHECK(negative_moment_reflection_check(line, ex, 0.5).relative_error <= 1e-12);
}

TEST_CASE("entropy") {
  const auto s = two_points();
  CHECK(entropy(s, Eigen::Vector2d(1.0, 1.0)) == doctest::Approx(0.0));
  CHECK(entropy(s, Eigen::Vector2d(1.0, 0.0)) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-14));
  CHECK(entropy(s, Eigen::Vector2d(0.0, 4.0)) == doctest::Approx(4.0 * 0.5 * std::log(2.0)).epsilon(1e-14));

  // Gaussian: E[x e^x] - E[e^x] log E[e^x] = e^{1/2} - e^{1/2} / 2.
  const auto g = discretize_line(LineDensity::gaussian, 8.0, 0.01);
  const Field ex = g.coordinate(0).array().exp().matrix();
  CHECK(std::abs(entropy(g, ex) - 0.5 * std::exp(0.5)) <= 1e-4);

  const auto rs = random_space(12, 3);
  for (int k = 0; k < 5; ++k) CHECK(entropy(rs, random_positive(12, 0.3 * k + 0.1)) > 0.0);
}

TEST_CASE("variance") {
  const auto s = two_points();
  CHECK(variance(s, Eigen::Vector2d(2.0, 2.0)) == doctest::Approx(0.0));
  CHECK(variance(s, Eigen::Vector2d(0.0, 1.0)) == doctest::Approx(0.25));
  const auto g = discretize_line(LineDensity::gaussian, 8.0, 0.01);
  CHECK(std::abs(variance(g, g.coordinate(0)) - 1.0) <= 1e-4);
}

TEST_CASE("moment log derivative") {
  const auto s = two_points();
  const auto c = moment_log_derivative_check(s, Eigen::Vector2d(2.0, 2.0), 1.0);
  CHECK(c.passed);
  CHECK(std::abs(c.entropy_formula) <= 1e-12);

  // Hand derivative of t -> (1/t) log((1 + e^t) / 2) at t = 1.
  const double exact = -std::log((1.0 + e) / 2.0) + e / (1.0 + e);
  const auto r = moment_log_derivative_check(s, Eigen::Vector2d(1.0, e), 1.0, 1e-4);
  CHECK(r.passed);
  CHECK(r.entropy_formula == doctest::Approx(exact).epsilon(1e-12));
  CHECK(std::abs(r.finite_difference / exact - 1.0) <= 1e-6);

  const auto g = discretize_line(LineDensity::gaussian, 8.0, 0.01);
  const Field ex = g.coordinate(0).array().exp().matrix();
  const auto rg = moment_log_derivative_check(g, ex, 2.0);
  CHECK(rg.passed);
  CHECK(rg.rel_error <= 1e-5);
  // Gaussian: log ||e^x||_t = t / 2, so the derivative is 1/2.
  CHECK(std::abs(rg.entropy_formula - 0.5) <= 1e-4);
}

TEST_CASE("log lipschitz constant") {
  const auto s = two_points();
  CHECK(log_lipschitz_constant(s, Eigen::Vector2d(3.0, 3.0)) == 0.0);
  CHECK(log_lipschitz_constant(s, Eigen::Vector2d(1.0, e)) == doctest::Approx(1.0).epsilon(1e-15));
  const auto line = discretize_line(LineDensity::gaussian, 4.0, 0.1);
  const Field f = (0.7 * line.coordinate(0)).array().exp().matrix();
  CHECK(std::abs(log_lipschitz_constant(line, f) - 0.7) <= 1e-12);
}

TEST_CASE("one sided profiles") {
  const auto line = discretize_line(LineDensity::gaussian, 4.0, 0.05);
  const Eigen::VectorXd x = line.coordinate(0);

  const Field lip = (0.6 * x).array().exp().matrix();
  const auto p1 = extract_one_sided_profile(line, lip, ProfileMode::b_zero);
  CHECK(p1.L.maxCoeff() <= 0.6 + 1e-12);
  CHECK(p1.b.cwiseAbs().maxCoeff() == 0.0);
  CHECK(one_sided_violation(line, lip, p1) <= 1e-12);

  const Field conv = (0.5 * x.array().square()).exp().matrix();
  const auto p2 = extract_one_sided_profile(line, conv, ProfileMode::b_zero);
  CHECK(one_sided_violation(line, conv, p2) <= 1e-12);
  for (Index i = 0; i < x.size(); ++i) CHECK(std::abs(p2.L[i] - std::abs(x[i])) <= 0.05 + 1e-12);

  const Field constant = Eigen::VectorXd::Constant(x.size(), 2.0);
  const auto p3 = extract_one_sided_profile(line, constant, ProfileMode::b_zero);
  CHECK(p3.L.cwiseAbs().maxCoeff() == 0.0);
  CHECK(p3.b.cwiseAbs().maxCoeff() == 0.0);

  // given_L: b absorbs what a too-small slope misses, and the condition still holds.
  const Eigen::VectorXd small = Eigen::VectorXd::Constant(x.size(), 0.5);
  const auto p4 = extract_one_sided_profile(line, conv, ProfileMode::given_L, small);
  CHECK(p4.b.minCoeff() >= 0.0);
  CHECK(p4.b.maxCoeff() > 0.0);
  CHECK(one_sided_violation(line, conv, p4) <= 1e-12);
}

TEST_CASE("moment curve properties") {
  const auto rs = random_space(15, 11);
  for (double scale : {0.2, 1.0, 3.0}) {
    const Field f = random_positive(15, scale);
    const auto curve = moment_curve(rs, f, {-3.0, -1.0, -0.5, -1e-6, 0.0, 1e-6, 0.5, 1.0, 2.0, 5.0});
    CHECK(curve.non_decreasing());
    CHECK(curve.log_moment_convex());
    const double g0 = lp_norm(rs, f, 0.0).value();
    CHECK(std::abs(lp_norm(rs, f, 1e-6).value() - g0) <= 1e-4 * g0);
    CHECK(std::abs(lp_norm(rs, f, -1e-6).value() - g0) <= 1e-4 * g0);
  }
}
