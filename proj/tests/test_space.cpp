#include <doctest.h>

#include <cmath>

#include "funcineq/errors.hpp"
#include "funcineq/space.hpp"

using namespace funcineq;

namespace {

MetricMeasureSpace two_points() {
  Eigen::MatrixXd d(2, 2);
  d << 0, 1, 1, 0;
  return MetricMeasureSpace::from_distances({"a", "b"}, d, Eigen::Vector2d(0.5, 0.5), {{0, 1}});
}

// Re-validates any space through the dense constructor.
void revalidate(const MetricMeasureSpace& s) {
  CHECK_NOTHROW(MetricMeasureSpace::from_distances(s.points(), s.distance_matrix(), s.weights()));
}

}  // namespace

TEST_CASE("two point space validates") {
  const auto s = two_points();
  CHECK(s.size() == 2);
  CHECK(s.distance(0, 1) == 1.0);
  CHECK(s.diameter() == 1.0);
}

TEST_CASE("triangle violation names the triple") {
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 5, 1, 0, 1, 5, 1, 0;
  try {
    MetricMeasureSpace::from_distances({"x", "y", "z"}, d, Eigen::Vector3d::Constant(1.0 / 3));
    FAIL("expected a triangle violation");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("(1,2,3)") != std::string::npos);
  }
}

TEST_CASE("invalid spaces are rejected") {
  Eigen::MatrixXd d(2, 2);
  d << 0, 1, 1, 0;
  CHECK_THROWS_AS(MetricMeasureSpace::from_distances({"a", "b"}, d, Eigen::Vector2d(0.5, 0.6)),
                  InputError);
  Eigen::MatrixXd asym(2, 2);
  asym << 0, 1, 2, 0;
  CHECK_THROWS_AS(MetricMeasureSpace::from_distances({"a", "b"}, asym, Eigen::Vector2d(0.5, 0.5)),
                  InputError);
  Eigen::MatrixXd zero(2, 2);
  zero << 0, 0, 0, 0;
  CHECK_THROWS_AS(MetricMeasureSpace::from_distances({"a", "b"}, zero, Eigen::Vector2d(0.5, 0.5)),
                  InputError);
  CHECK_THROWS_AS(
      MetricMeasureSpace::from_distances({"a", "b"}, d, Eigen::Vector2d(1.5, -0.5)), InputError);
}

TEST_CASE("gaussian line has unit second moment") {
  const auto s = discretize_line(LineDensity::gaussian, 8.0, 0.0025);
  CHECK(s.size() == 6401);
  const Eigen::VectorXd x = s.coordinate(0);
  CHECK(std::abs(s.mean(x.array().square().matrix()) - 1.0) <= 1e-4);
  CHECK(std::abs(s.weights().sum() - 1.0) <= 1e-12);
}

TEST_CASE("line weights follow the density ratio") {
  for (auto density : {LineDensity::gaussian, LineDensity::two_sided_exponential}) {
    const auto s = discretize_line(density, 6.0, 0.05);
    const Eigen::VectorXd x = s.coordinate(0);
    auto log_density = [&](double t) {
      return density == LineDensity::gaussian ? -0.5 * t * t : -std::abs(t);
    };
    for (Index i = 0; i < s.size(); i += 17) {
      const double expected = std::exp(log_density(x[i]) - log_density(x[0]));
      CHECK(std::abs(s.weights()[i] / s.weights()[0] / expected - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("exponential line is symmetric") {
  const auto s = discretize_line(LineDensity::two_sided_exponential, 40.0, 0.01);
  CHECK(std::abs(s.mean(s.coordinate(0))) <= 1e-12);
}

TEST_CASE("degenerate line grid is an error") {
  CHECK_THROWS(discretize_line(LineDensity::gaussian, 1.0, 3.0));
  CHECK_THROWS(discretize_line(LineDensity::gaussian, 1.0, -0.1));
}

TEST_CASE("product of two point spaces") {
  const auto a = two_points();
  const auto l1 = product_space(a, a, Combine::l1);
  const auto l2 = product_space(a, a, Combine::l2);
  CHECK(l1.size() == 4);
  // Opposite corners are (0,0) and (1,1) in either index layout.
  CHECK(l1.diameter() == doctest::Approx(2.0));
  CHECK(l2.diameter() == doctest::Approx(std::sqrt(2.0)));
  for (Index i = 0; i < 4; ++i) CHECK(l1.weights()[i] == doctest::Approx(0.25));
  revalidate(l1);
  revalidate(l2);
}

TEST_CASE("random spaces are valid and deterministic") {
  const auto a = random_space(20, 7), b = random_space(20, 7), c = random_space(20, 8);
  CHECK(a.distance_matrix() == b.distance_matrix());
  CHECK(a.weights() == b.weights());
  CHECK(a.weights() != c.weights());
  revalidate(a);
  CHECK(random_space(2, 99).size() == 2);
  revalidate(random_space(2, 99));
}

TEST_CASE("lipschitz regularization") {
  const auto s = two_points();
  const Field r = lipschitz_regularize(s, Eigen::Vector2d(0.0, 10.0), 1.0);
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 1.0);

  const Field constant = Eigen::VectorXd::Constant(2, 3.5);
  CHECK(lipschitz_regularize(s, constant, 2.0) == constant);

  const auto rs = random_space(15, 4);
  Field g(15);
  for (Index i = 0; i < 15; ++i) g[i] = std::sin(7.0 * i) * 3.0;
  const Field reg = lipschitz_regularize(rs, g, 1.0);
  CHECK(lipschitz_constant(rs, reg) <= 1.0 + 1e-12);
  CHECK((reg.array() <= g.array() + 1e-15).all());
  // An already 1-Lipschitz field is a fixed point.
  CHECK((lipschitz_regularize(rs, reg, 1.0) - reg).cwiseAbs().maxCoeff() <= 1e-14);
}
