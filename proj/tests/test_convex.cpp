#include <doctest.h>

#include <cmath>
#include <vector>

#include "funcineq/convex.hpp"
#include "funcineq/errors.hpp"

using namespace funcineq;

namespace {

// Brute-force sup over t in [0, t_max] on a uniform grid.
double brute_conjugate(const ConvexProfile& f, double s, double t_max = 100.0, double step = 1e-4) {
  double best = -f(0.0);
  const auto n = static_cast<long>(t_max / step);
  for (long k = 1; k <= n; ++k) {
    const double t = k * step;
    best = std::max(best, s * t - f(t));
  }
  return best;
}

double huber(double u) { return u <= 1.0 ? 0.5 * u * u : u - 0.5; }

std::vector<ConvexProfile> catalog() {
  return {ConvexProfile::identity(), ConvexProfile::quadratic(1.0),
          ConvexProfile::phi1_scaled(1.0), ConvexProfile::linear_offset(0.7, 2.0)};
}

}  // namespace

TEST_CASE("catalog conjugates against brute force") {
  const auto q = ConvexProfile::quadratic(1.0);
  for (double s : {0.0, 0.3, 1.0, 2.5}) {
    CHECK(legendre(q, s).value() == doctest::Approx(0.5 * s * s).epsilon(1e-12));
    CHECK(legendre(q, s).value() == doctest::Approx(brute_conjugate(q, s)).epsilon(1e-7));
  }
  const auto phi1 = ConvexProfile::phi1_scaled(1.0);
  for (double s : {0.0, 0.25, 0.5, 0.9, 1.0}) {
    CHECK(legendre(phi1, s).value() == doctest::Approx(0.5 * s * s).epsilon(1e-12));
    CHECK(std::abs(legendre(phi1, s).value() - brute_conjugate(phi1, s)) <= 1e-8);
  }
  CHECK(legendre(phi1, 1.0001).is_infinite());

  const auto lin = ConvexProfile::linear_offset(1.3, 2.0);
  for (double s : {0.0, 1.0, 2.0}) CHECK(legendre(lin, s).value() == doctest::Approx(1.3));
  CHECK(legendre(lin, 2.0 + 1e-9).is_infinite());

  const auto id = ConvexProfile::identity();
  CHECK(legendre(id, 0.5).value() == 0.0);
  CHECK(legendre(id, 1.0).value() == 0.0);
  CHECK(legendre(id, 1.5).is_infinite());
}

TEST_CASE("scaled catalog entries") {
  const auto q = ConvexProfile::quadratic(3.0);
  CHECK(q(2.0) == doctest::Approx(6.0));
  CHECK(legendre(q, 1.5).value() == doctest::Approx(1.5 * 1.5 / 6.0));
  const auto p = ConvexProfile::phi1_scaled(4.0);
  for (double t : {0.1, 0.4, 0.5, 0.8, 3.0}) CHECK(p(t) == doctest::Approx(huber(2.0 * t)));
  CHECK(p.growth_rate().value() == doctest::Approx(2.0));
  CHECK(std::abs(legendre(p, 1.2).value() - brute_conjugate(p, 1.2)) <= 1e-8);
}

TEST_CASE("grid profile conjugate") {
  std::vector<double> knots, values;
  for (int k = 0; k <= 200; ++k) {
    knots.push_back(0.05 * k);
    values.push_back(0.5 * knots.back() * knots.back());
  }
  const auto g = ConvexProfile::grid(knots, values);
  CHECK(g.growth_rate().value() == doctest::Approx(10.0 - 0.025));
  for (double s : {0.5, 3.0, 7.0})
    CHECK(legendre(g, s).value() == doctest::Approx(brute_conjugate(g, s, 30.0, 1e-4)).epsilon(1e-6));
  CHECK(legendre(g, 20.0).is_infinite());
}

TEST_CASE("grid profile validation") {
  CHECK_THROWS_AS(ConvexProfile::grid({0.0}, {0.0}), InputError);
  CHECK_THROWS_AS(ConvexProfile::grid({0.5, 1.0}, {0.0, 1.0}), InputError);
  CHECK_THROWS_AS(ConvexProfile::grid({0.0, 1.0, 2.0}, {0.0, 1.0, 1.5}), InputError);
  CHECK_THROWS_AS(ConvexProfile::grid({0.0, 1.0, 2.0}, {1.0, 0.0, 1.0}), InputError);
  CHECK_THROWS_AS(ConvexProfile::grid({0.0, 1.0, 1.0}, {0.0, 1.0, 2.0}), InputError);
}

TEST_CASE("biconjugate of the catalog") {
  CHECK(biconjugate_check(ConvexProfile::quadratic(1.0)).max_relative_error <= 1e-6);
  CHECK(biconjugate_check(ConvexProfile::phi1_scaled(1.0)).max_relative_error <= 1e-6);
  CHECK(biconjugate_check(ConvexProfile::identity()).max_relative_error <= 1e-9);
  CHECK(biconjugate_check(ConvexProfile::linear_offset(0.5, 1.5)).max_relative_error <= 1e-9);
}

TEST_CASE("fenchel young and monotone conjugates") {
  for (const auto& f : catalog()) {
    double prev = -1e300;
    for (int i = 0; i <= 40; ++i) {
      const double s = 0.05 * i;
      const Extended c = legendre(f, s);
      CHECK(c.value() >= prev);
      prev = c.value();
      if (c.is_infinite()) continue;
      for (double t : {0.0, 0.1, 0.7, 1.0, 4.0, 30.0}) CHECK(s * t <= f(t) + c.value() + 1e-10);
    }
  }
}

TEST_CASE("conjugate is infinite exactly past the growth rate") {
  for (const auto& f : catalog()) {
    const Extended S = f.growth_rate();
    if (S.is_infinite()) {
      CHECK(legendre(f, 1e6).is_finite());
      continue;
    }
    CHECK(legendre(f, S.value() * 0.999).is_finite());
    CHECK(legendre(f, S.value() * 1.001).is_infinite());
  }
}

TEST_CASE("tightness and conjugate at zero") {
  for (const auto& f : catalog()) {
    CHECK(f.tight() == (legendre(f, 0.0).value() == 0.0));
    if (f.tight())
      CHECK(compose(f, ConvexProfile::quadratic(2.0)).tight());
  }
  CHECK_FALSE(ConvexProfile::linear_offset(0.4, 1.0).tight());
  CHECK(legendre(ConvexProfile::linear_offset(0.4, 1.0), 0.0).value() == doctest::Approx(0.4));
}

TEST_CASE("composition collapses identity factors") {
  const auto q = ConvexProfile::quadratic(2.0);
  const auto c1 = compose(ConvexProfile::identity(), q);
  CHECK(c1.kind() == ProfileKind::quadratic);
  CHECK(c1.parameter() == 2.0);

  const auto c2 = compose(ConvexProfile::identity(), ConvexProfile::phi1_scaled(0.5));
  for (double t : {0.3, 1.0, 2.0, 5.0}) CHECK(c2(t) == doctest::Approx(huber(std::sqrt(0.5) * t)));

  const auto c3 = compose(ConvexProfile::linear_offset(0.3, 1.7), ConvexProfile::identity());
  CHECK(c3(2.0) == doctest::Approx(-0.3 + 3.4));
  CHECK(c3.growth_rate().value() == doctest::Approx(1.7));

  const auto general = compose(ConvexProfile::quadratic(1.0), ConvexProfile::phi1_scaled(1.0));
  CHECK(general.kind() == ProfileKind::composite);
  CHECK(general(3.0) == doctest::Approx(0.5 * 2.5 * 2.5));
  CHECK(general.growth_rate().is_infinite());
  CHECK_THROWS_AS(compose(ConvexProfile::identity(), ConvexProfile::linear_offset(1.0, 1.0)),
                  DomainError);
}

TEST_CASE("conjugate of a composition") {
  const auto id = ConvexProfile::identity();
  const auto q = ConvexProfile::quadratic(1.0);
  CHECK(conjugate_of_composition(id, q, 1.0).value.value() == doctest::Approx(0.5).epsilon(1e-9));

  const auto lin = ConvexProfile::linear_offset(0.8, 1.5);
  CHECK(conjugate_of_composition(lin, id, 1.0).value.value() == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(conjugate_of_composition(lin, id, 2.0).value.is_infinite());

  const double l2 = 2.5;
  for (double lambda : {0.2, 1.0, 3.0})
    CHECK(conjugate_of_composition(ConvexProfile::quadratic(l2), id, lambda).value.value() ==
          doctest::Approx(lambda * lambda / (2 * l2)).epsilon(1e-9));

  // Against the direct conjugate of the composed profile.
  const std::vector<ConvexProfile> outers = {id, ConvexProfile::quadratic(1.0),
                                             ConvexProfile::linear_offset(0.5, 2.0)};
  const std::vector<ConvexProfile> inners = {id, ConvexProfile::quadratic(1.0),
                                             ConvexProfile::phi1_scaled(1.0)};
  for (const auto& Phi : outers)
    for (const auto& phi : inners) {
      const ConvexProfile psi = compose(Phi, phi);
      for (double lambda : {0.1, 0.5, 0.9, 1.7}) {
        const Extended direct = legendre(psi, lambda);
        const Extended via = conjugate_of_composition(Phi, phi, lambda).value;
        REQUIRE(direct.is_finite() == via.is_finite());
        if (direct.is_finite())
          CHECK(std::abs(direct.value() - via.value()) <= 1e-6 * std::max(1.0, std::abs(direct.value())));
      }
    }
}

TEST_CASE("generalized inverse") {
  CHECK(generalized_inverse(ConvexProfile::quadratic(1.0), 2.0).value() == doctest::Approx(2.0));
  const auto lin = ConvexProfile::linear_offset(1.0, 2.0);
  for (double y : {-1.0, 0.0, 3.0}) CHECK(generalized_inverse(lin, y).value() == doctest::Approx((y + 1.0) / 2.0));
  CHECK(generalized_inverse(lin, -2.0).value() == 0.0);
  CHECK(generalized_inverse(ConvexProfile::identity(), -0.5).value() == 0.0);
  CHECK(generalized_inverse(ConvexProfile::identity(), 0.7).value() == doctest::Approx(0.7));
  // phi1 past the kink is linear: u - 1/2 = y.
  CHECK(generalized_inverse(ConvexProfile::phi1_scaled(1.0), 2.0).value() == doctest::Approx(2.5));

  const auto flat = ConvexProfile::grid({0.0, 1.0}, {0.0, 0.0});
  CHECK(generalized_inverse(flat, 1.0).is_infinite());
}
