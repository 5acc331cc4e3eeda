#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "funcineq/convex.hpp"
#include "funcineq/transport.hpp"

using namespace funcineq;

namespace {

MetricMeasureSpace two_points() {
  Eigen::MatrixXd d(2, 2);
  d << 0, 1, 1, 0;
  return MetricMeasureSpace::from_distances({"a", "b"}, d, Eigen::Vector2d(0.5, 0.5));
}

void check_plan(const TransportPlan& plan, const Eigen::VectorXd& nu, const Eigen::VectorXd& mu,
                const Eigen::MatrixXd& cost) {
  CHECK((plan.coupling.array() >= -1e-15).all());
  CHECK((plan.coupling.rowwise().sum() - nu).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((plan.coupling.colwise().sum().transpose() - mu).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(std::abs(plan.cost - (plan.coupling.array() * cost.array()).sum()) <= 1e-10);
  CHECK(std::abs(plan.duality_gap) <= 1e-8);
  for (Index i = 0; i < cost.rows(); ++i)
    for (Index j = 0; j < cost.cols(); ++j) CHECK(plan.u[i] + plan.v[j] <= cost(i, j) + 1e-9);
}

}  // namespace

TEST_CASE("two point transport") {
  const auto s = two_points();
  const Eigen::Vector2d nu(0.8, 0.2);
  const auto plan = wasserstein(s, nu, cost_matrix(s, ConvexProfile::identity()));
  CHECK(plan.cost == doctest::Approx(0.3).epsilon(1e-14));
  const auto quad = wasserstein(s, nu, cost_matrix(s, ConvexProfile::quadratic(1.0)));
  CHECK(quad.cost == doctest::Approx(0.15).epsilon(1e-14));

  // One-parameter family of couplings: pi_12 = a, pi_21 = a - 0.3, a in [0.3, 0.5].
  double best = 1e9;
  for (int k = 0; k <= 2000; ++k) {
    const double a = 0.3 + 0.2 * k / 2000.0;
    best = std::min(best, a + (a - 0.3));
  }
  CHECK(plan.cost == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("identical measures cost nothing") {
  const auto s = random_space(9, 2);
  const auto plan = wasserstein(s, s.weights(), cost_matrix(s, ConvexProfile::identity()));
  CHECK(std::abs(plan.cost) <= 1e-14);
  const Eigen::MatrixXd off = plan.coupling - Eigen::MatrixXd(s.weights().asDiagonal());
  CHECK(off.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("uniform marginals match the best permutation") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 6;
    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cost(i, j) = unif(rng);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
      double c = 0.0;
      for (int i = 0; i < n; ++i) c += cost(i, perm[i]);
      best = std::min(best, c / n);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / n);
    const auto plan = wasserstein(w, w, cost);
    CHECK(plan.cost == doctest::Approx(best).epsilon(1e-12));
    check_plan(plan, w, w, cost);
  }
}

TEST_CASE("line transport matches the cumulative distribution formula") {
  const auto line = discretize_line(LineDensity::gaussian, 3.0, 0.25);
  const Index n = line.size();
  const Eigen::VectorXd x = line.coordinate(0);
  const auto nus = dirichlet_measures(line, 5, 21);
  const Eigen::MatrixXd cost = cost_matrix(line, ConvexProfile::identity());
  for (const auto& nu : nus) {
    double w1 = 0.0, Fn = 0.0, Fm = 0.0;
    for (Index k = 0; k + 1 < n; ++k) {
      Fn += nu.weights[k];
      Fm += line.weights()[k];
      w1 += std::abs(Fn - Fm) * (x[k + 1] - x[k]);
    }
    const auto plan = wasserstein(line, nu.weights, cost);
    CHECK(plan.cost == doctest::Approx(w1).epsilon(1e-10));
    check_plan(plan, nu.weights, line.weights(), cost);
  }
}

TEST_CASE("random plans are certified") {
  for (int seed = 0; seed < 8; ++seed) {
    const auto s = random_space(12 + seed, seed);
    const auto nu = dirichlet_measures(s, 1, 100 + seed).front().weights;
    const Eigen::MatrixXd cost = cost_matrix(s, ConvexProfile::phi1_scaled(2.0));
    const auto plan = wasserstein(s, nu, cost);
    check_plan(plan, nu, s.weights(), cost);
    CHECK(plan.cost > 0.0);
  }
}

TEST_CASE("transport cost is monotone in the cost") {
  const auto s = random_space(10, 5);
  const auto nu = dirichlet_measures(s, 1, 3).front().weights;
  const double a = wasserstein(s, nu, cost_matrix(s, ConvexProfile::quadratic(1.0))).cost;
  const double b = wasserstein(s, nu, cost_matrix(s, ConvexProfile::quadratic(2.0))).cost;
  CHECK(a <= b + 1e-14);
  CHECK(b == doctest::Approx(2.0 * a).epsilon(1e-10));
}

TEST_CASE("relative entropy") {
  const Eigen::Vector2d mu(0.5, 0.5);
  CHECK(relative_entropy(mu, mu).value() == 0.0);
  CHECK(relative_entropy(Eigen::Vector2d(1.0, 0.0), mu).value() == doctest::Approx(std::log(2.0)));
  CHECK(relative_entropy(Eigen::Vector2d(0.75, 0.25), mu).value() ==
        doctest::Approx(0.75 * std::log(1.5) + 0.25 * std::log(0.5)));
  CHECK(relative_entropy(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(1.0, 0.0)).is_infinite());
  const auto s = random_space(10, 1);
  for (const auto& nu : dirichlet_measures(s, 5, 9))
    CHECK(relative_entropy(nu.weights, s.weights()).value() > 0.0);
}

TEST_CASE("kantorovich duality") {
  const auto s = random_space(15, 3);
  const auto nu = dirichlet_measures(s, 1, 4).front().weights;
  const Eigen::MatrixXd cost = cost_matrix(s, ConvexProfile::quadratic(1.0));
  std::vector<Field> trials;
  trials.push_back(Eigen::VectorXd::Constant(15, 1.7));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int k = 0; k < 30; ++k) {
    Field f(15);
    for (auto& v : f) v = g(rng);
    trials.push_back(f);
  }
  const auto rep = kantorovich_duality_check(s, nu, cost, trials);
  CHECK(rep.passed);
  CHECK(std::abs(rep.trial_values.front()) <= 1e-12);
  CHECK(rep.max_trial_excess <= 1e-9);
  CHECK(std::abs(rep.certificate_gap) <= 1e-8);
}

TEST_CASE("transport entropy checks") {
  const auto s = two_points();
  const auto same = te_check(s, ConvexProfile::identity(), ConvexProfile::identity(),
                             {{"mu", s.weights()}});
  CHECK(same.front().passed);
  CHECK(same.front().transport_cost == doctest::Approx(0.0));
  CHECK(same.front().bound.value() == doctest::Approx(0.0));

  // W = 0.3 against Phi^{-1}(H) for nu = (0.8, 0.2).
  const Eigen::Vector2d nu(0.8, 0.2);
  const double H = 0.8 * std::log(1.6) + 0.2 * std::log(0.4);
  const auto tight = te_check(s, ConvexProfile::identity(), ConvexProfile::quadratic(1.0),
                              {{"nu", nu}});
  CHECK(tight.front().bound.value() == doctest::Approx(std::sqrt(2.0 * H)));
  CHECK(tight.front().passed == (0.3 <= std::sqrt(2.0 * H) + 1e-9));
  const auto weak = te_check(s, ConvexProfile::identity(), ConvexProfile::quadratic(100.0),
                             {{"nu", nu}});
  CHECK_FALSE(weak.front().passed);
  CHECK(weak.front().margin.value() < 0.0);
}

TEST_CASE("jensen weakening") {
  const auto s = two_points();
  const auto r = jensen_te_weakening_check(s, ConvexProfile::quadratic(1.0),
                                           ConvexProfile::identity(), Eigen::Vector2d(0.8, 0.2));
  CHECK(r.phi_of_w1 == doctest::Approx(0.045));
  CHECK(r.w_phi == doctest::Approx(0.15));
  CHECK(r.jensen_holds);

  const auto eq = jensen_te_weakening_check(s, ConvexProfile::quadratic(1.0),
                                            ConvexProfile::identity(), s.weights());
  CHECK(eq.jensen_holds);
  CHECK(eq.w_phi == doctest::Approx(0.0));

  const auto rs = random_space(10, 1);
  for (const auto& nu : dirichlet_measures(rs, 6, 2)) {
    const auto j = jensen_te_weakening_check(rs, ConvexProfile::phi1_scaled(1.0),
                                             ConvexProfile::identity(), nu.weights);
    CHECK(j.jensen_holds);
    if (j.te_holds) CHECK(j.weak_te_holds);
  }
}

TEST_CASE("measure family generators") {
  const auto s = random_space(7, 3);
  const auto deltas = point_masses(s);
  CHECK(deltas.size() == 7);
  CHECK(deltas[3].weights[3] == 1.0);
  const auto tilts = exponential_tilts(s, s.coordinate(0), {0.0, 1.0});
  CHECK((tilts[0].weights - s.weights()).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(std::abs(tilts[1].weights.sum() - 1.0) <= 1e-12);
  const auto a = dirichlet_measures(s, 3, 5), b = dirichlet_measures(s, 3, 5);
  for (int k = 0; k < 3; ++k) CHECK(a[k].weights == b[k].weights);
}
