#include "funcineq/space.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "funcineq/errors.hpp"
#include "funcineq/numerics.hpp"

namespace funcineq {

namespace {

std::vector<std::string> default_ids(Index n, const char* prefix) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

void check_edges(const std::vector<Edge>& edges, Index n) {
  for (const auto& [a, b] : edges)
    if (a < 0 || b < 0 || a >= n || b >= n || a == b)
      throw InputError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                       ") does not join two distinct points");
}

void check_ids(const std::vector<std::string>& points, Index n) {
  if (static_cast<Index>(points.size()) != n)
    throw InputError("points: expected " + std::to_string(n) + " identifiers, got " +
                     std::to_string(points.size()));
}

}  // namespace

void check_probability(const Eigen::VectorXd& w, Index n, const char* what) {
  if (w.size() != n)
    throw InputError(std::string(what) + ": length " + std::to_string(w.size()) +
                     " does not match " + std::to_string(n) + " points");
  for (Index i = 0; i < n; ++i)
    if (!std::isfinite(w[i]) || w[i] < 0.0)
      throw InputError(std::string(what) + ": entry " + std::to_string(i) + " is negative");
  const double total = w.sum();
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": entries sum to " << total << ", not 1";
    throw InputError(os.str());
  }
}

void check_field(const MetricMeasureSpace& space, const Field& f, bool positive,
                 const char* what) {
  if (f.size() != space.size())
    throw InputError(std::string(what) + ": length " + std::to_string(f.size()) +
                     " does not match " + std::to_string(space.size()) + " points");
  for (Index i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f[i]))
      throw InputError(std::string(what) + ": entry " + std::to_string(i) + " is not finite");
    if (positive && !(f[i] > 0.0))
      throw InputError(std::string(what) + ": entry " + std::to_string(i) +
                       " must be strictly positive");
  }
}

MetricMeasureSpace MetricMeasureSpace::from_distances(std::vector<std::string> points,
                                                      Eigen::MatrixXd dist,
                                                      Eigen::VectorXd weights,
                                                      std::vector<Edge> edges) {
  const Index n = dist.rows();
  if (n < 1 || dist.cols() != n) throw InputError("dist: matrix must be square and non-empty");
  check_ids(points, n);
  for (Index i = 0; i < n; ++i) {
    if (dist(i, i) != 0.0)
      throw InputError("dist: diagonal entry " + std::to_string(i + 1) + " is not zero");
    for (Index j = 0; j < n; ++j) {
      if (!std::isfinite(dist(i, j)))
        throw InputError("dist: entry not finite");
      if (dist(i, j) != dist(j, i))
        throw InputError("dist: asymmetric matrix at (" + std::to_string(i + 1) + "," +
                         std::to_string(j + 1) + ")");
      if (i != j && !(dist(i, j) > 0.0))
        throw InputError("dist: distinct points " + std::to_string(i + 1) + " and " +
                         std::to_string(j + 1) + " at zero distance");
    }
  }
  // Worst triangle violation d(i,k) - d(i,j) - d(j,k), j the intermediate point.
  double worst = 0.0;
  Index wi = 0, wj = 0, wk = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      for (Index k = 0; k < n; ++k) {
        const double excess = dist(i, k) - dist(i, j) - dist(j, k);
        if (excess > worst) {
          worst = excess;
          wi = i;
          wj = j;
          wk = k;
        }
      }
  const double scale = dist.maxCoeff();
  if (worst > 1e-12 * std::max(scale, 1.0)) {
    if (wi > wk) std::swap(wi, wk);
    std::ostringstream os;
    os << "dist: triangle inequality violated at (" << wi + 1 << "," << wj + 1 << "," << wk + 1
       << "): d(" << wi + 1 << "," << wk + 1 << ") exceeds the path through " << wj + 1
       << " by " << worst;
    throw InputError(os.str());
  }
  check_probability(weights, n, "weights");
  for (Index i = 0; i < n; ++i)
    if (!(weights[i] > 0.0))
      throw InputError("weights: point " + std::to_string(i + 1) + " has zero weight");
  check_edges(edges, n);

  MetricMeasureSpace s;
  s.kind_ = Kind::dense;
  s.points_ = std::move(points);
  s.dist_ = std::move(dist);
  s.weights_ = std::move(weights);
  s.edges_ = std::move(edges);
  return s;
}

MetricMeasureSpace MetricMeasureSpace::from_coordinates(std::vector<std::string> points,
                                                        Eigen::MatrixXd coords, Combine metric,
                                                        Eigen::VectorXd weights,
                                                        std::vector<Edge> edges) {
  const Index n = coords.rows();
  if (n < 1 || coords.cols() < 1) throw InputError("coords: need at least one point and axis");
  check_ids(points, n);
  if (!coords.allFinite()) throw InputError("coords: entries must be finite");
  check_probability(weights, n, "weights");
  for (Index i = 0; i < n; ++i)
    if (!(weights[i] > 0.0))
      throw InputError("weights: point " + std::to_string(i + 1) + " has zero weight");
  check_edges(edges, n);

  MetricMeasureSpace s;
  s.kind_ = Kind::coordinates;
  s.points_ = std::move(points);
  s.coords_ = std::move(coords);
  s.metric_ = metric;
  s.weights_ = std::move(weights);
  s.edges_ = std::move(edges);
  if (s.coords_->cols() == 1) {
    std::vector<double> xs(s.coords_->data(), s.coords_->data() + n);
    std::sort(xs.begin(), xs.end());
    if (std::adjacent_find(xs.begin(), xs.end()) != xs.end())
      throw InputError("coords: two points coincide");
  } else {
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        if (!(s.distance(i, j) > 0.0))
          throw InputError("coords: points " + std::to_string(i + 1) + " and " +
                           std::to_string(j + 1) + " coincide");
  }
  return s;
}

double MetricMeasureSpace::distance(Index i, Index j) const {
  switch (kind_) {
    case Kind::dense:
      return dist_(i, j);
    case Kind::coordinates: {
      const auto& c = *coords_;
      if (c.cols() == 1) return std::abs(c(i, 0) - c(j, 0));
      if (metric_ == Combine::l1) return (c.row(i) - c.row(j)).lpNorm<1>();
      return (c.row(i) - c.row(j)).norm();
    }
    case Kind::product: {
      const Index nb = right_->size();
      const double da = left_->distance(i / nb, j / nb);
      const double db = right_->distance(i % nb, j % nb);
      return metric_ == Combine::l1 ? da + db : std::hypot(da, db);
    }
  }
  return 0.0;
}

Eigen::MatrixXd MetricMeasureSpace::distance_matrix() const {
  if (kind_ == Kind::dense) return dist_;
  const Index n = size();
  Eigen::MatrixXd d(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) d(i, j) = distance(i, j);
  return d;
}

double MetricMeasureSpace::diameter() const {
  if (kind_ == Kind::coordinates && coords_->cols() == 1)
    return coords_->maxCoeff() - coords_->minCoeff();
  double best = 0.0;
  for (Index i = 0; i < size(); ++i)
    for (Index j = i + 1; j < size(); ++j) best = std::max(best, distance(i, j));
  return best;
}

Eigen::VectorXd MetricMeasureSpace::coordinate(Index axis) const {
  if (!coords_ || axis >= coords_->cols())
    throw DomainError("space has no coordinate axis " + std::to_string(axis));
  return coords_->col(axis);
}

MetricMeasureSpace discretize_line(LineDensity density, double half_width, double step) {
  if (!(half_width > 0.0) || !(step > 0.0))
    throw DomainError("discretize_line: half_width and step must be positive");
  if (step > 2.0 * half_width)
    throw DomainError("discretize_line: step exceeds the window, no interior grid");
  if (half_width / step > 1e6) throw DomainError("discretize_line: grid size overflow");
  const Index n = static_cast<Index>(std::floor(2.0 * half_width / step + 1e-9)) + 1;
  Eigen::MatrixXd x(n, 1);
  Eigen::VectorXd log_density(n);
  for (Index k = 0; k < n; ++k) {
    x(k, 0) = -half_width + static_cast<double>(k) * step;
    log_density[k] = density == LineDensity::gaussian ? -0.5 * x(k, 0) * x(k, 0)
                                                      : -std::abs(x(k, 0));
  }
  const double log_z = log_sum_exp(log_density);
  Eigen::VectorXd w = (log_density.array() - log_z).exp().matrix();
  w /= w.sum();
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n - 1));
  for (Index k = 0; k + 1 < n; ++k) edges.emplace_back(k, k + 1);
  return MetricMeasureSpace::from_coordinates(default_ids(n, "x"), std::move(x), Combine::l2,
                                              std::move(w), std::move(edges));
}

MetricMeasureSpace product_space(const MetricMeasureSpace& a, const MetricMeasureSpace& b,
                                 Combine combine) {
  const Index na = a.size(), nb = b.size();
  if (na * nb > 10000) throw DomainError("product_space: more than 1e4 points");
  MetricMeasureSpace s;
  s.kind_ = MetricMeasureSpace::Kind::product;
  s.metric_ = combine;
  s.left_ = std::make_shared<const MetricMeasureSpace>(a);
  s.right_ = std::make_shared<const MetricMeasureSpace>(b);
  s.weights_.resize(na * nb);
  s.points_.reserve(static_cast<std::size_t>(na * nb));
  for (Index i = 0; i < na; ++i)
    for (Index j = 0; j < nb; ++j) {
      s.weights_[i * nb + j] = a.weights()[i] * b.weights()[j];
      s.points_.push_back("(" + a.points()[i] + "," + b.points()[j] + ")");
    }
  s.weights_ /= s.weights_.sum();
  for (const auto& [u, v] : a.edges())
    for (Index j = 0; j < nb; ++j) s.edges_.emplace_back(u * nb + j, v * nb + j);
  for (const auto& [u, v] : b.edges())
    for (Index i = 0; i < na; ++i) s.edges_.emplace_back(i * nb + u, i * nb + v);
  return s;
}

MetricMeasureSpace random_space(int n, std::uint64_t seed) {
  if (n < 2 || n > 500) throw DomainError("random_space: n must lie in [2, 500]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd coords(n, 2);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < 2; ++k) coords(i, k) = unit(rng);
  // Dirichlet(1, ..., 1): normalised standard exponentials.
  Eigen::VectorXd w(n);
  for (Index i = 0; i < n; ++i) w[i] = -std::log1p(-unit(rng)) + 1e-12;
  w /= w.sum();
  return MetricMeasureSpace::from_coordinates(default_ids(n, "p"), std::move(coords), Combine::l2,
                                              std::move(w));
}

Field lipschitz_regularize(const MetricMeasureSpace& space, const Field& g, double L) {
  if (!(L > 0.0)) throw DomainError("lipschitz_regularize: L must be positive");
  check_field(space, g, false, "field");
  const Index n = space.size();
  Field out(n);
  for (Index i = 0; i < n; ++i) {
    double best = g[i];
    for (Index j = 0; j < n; ++j) best = std::min(best, g[j] + L * space.distance(i, j));
    out[i] = best;
  }
  return out;
}

double lipschitz_constant(const MetricMeasureSpace& space, const Field& g) {
  double best = 0.0;
  for (Index i = 0; i < space.size(); ++i)
    for (Index j = i + 1; j < space.size(); ++j)
      best = std::max(best, std::abs(g[i] - g[j]) / space.distance(i, j));
  return best;
}

}  // namespace funcineq
