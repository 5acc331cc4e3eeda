#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace funcineq {

using Index = Eigen::Index;
using Field = Eigen::VectorXd;
using Edge = std::pair<Index, Index>;

enum class Combine { l1, l2 };
enum class LineDensity { gaussian, two_sided_exponential };

/// Tolerance on the total mass of probability vectors.
inline constexpr double kMassTolerance = 1e-12;

/// A finite metric-measure space (points, d, mu).
///
/// The metric is stored in one of three forms: a dense distance matrix, point
/// coordinates with an l1/l2 norm, or a product of two factor spaces. Grids with
/// thousands of points never materialise an n x n matrix; `distance(i, j)` is
/// the uniform accessor. Instances are immutable and validated on construction.
class MetricMeasureSpace {
 public:
  /// Validates symmetry, zero diagonal, positivity off the diagonal, the
  /// triangle inequality and the weights. Throws InputError naming the defect.
  static MetricMeasureSpace from_distances(std::vector<std::string> points, Eigen::MatrixXd dist,
                                           Eigen::VectorXd weights, std::vector<Edge> edges = {});

  /// Coordinates are n x dim. Points must be pairwise distinct.
  static MetricMeasureSpace from_coordinates(std::vector<std::string> points,
                                             Eigen::MatrixXd coords, Combine metric,
                                             Eigen::VectorXd weights, std::vector<Edge> edges = {});

  Index size() const { return static_cast<Index>(weights_.size()); }
  double distance(Index i, Index j) const;
  /// Full matrix; intended for spaces of a few hundred points.
  Eigen::MatrixXd distance_matrix() const;
  double diameter() const;

  const Eigen::VectorXd& weights() const { return weights_; }
  const std::vector<std::string>& points() const { return points_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool has_edges() const { return !edges_.empty(); }

  /// Coordinates when the space was built from them (lines, random spaces).
  const std::optional<Eigen::MatrixXd>& coordinates() const { return coords_; }
  /// First coordinate of every point; throws if the space has no coordinates.
  Eigen::VectorXd coordinate(Index axis = 0) const;

  bool is_dense() const { return kind_ == Kind::dense; }
  Combine coordinate_metric() const { return metric_; }

  /// Mean of a field under the weights.
  double mean(const Field& f) const { return weights_.dot(f); }

  friend MetricMeasureSpace product_space(const MetricMeasureSpace& a, const MetricMeasureSpace& b,
                                          Combine combine);

 private:
  enum class Kind { dense, coordinates, product };
  MetricMeasureSpace() = default;

  Kind kind_ = Kind::dense;
  std::vector<std::string> points_;
  Eigen::VectorXd weights_;
  std::vector<Edge> edges_;
  Eigen::MatrixXd dist_;
  std::optional<Eigen::MatrixXd> coords_;
  Combine metric_ = Combine::l2;
  std::shared_ptr<const MetricMeasureSpace> left_, right_;
};

/// Probability vector over the points of a host space.
void check_probability(const Eigen::VectorXd& w, Index n, const char* what);

/// Field values with a positivity flag (f-type fields must be strictly positive).
struct ScalarField {
  Eigen::VectorXd values;
  bool positive = false;
};

void check_field(const MetricMeasureSpace& space, const Field& f, bool positive, const char* what);

/// Grid x_k = -half_width + k * step with weights proportional to the density,
/// renormalised after truncation. Path edges join consecutive grid points.
MetricMeasureSpace discretize_line(LineDensity density, double half_width, double step);

/// Cartesian product with product weights and l1 or l2 combined distances.
MetricMeasureSpace product_space(const MetricMeasureSpace& a, const MetricMeasureSpace& b,
                                 Combine combine);

/// n uniform points in [0,1]^2 (l2 distance) with symmetric Dirichlet(1) weights.
MetricMeasureSpace random_space(int n, std::uint64_t seed);

/// McShane-type envelope x -> min_y g(y) + L d(x,y); the largest L-Lipschitz minorant of g.
Field lipschitz_regularize(const MetricMeasureSpace& space, const Field& g, double L);

/// max over pairs of |g_i - g_j| / d_ij (0 for a single point).
double lipschitz_constant(const MetricMeasureSpace& space, const Field& g);

}  // namespace funcineq
