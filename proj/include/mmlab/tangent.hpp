#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>

#include "mmlab/spaces.hpp"

namespace mmlab {

/// A finite pointed metric space.
class FiniteMetric {
 public:
  FiniteMetric() = default;
  FiniteMetric(std::vector<std::string> labels, Eigen::MatrixXd d, std::size_t base = 0);

  std::size_t size() const { return labels_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return d_(i, j); }
  const Eigen::MatrixXd& matrix() const { return d_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t base() const { return base_; }
  double diameter() const;

  /// Throws InvalidParams unless the diagonal is zero, the matrix is exactly
  /// symmetric and the triangle inequality holds within 1e-10 * diameter.
  void validate() const;

  /// Sub-metric on the given indices; `base` indexes into `idx`.
  FiniteMetric restrict(const std::vector<std::size_t>& idx, std::size_t base = 0) const;
  /// Same space with points reordered by `perm` (new i = old perm[i]).
  FiniteMetric permuted(const std::vector<std::size_t>& perm) const;
  FiniteMetric scaled(double lambda) const;

  /// Header `labels,<l0>,...` with the base label prefixed by `*`, then one
  /// row per point.
  std::string to_csv() const;
  static FiniteMetric from_csv(const std::string& text);

  /// Distance matrix of points of a space.
  static FiniteMetric of_points(const Space& space, const std::vector<Point>& pts,
                                std::size_t base = 0);

 private:
  std::vector<std::string> labels_;
  Eigen::MatrixXd d_;
  std::size_t base_ = 0;
};

/// Geodesic tangent cone distances d* between p (index 0, label "o") and
/// the given points, from the non-increasing ratios d(x_t, y_t)/t.
FiniteMetric log_map(const Space& space, const Point& p, const std::vector<Point>& pts,
                     const std::vector<double>& t_sequence);

/// t = 2^-k, k = 0..12.
std::vector<double> default_t_sequence();

/// Farthest-point net of k points of B(p, R/lambda), starting from p, with
/// distances multiplied by lambda. `pool` candidates are sampled.
FiniteMetric tangent_net(const Space& space, const Point& p, double lambda, double R,
                         std::size_t k, const RandomStream& rng, std::size_t pool = 4000);
/// The points behind tangent_net, p first.
std::vector<Point> tangent_net_points(const Space& space, const Point& p, double lambda, double R,
                                      std::size_t k, const RandomStream& rng,
                                      std::size_t pool = 4000);

enum class GHMethod { Exact, Heuristic };
const char* to_string(GHMethod m);

struct GHBound {
  double lower = 0.0;
  double upper = 0.0;
  GHMethod method = GHMethod::Exact;
  /// Pairs (i in X, j in Y) of an optimal correspondence in exact mode.
  std::vector<std::pair<std::size_t, std::size_t>> correspondence;
};

/// Pointed Gromov-Hausdorff bounds. Exact when both sizes are <= cap.
GHBound gh_bounds(const FiniteMetric& X, const FiniteMetric& Y, std::size_t cap = 8);

/// Distortion of the correspondence generated by f: X -> Y and g: Y -> X.
double correspondence_distortion(const FiniteMetric& X, const FiniteMetric& Y,
                                 const std::vector<std::size_t>& f,
                                 const std::vector<std::size_t>& g);

struct TangentProbe {
  bool agree = true;
  double max_upper = 0.0;  ///< largest pairwise GH upper bound
  double max_lower = 0.0;  ///< largest pairwise GH lower bound
  std::pair<std::size_t, std::size_t> witness{0, 0};  ///< scale indices
  bool exact = true;
  std::vector<double> scales;
  std::vector<std::vector<GHBound>> bounds;
};

/// Compares tangent nets across scales spanning at least two decades.
TangentProbe tangent_uniqueness_probe(const Space& space, const Point& p,
                                      const std::vector<double>& scales, double R, std::size_t k,
                                      std::size_t cap, const RandomStream& rng,
                                      double threshold = 0.05);

/// Star-shaped description of a planar unit ball by its boundary radii.
struct NormModel2D {
  std::vector<double> theta;   ///< increasing, in [-pi, pi)
  std::vector<double> radius;  ///< N(theta) > 0
  Eigen::Matrix2d transform = Eigen::Matrix2d::Identity();
  double inner = 0.0;  ///< inscribed radius
  double outer = 0.0;  ///< circumscribed radius
  double containment_ratio = 0.0;

  /// Gauge of the polygon through the boundary samples.
  double gauge(double x, double y) const;
  double max_asymmetry() const;
  /// Smallest normalized cross product of consecutive boundary edges.
  double min_turn() const;
  void validate(double tol = 1e-9) const;
  std::string to_csv() const;
  static NormModel2D from_gauge(const std::function<double(double, double)>& g,
                                std::size_t m);
};

NormModel2D john_normalize(const NormModel2D& model);

/// Unit ball of d* at p along `resolution` chart directions.
NormModel2D norm_recover(const Space& space, const Point& p, std::size_t resolution,
                         const std::vector<double>& t_sequence, double tol = 1e-3);

struct AlmostIsometryResult {
  bool pass = true;
  double max_deviation = 0.0;  ///< sup |dY(f x, f x') / dX(x, x') - 1|
  std::pair<std::size_t, std::size_t> worst_pair{0, 0};
  double uncovered = 0.0;  ///< farthest target point from the image
};

/// `f` maps X indices to Y indices; every Y point must lie within `cover` of
/// the image, else NotSurjective.
AlmostIsometryResult almost_isometry_audit(const FiniteMetric& X, const FiniteMetric& Y,
                                           const std::vector<std::size_t>& f, double eps,
                                           double cover);

struct ExpRadiusOptions {
  std::size_t angles = 32;
  std::size_t levels = 4;
  std::size_t targets = 200;
  double floor_fraction = 1e-3;
  double rel_tol = 1e-3;
};

/// Largest R <= R_cap at which exp_p is an eps-almost isometry on a polar
/// net; empty when the floor radius already fails.
std::optional<double> exp_almost_isometry_radius(const Space& space, const Point& p, double eps,
                                                 double R_cap, const RandomStream& rng,
                                                 const ExpRadiusOptions& opt = {});

/// Single-radius check used by the bisection.
AlmostIsometryResult exp_almost_isometry_at(const Space& space, const Point& p, double eps,
                                            double R, const RandomStream& rng,
                                            const ExpRadiusOptions& opt = {});

}  // namespace mmlab
