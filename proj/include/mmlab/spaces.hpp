#pragma once

#include <array>
#include <variant>

#include "mmlab/core.hpp"

namespace mmlab {

// ---------------------------------------------------------------------------
// Normed spaces
// ---------------------------------------------------------------------------

struct PNorm {
  double p = 2.0;  ///< exponent in [1, inf]; inf selects the max norm
};

struct WeightedPNorm {
  double p = 2.0;
  std::vector<double> weights;  ///< |x| = (sum w_i |x_i|^p)^(1/p)
};

/// Gauge of a centrally symmetric convex polygon (2-D only).
struct PolygonNorm {
  std::vector<std::array<double, 2>> vertices;
};

struct NormSpec {
  int dim = 2;
  std::variant<PNorm, WeightedPNorm, PolygonNorm> kind = PNorm{};
};

class NormedSpace final : public Space {
 public:
  explicit NormedSpace(NormSpec spec, double radius_cap = 1e9);

  Family family() const override { return Family::Normed; }
  int dimension() const override { return spec_.dim; }
  std::string describe() const override;
  double radius_cap() const override { return cap_; }
  std::optional<double> radial_jacobian(double d, double t) const override;
  Point origin() const override;

  double norm(std::span<const double> v) const;
  /// Dual norm sup{<a, u> : |u| <= 1}.
  double dual_norm(std::span<const double> a) const;
  /// Lebesgue volume of the unit ball.
  double unit_ball_volume() const { return unit_volume_; }
  /// True when the unit sphere contains no segment.
  bool strictly_convex() const;
  const NormSpec& spec() const { return spec_; }

 protected:
  double distance_impl(const Point& a, const Point& b) const override;
  std::optional<Point> extend_impl(const Point& p, const Point& x, double s) const override;
  std::optional<Point> chart_impl(const Point& p, double theta, double s) const override;
  MassEstimate ball_mass_impl(const Point& p, double r, std::size_t budget,
                              RandomStream& rng) const override;
  std::vector<Point> sample_ball_impl(const Point& p, double r, std::size_t count,
                                      RandomStream& rng) const override;
  bool valid_coords(const Point& a) const override;

 private:
  NormSpec spec_;
  double cap_;
  double unit_volume_ = 0.0;
  std::vector<double> box_;  ///< unit-ball bounding half-widths
  // polygon gauge: outward normals and support values per edge
  std::vector<std::array<double, 2>> normals_;
  std::vector<double> support_;
};

// ---------------------------------------------------------------------------
// Hyperbolic plane
// ---------------------------------------------------------------------------

/// Curvature -1 plane, points in polar coordinates about a fixed origin.
/// All geodesic computations run through the hyperboloid model in the frame
/// of the base point.
class HyperbolicPlane final : public Space {
 public:
  explicit HyperbolicPlane(double radius_cap = 8.0) : cap_(radius_cap) {}

  Family family() const override { return Family::Hyperbolic; }
  int dimension() const override { return 2; }
  std::string describe() const override;
  double radius_cap() const override { return cap_; }
  std::optional<double> radial_jacobian(double d, double t) const override;
  Point origin() const override { return Point::polar(0.0, 0.0); }

  /// Polar coordinates of x in the frame where p is the origin.
  std::array<double, 2> local_polar(const Point& p, const Point& x) const;
  /// Inverse of local_polar.
  Point from_local_polar(const Point& p, double rho, double phi) const;
  /// Hyperbolic disk area 2 pi (cosh r - 1).
  static double disk_area(double r);

 protected:
  double distance_impl(const Point& a, const Point& b) const override;
  std::optional<Point> extend_impl(const Point& p, const Point& x, double s) const override;
  std::optional<Point> chart_impl(const Point& p, double theta, double s) const override;
  MassEstimate ball_mass_impl(const Point& p, double r, std::size_t budget,
                              RandomStream& rng) const override;
  std::vector<Point> sample_ball_impl(const Point& p, double r, std::size_t count,
                                      RandomStream& rng) const override;
  bool valid_coords(const Point& a) const override;

 private:
  double cap_;
};

// ---------------------------------------------------------------------------
// Glued-interval R-tree
// ---------------------------------------------------------------------------

/// Finite truncation of the real line with intervals [-delta_i, delta_i]
/// attached at their midpoint to base coordinate delta_i and intervals
/// [0, eps_i] attached at 0 to base coordinate eps_i.
struct GluedIntervalSpec {
  std::vector<double> eps;
  std::vector<double> delta;

  /// eps_i = 10^(-i^2), delta_i = 10^(-i^2-i), i = 1..depth.
  static GluedIntervalSpec power_law(int depth);
  void validate() const;
};

class GluedIntervalTree final : public Space {
 public:
  struct Leg {
    double attach;  ///< base coordinate of the attachment point
    double length;
    std::string label;
  };

  explicit GluedIntervalTree(GluedIntervalSpec spec, double radius_cap = 10.0);

  Family family() const override { return Family::Tree; }
  int dimension() const override { return 1; }
  std::string describe() const override;
  double radius_cap() const override { return cap_; }
  std::optional<double> radial_jacobian(double d, double t) const override;
  Point origin() const override { return Point::tree(0, 0.0); }

  const std::vector<Leg>& legs() const { return legs_; }
  const GluedIntervalSpec& spec() const { return spec_; }
  /// Branch id of the i-th (1-based) delta leg on side +1/-1, or eps leg.
  int delta_leg(int i, int side) const;
  int eps_leg(int i) const;
  Point leg_point(int branch, double offset) const;
  Point base_point(double s) const { return Point::tree(0, s); }
  /// Base coordinate of the point where x's leg meets the line.
  double anchor(const Point& x) const;
  /// All points at distance exactly r from p (a finite set in a tree).
  std::vector<Point> sphere(const Point& p, double r) const;

 protected:
  double distance_impl(const Point& a, const Point& b) const override;
  std::optional<Point> extend_impl(const Point& p, const Point& x, double s) const override;
  std::optional<Point> chart_impl(const Point& p, double theta, double s) const override;
  MassEstimate ball_mass_impl(const Point& p, double r, std::size_t budget,
                              RandomStream& rng) const override;
  std::vector<Point> sample_ball_impl(const Point& p, double r, std::size_t count,
                                      RandomStream& rng) const override;
  bool valid_coords(const Point& a) const override;

 private:
  struct Segment {
    int branch;
    double lo, hi;
  };
  std::vector<Segment> ball_segments(const Point& p, double r) const;
  Point canonical(int branch, double offset) const;

  GluedIntervalSpec spec_;
  double cap_;
  std::vector<Leg> legs_;  // legs_[k-1] is branch k
};

// ---------------------------------------------------------------------------
// Wrappers
// ---------------------------------------------------------------------------

struct BallRegion {
  Point center;
  double radius = 1.0;
};

/// Closed half-space {x : <normal, x> >= offset} of a normed space.
struct HalfSpaceRegion {
  std::vector<double> normal;
  double offset = 0.0;
};

/// Annuli are accepted by the parser only so that they can be rejected as
/// non-convex.
struct AnnulusRegion {
  Point center;
  double inner = 0.0, outer = 1.0;
};

using ConvexRegion = std::variant<BallRegion, HalfSpaceRegion, AnnulusRegion>;

class ConvexSubset final : public Space {
 public:
  ConvexSubset(SpacePtr base, ConvexRegion region);

  Family family() const override { return base_->family(); }
  int dimension() const override { return base_->dimension(); }
  std::string describe() const override;
  MeasureKind measure_kind() const override { return MeasureKind::MonteCarloOnly; }
  double radius_cap() const override { return base_->radius_cap(); }
  bool contains(const Point& x) const override;
  double boundary_distance(const Point& x) const override;
  double density(const Point& x) const override { return base_->density(x); }
  std::optional<double> radial_jacobian(double d, double t) const override {
    return base_->radial_jacobian(d, t);
  }
  Point origin() const override;
  double coordinate_scale(const Point& p) const override { return base_->coordinate_scale(p); }
  const Space& base() const { return *base_; }

 protected:
  double distance_impl(const Point& a, const Point& b) const override;
  std::optional<Point> extend_impl(const Point& p, const Point& x, double s) const override;
  std::optional<Point> chart_impl(const Point& p, double theta, double s) const override;
  MassEstimate ball_mass_impl(const Point& p, double r, std::size_t budget,
                              RandomStream& rng) const override;
  std::vector<Point> sample_ball_impl(const Point& p, double r, std::size_t count,
                                      RandomStream& rng) const override;
  bool valid_coords(const Point& a) const override;

 private:
  SpacePtr base_;
  ConvexRegion region_;
};

/// Gaussian-type reference measure e^{-V} vol with V = r^2 (squared
/// distance from the origin) on the hyperbolic plane.
struct WeightSpec {
  double coefficient = 1.0;  ///< V = coefficient * r^2
};

class WeightedSpace final : public Space {
 public:
  WeightedSpace(SpacePtr base, WeightSpec w);

  Family family() const override { return base_->family(); }
  int dimension() const override { return base_->dimension(); }
  std::string describe() const override;
  double radius_cap() const override { return base_->radius_cap(); }
  double density(const Point& x) const override;
  std::optional<double> radial_jacobian(double d, double t) const override {
    return base_->radial_jacobian(d, t);
  }
  Point origin() const override { return base_->origin(); }
  double coordinate_scale(const Point& p) const override { return base_->coordinate_scale(p); }
  double potential(const Point& x) const;

 protected:
  double distance_impl(const Point& a, const Point& b) const override;
  std::optional<Point> extend_impl(const Point& p, const Point& x, double s) const override;
  std::optional<Point> chart_impl(const Point& p, double theta, double s) const override;
  MassEstimate ball_mass_impl(const Point& p, double r, std::size_t budget,
                              RandomStream& rng) const override;
  std::vector<Point> sample_ball_impl(const Point& p, double r, std::size_t count,
                                      RandomStream& rng) const override;
  bool valid_coords(const Point&) const override { return true; }

 private:
  SpacePtr base_;
  WeightSpec w_;
};

/// lambda X: distances multiplied by lambda, measure by lambda^n.
class RescaledSpace final : public Space {
 public:
  RescaledSpace(SpacePtr base, double lambda, Point center);

  Family family() const override { return base_->family(); }
  int dimension() const override { return base_->dimension(); }
  std::string describe() const override;
  MeasureKind measure_kind() const override { return base_->measure_kind(); }
  double radius_cap() const override { return lambda_ * base_->radius_cap(); }
  bool contains(const Point& x) const override { return base_->contains(x); }
  double boundary_distance(const Point& x) const override {
    return lambda_ * base_->boundary_distance(x);
  }
  double density(const Point& x) const override { return base_->density(x); }
  std::optional<double> radial_jacobian(double d, double t) const override {
    return base_->radial_jacobian(d / lambda_, t);
  }
  Point origin() const override { return center_; }
  double coordinate_scale(const Point& p) const override {
    return lambda_ * base_->coordinate_scale(p);
  }
  double lambda() const { return lambda_; }
  const SpacePtr& base() const { return base_; }

 protected:
  double distance_impl(const Point& a, const Point& b) const override;
  std::optional<Point> extend_impl(const Point& p, const Point& x, double s) const override;
  std::optional<Point> chart_impl(const Point& p, double theta, double s) const override;
  MassEstimate ball_mass_impl(const Point& p, double r, std::size_t budget,
                              RandomStream& rng) const override;
  std::vector<Point> sample_ball_impl(const Point& p, double r, std::size_t count,
                                      RandomStream& rng) const override;
  bool valid_coords(const Point&) const override { return true; }

 private:
  SpacePtr base_;
  double lambda_;
  Point center_;
};

// Constructors -------------------------------------------------------------

SpacePtr make_normed(const NormSpec& spec);
SpacePtr make_hyperbolic();
SpacePtr make_convex_subset(SpacePtr base, ConvexRegion region);
SpacePtr make_glued_intervals(const GluedIntervalSpec& spec);
SpacePtr make_weighted(SpacePtr base, WeightSpec w = {});
SpacePtr rescale(SpacePtr base, double lambda, Point center);

/// Shorthand for the p-norm plane.
SpacePtr make_lp(int dim, double p);

}  // namespace mmlab
