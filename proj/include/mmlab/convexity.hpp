#pragma once

#include <map>

#include "mmlab/spaces.hpp"

namespace mmlab {

/// The configuration behind a reported violation, kept so it can be
/// re-evaluated.
struct Witness {
  std::vector<Point> points;
  double t = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct AuditReport {
  std::string name;
  std::size_t trials = 0;
  std::size_t degenerate = 0;  ///< resampled configurations
  double tolerance = 0.0;
  /// Largest signed violation, relative to the natural scale of the check.
  double worst = -kInf;
  std::optional<Witness> witness;
  bool pass = true;
  std::vector<double> per_stream_worst;
  std::map<std::string, double> metrics;
  std::map<std::string, std::vector<double>> series;

  /// Folds one observation in; keeps the witness of the largest violation.
  void observe(double violation, Witness w);
  void merge(const AuditReport& other);
  void finalize();
};

/// Sampling window for audits.
struct SampleBall {
  Point center;
  double radius = 1.0;
};

struct AuditOptions {
  std::size_t trials = 1000;
  double tol = 1e-10;
  unsigned jobs = 1;
  std::size_t batch = 256;  ///< trials per random substream
};

AuditReport busemann_convexity_audit(const Space& space, const SampleBall& region,
                                     const AuditOptions& opt, const RandomStream& rng);
AuditReport concavity_audit(const Space& space, const Point& p, const SampleBall& region,
                            const AuditOptions& opt, const RandomStream& rng);
AuditReport cone_type_audit(const Space& space, const Point& p, const SampleBall& region,
                            const AuditOptions& opt, const RandomStream& rng);
/// Estimates sup d(x_t, y_t) / d(x, y); passes iff the ratio stays below t(1 + tol).
AuditReport contraction_lipschitz_audit(const Space& space, const Point& p, double t,
                                        const SampleBall& region, const AuditOptions& opt,
                                        const RandomStream& rng);

enum class Uniqueness { Unique, Multiple, Inconclusive };
const char* to_string(Uniqueness u);

struct UniquenessResult {
  Uniqueness verdict = Uniqueness::Inconclusive;
  std::vector<Point> midpoints;
  double min_defect = kInf;
  double resolution = kInf;  ///< spacing of the candidate net after refinement
  std::size_t candidates = 0;
};

/// Searches the midpoint set of x and y on the sphere S(x, d(x,y)/2).
/// Candidates with defect <= min(tol, tol^2 / d(x,y)) count as midpoints;
/// two of them more than 10 tol apart make the verdict Multiple.
UniquenessResult uniqueness_probe(const Space& space, const Point& x, const Point& y,
                                  std::size_t grid, double tol);

struct ExtendabilityOptions {
  std::size_t probes = 200;
  std::size_t sources = 2000;
  unsigned jobs = 1;
};

/// Checks that Phi_t(B(p, r)) is (delta t r)-dense in B(p, t r).
AuditReport almost_extendability_audit(const Space& space, const Point& p, double delta,
                                       std::span<const double> radii,
                                       std::span<const double> t_grid,
                                       const ExtendabilityOptions& opt, const RandomStream& rng);

struct RaySample {
  Point origin;
  Point anchor;
  std::vector<double> grid;
  std::vector<Point> points;
};

/// Unit-speed ray from `origin` through `anchor`, evaluated on `grid`.
RaySample make_ray(const Space& space, const Point& origin, const Point& anchor,
                   std::vector<double> grid);
/// Evaluates gamma at arclength s.
Point ray_at(const Space& space, const RaySample& gamma, double s);
/// Largest | d(gamma(s), gamma(t)) - |s - t| | over grid pairs.
double ray_isometry_defect(const Space& space, const RaySample& ray);

struct ParallelRay {
  RaySample eta;
  std::vector<double> horizons;
  std::vector<double> cauchy_gaps;  ///< max over the grid between successive horizons
  std::vector<double> distances;    ///< d(gamma(t), eta(t)) on the grid
  bool converged = false;
};

/// Builds a ray from y as the limit of shortest paths y -> gamma(T_i) with
/// T_i = T 2^i, i = 0..6.
ParallelRay parallel_ray_construct(const Space& space, const Point& y, const RaySample& gamma,
                                   double T);

/// Subdivides the contracted geodesic x_t -> y_t, pushes the points back out
/// along extensions from p and reports each link's slack
/// d(z_i, z_{i+1}) - t d(w_i, w_{i+1}).
AuditReport globalization_chain_check(const Space& space, const Point& p, const Point& x,
                                      const Point& y, double t, int m, double tol);

}  // namespace mmlab
