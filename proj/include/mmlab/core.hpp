#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind {
  InvalidPoint,
  InvalidSpec,
  InvalidParams,
  DomainExceeded,
  EmptyRegion,
  Unsupported,
  NoConvergence,
  MonotonicityViolation,
  DegenerateNet,
  DegenerateBall,
  NotRegular,
  NotSurjective,
  ResolutionFloor,
  MarginViolated,
  BracketError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

enum class Family { Normed, Hyperbolic, Tree };

const char* to_string(Family f);

/// A point of one model space.
///
/// Normed spaces store the vector components in `coords`. The hyperbolic
/// plane stores polar coordinates `{r, theta}` around its origin. Glued
/// interval trees store `{offset}` plus a `branch` id: branch 0 is the base
/// line (offset = base coordinate), branch k > 0 is an attached leg (offset =
/// distance from its attachment point).
struct Point {
  Family family = Family::Normed;
  std::vector<double> coords;
  int branch = 0;

  static Point vec(std::vector<double> c) { return {Family::Normed, std::move(c), 0}; }
  static Point polar(double r, double theta) { return {Family::Hyperbolic, {r, theta}, 0}; }
  static Point tree(int branch, double offset) { return {Family::Tree, {offset}, branch}; }

  double operator[](std::size_t i) const { return coords[i]; }
  std::size_t size() const { return coords.size(); }
};

bool operator==(const Point& a, const Point& b);

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so a stream can be replayed from its ids alone.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  std::size_t index(std::size_t n);

  /// Independent child stream; children of distinct ids never share draws.
  RandomStream substream(std::uint64_t id) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

enum class MassMethod { Exact, MonteCarlo };

struct MassEstimate {
  double value = 0.0;
  double std_error = 0.0;
  MassMethod method = MassMethod::Exact;
  std::size_t samples = 0;

  static MassEstimate exact(double v) { return {v, 0.0, MassMethod::Exact, 0}; }
};

/// Curvature bound K <= 0 and dimension parameter N >= 1.
struct ComparisonParams {
  double K = 0.0;
  double N = 1.0;

  void validate() const;
};

enum class MeasureKind { Exact, MonteCarloOnly };

/// A metric measure space with exact analytic oracles.
///
/// The public entry points validate their arguments and forward to the
/// family-specific `*_impl` hooks. Spaces are immutable once built.
class Space {
 public:
  virtual ~Space() = default;

  virtual Family family() const = 0;
  virtual int dimension() const = 0;
  virtual std::string describe() const = 0;
  virtual MeasureKind measure_kind() const { return MeasureKind::Exact; }

  double distance(const Point& a, const Point& b) const;
  /// Canonical t-intermediate point on the shortest path p -> x.
  Point intermediate(const Point& p, const Point& x, double t) const;
  /// Point at parameter s >= 0 along the canonical geodesic p -> x extended
  /// past x, i.e. d(p, result) = s * d(p, x). Empty when the extension
  /// leaves the space.
  std::optional<Point> extend(const Point& p, const Point& x, double s) const;
  /// Point reached from p along chart direction theta after chart length s.
  /// One-dimensional spaces only look at the sign of cos(theta).
  std::optional<Point> chart_point(const Point& p, double theta, double s) const;

  MassEstimate ball_mass(const Point& p, double r, std::size_t budget, RandomStream& rng) const;
  std::vector<Point> sample_ball(const Point& p, double r, std::size_t count,
                                 RandomStream& rng) const;

  virtual bool contains(const Point&) const { return true; }
  /// Distance to the boundary of a convex-subset restriction; infinite for
  /// spaces without boundary.
  virtual double boundary_distance(const Point&) const { return kInf; }
  /// Largest ball radius the sampler and mass oracle accept.
  virtual double radius_cap() const = 0;
  /// Density of the reference measure against the Hausdorff measure.
  virtual double density(const Point&) const { return 1.0; }
  /// Mass distortion of the geodesic contraction toward p at a point at
  /// distance d from p, against the unweighted Hausdorff measure.
  virtual std::optional<double> radial_jacobian(double d, double t) const;
  virtual Point origin() const = 0;
  /// Size of the coordinates of p in distance units, so that rounding in
  /// geodesic computations at p is about eps * coordinate_scale(p).
  virtual double coordinate_scale(const Point& p) const { return 1.0 + distance(origin(), p); }

  void check(const Point& a) const;

 protected:
  virtual double distance_impl(const Point& a, const Point& b) const = 0;
  virtual std::optional<Point> extend_impl(const Point& p, const Point& x, double s) const = 0;
  virtual std::optional<Point> chart_impl(const Point& p, double theta, double s) const = 0;
  virtual MassEstimate ball_mass_impl(const Point& p, double r, std::size_t budget,
                                      RandomStream& rng) const = 0;
  virtual std::vector<Point> sample_ball_impl(const Point& p, double r, std::size_t count,
                                              RandomStream& rng) const = 0;
  virtual bool valid_coords(const Point& a) const = 0;
};

using SpacePtr = std::shared_ptr<const Space>;

double distance(const Space& space, const Point& a, const Point& b);
Point intermediate(const Space& space, const Point& p, const Point& x, double t);
/// Pointwise image of `pts` under the t-contraction toward p.
std::vector<Point> contract_set(const Space& space, const Point& p, double t,
                                std::span<const Point> pts);
MassEstimate ball_mass(const Space& space, const Point& p, double r, std::size_t budget,
                       RandomStream& rng);
std::vector<Point> sample_ball(const Space& space, const Point& p, double r, std::size_t count,
                               RandomStream& rng);

/// Runs `batches` independent work items on up to `jobs` threads. Results are
/// returned in batch order regardless of scheduling.
template <class Result, class Fn>
std::vector<Result> run_batches(std::size_t batches, unsigned jobs, Fn&& fn);

}  // namespace mmlab

#include "mmlab/detail/batches.hpp"
