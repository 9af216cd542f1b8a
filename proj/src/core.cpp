#include "mmlab/core.hpp"

#include <cmath>

namespace mmlab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidPoint: return "InvalidPoint";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::DomainExceeded: return "DomainExceeded";
    case ErrorKind::EmptyRegion: return "EmptyRegion";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::MonotonicityViolation: return "MonotonicityViolation";
    case ErrorKind::DegenerateNet: return "DegenerateNet";
    case ErrorKind::DegenerateBall: return "DegenerateBall";
    case ErrorKind::NotRegular: return "NotRegular";
    case ErrorKind::NotSurjective: return "NotSurjective";
    case ErrorKind::ResolutionFloor: return "ResolutionFloor";
    case ErrorKind::MarginViolated: return "MarginViolated";
    case ErrorKind::BracketError: return "BracketError";
  }
  return "Error";
}

const char* to_string(Family f) {
  switch (f) {
    case Family::Normed: return "normed";
    case Family::Hyperbolic: return "hyperbolic";
    case Family::Tree: return "tree";
  }
  return "?";
}

bool operator==(const Point& a, const Point& b) {
  return a.family == b.family && a.branch == b.branch && a.coords == b.coords;
}

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t RandomStream::next_u64() {
  const std::uint64_t key = mix64(seed_ ^ mix64(stream_ + kGolden));
  return mix64(key + (++counter_) * kGolden);
}

double RandomStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() {
  double u1 = uniform();
  const double u2 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

std::size_t RandomStream::index(std::size_t n) {
  return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

RandomStream RandomStream::substream(std::uint64_t id) const {
  return RandomStream(seed_, mix64(stream_ * kGolden + mix64(id + 1)));
}

void ComparisonParams::validate() const {
  if (!std::isfinite(K) || K > 0.0)
    throw Error(ErrorKind::InvalidParams, "curvature bound K must be finite and <= 0");
  if (!std::isfinite(N) || N < 1.0)
    throw Error(ErrorKind::InvalidParams, "dimension parameter N must be >= 1");
}

std::optional<double> Space::radial_jacobian(double, double) const { return std::nullopt; }

void Space::check(const Point& a) const {
  if (a.family != family())
    throw Error(ErrorKind::InvalidPoint, std::string("point of family ") + to_string(a.family) +
                                             " used with a " + to_string(family()) + " space");
  for (double c : a.coords)
    if (!std::isfinite(c)) throw Error(ErrorKind::InvalidPoint, "non-finite coordinate");
  if (!valid_coords(a)) throw Error(ErrorKind::InvalidPoint, "coordinates out of range");
}

double Space::distance(const Point& a, const Point& b) const {
  check(a);
  check(b);
  return distance_impl(a, b);
}

Point Space::intermediate(const Point& p, const Point& x, double t) const {
  check(p);
  check(x);
  if (!(t >= 0.0 && t <= 1.0))
    throw Error(ErrorKind::InvalidParams, "intermediate parameter outside [0, 1]");
  if (t == 0.0) return p;
  if (t == 1.0) return x;
  auto r = extend_impl(p, x, t);
  if (!r) throw Error(ErrorKind::DomainExceeded, "geodesic leaves the space");
  return *r;
}

std::optional<Point> Space::extend(const Point& p, const Point& x, double s) const {
  check(p);
  check(x);
  if (!(s >= 0.0) || !std::isfinite(s))
    throw Error(ErrorKind::InvalidParams, "extension parameter must be finite and >= 0");
  if (s == 1.0) return x;
  return extend_impl(p, x, s);
}

std::optional<Point> Space::chart_point(const Point& p, double theta, double s) const {
  check(p);
  if (!(s >= 0.0)) throw Error(ErrorKind::InvalidParams, "chart length must be >= 0");
  if (s == 0.0) return p;
  return chart_impl(p, theta, s);
}

MassEstimate Space::ball_mass(const Point& p, double r, std::size_t budget,
                              RandomStream& rng) const {
  check(p);
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidParams, "ball radius must be positive");
  if (r > radius_cap() * (1.0 + 1e-12))
    throw Error(ErrorKind::DomainExceeded, "ball radius " + std::to_string(r) +
                                               " beyond sampler cap " +
                                               std::to_string(radius_cap()));
  return ball_mass_impl(p, r, budget, rng);
}

std::vector<Point> Space::sample_ball(const Point& p, double r, std::size_t count,
                                      RandomStream& rng) const {
  check(p);
  if (count == 0) return {};
  if (!(r > 0.0)) throw Error(ErrorKind::EmptyRegion, "ball of non-positive radius");
  if (r > radius_cap() * (1.0 + 1e-12))
    throw Error(ErrorKind::DomainExceeded, "ball radius beyond sampler cap");
  return sample_ball_impl(p, r, count, rng);
}

double distance(const Space& space, const Point& a, const Point& b) {
  return space.distance(a, b);
}

Point intermediate(const Space& space, const Point& p, const Point& x, double t) {
  return space.intermediate(p, x, t);
}

std::vector<Point> contract_set(const Space& space, const Point& p, double t,
                                std::span<const Point> pts) {
  std::vector<Point> out;
  out.reserve(pts.size());
  for (const auto& x : pts) out.push_back(space.intermediate(p, x, t));
  return out;
}

MassEstimate ball_mass(const Space& space, const Point& p, double r, std::size_t budget,
                       RandomStream& rng) {
  return space.ball_mass(p, r, budget, rng);
}

std::vector<Point> sample_ball(const Space& space, const Point& p, double r, std::size_t count,
                               RandomStream& rng) {
  return space.sample_ball(p, r, count, rng);
}

}  // namespace mmlab
