#include <cmath>
#include <sstream>

#include "mmlab/spaces.hpp"

namespace mmlab {

namespace {

// cosh would overflow beyond this radius
constexpr double kMaxRadius = 700.0;

using Vec3 = std::array<double, 3>;

Vec3 lift(double rho, double phi) {
  const double sh = std::sinh(rho);
  return {std::cosh(rho), sh * std::cos(phi), sh * std::sin(phi)};
}

Vec3 boost(const Vec3& v, double a) {
  const double c = std::cosh(a), s = std::sinh(a);
  return {c * v[0] + s * v[1], s * v[0] + c * v[1], v[2]};
}

Vec3 rotate(const Vec3& v, double th) {
  const double c = std::cos(th), s = std::sin(th);
  return {v[0], c * v[1] - s * v[2], s * v[1] + c * v[2]};
}

double wrap_angle(double th) {
  th = std::remainder(th, 2.0 * kPi);
  return th == -kPi ? kPi : th;
}

double polar_distance(double r1, double t1, double r2, double t2) {
  const double a = std::sinh(0.5 * (r1 - r2));
  const double b = std::sin(0.5 * (t1 - t2));
  return 2.0 * std::asinh(std::sqrt(a * a + std::sinh(r1) * std::sinh(r2) * b * b));
}

}  // namespace

std::string HyperbolicPlane::describe() const {
  std::ostringstream os;
  os << "hyperbolic(curvature=-1, cap=" << cap_ << ")";
  return os.str();
}

bool HyperbolicPlane::valid_coords(const Point& a) const {
  return a.size() == 2 && a[0] >= 0.0 && a[0] <= kMaxRadius;
}

double HyperbolicPlane::disk_area(double r) {
  const double h = std::sinh(0.5 * r);
  return 4.0 * kPi * h * h;
}

std::optional<double> HyperbolicPlane::radial_jacobian(double d, double t) const {
  if (d == 0.0) return t * t;
  return t * (std::sinh(t * d) / std::sinh(d));
}

std::array<double, 2> HyperbolicPlane::local_polar(const Point& p, const Point& x) const {
  const double rho = polar_distance(p[0], p[1], x[0], x[1]);
  if (rho == 0.0) return {0.0, 0.0};
  // pull x back by the isometry taking the origin to p
  const Vec3 y = boost(rotate(lift(x[0], x[1]), -p[1]), -p[0]);
  return {rho, std::atan2(y[2], y[1])};
}

Point HyperbolicPlane::from_local_polar(const Point& p, double rho, double phi) const {
  if (p[0] == 0.0) return Point::polar(rho, wrap_angle(phi + p[1]));
  const Vec3 z = boost(lift(rho, phi), p[0]);
  const double r = std::asinh(std::hypot(z[1], z[2]));
  const double th = r == 0.0 ? 0.0 : wrap_angle(std::atan2(z[2], z[1]) + p[1]);
  return Point::polar(r, th);
}

double HyperbolicPlane::distance_impl(const Point& a, const Point& b) const {
  return polar_distance(a[0], a[1], b[0], b[1]);
}

std::optional<Point> HyperbolicPlane::extend_impl(const Point& p, const Point& x,
                                                  double s) const {
  const auto [rho, phi] = local_polar(p, x);
  if (p[0] + s * rho > kMaxRadius) return std::nullopt;
  return from_local_polar(p, s * rho, phi);
}

std::optional<Point> HyperbolicPlane::chart_impl(const Point& p, double theta, double s) const {
  if (p[0] + s > kMaxRadius) return std::nullopt;
  return from_local_polar(p, s, theta);
}

MassEstimate HyperbolicPlane::ball_mass_impl(const Point&, double r, std::size_t,
                                             RandomStream&) const {
  return MassEstimate::exact(disk_area(r));
}

std::vector<Point> HyperbolicPlane::sample_ball_impl(const Point& p, double r, std::size_t count,
                                                     RandomStream& rng) const {
  std::vector<Point> out;
  out.reserve(count);
  const double h = std::sinh(0.5 * r);
  for (std::size_t i = 0; i < count; ++i) {
    // area inside radius rho is proportional to sinh^2(rho / 2)
    const double rho = 2.0 * std::asinh(std::sqrt(rng.uniform()) * h);
    const double phi = rng.uniform(-kPi, kPi);
    out.push_back(from_local_polar(p, rho, phi));
  }
  return out;
}

SpacePtr make_hyperbolic() { return std::make_shared<HyperbolicPlane>(); }

}  // namespace mmlab
