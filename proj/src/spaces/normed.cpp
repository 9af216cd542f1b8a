#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmlab/spaces.hpp"

namespace mmlab {

namespace {

double lp_unit_volume(int n, double p) {
  if (std::isinf(p)) return std::pow(2.0, n);
  return std::pow(2.0 * std::tgamma(1.0 + 1.0 / p), n) / std::tgamma(1.0 + n / p);
}

double lp_norm(std::span<const double> v, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double c : v) m = std::max(m, std::abs(c));
    return m;
  }
  if (p == 1.0) {
    double s = 0.0;
    for (double c : v) s += std::abs(c);
    return s;
  }
  if (p == 2.0) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
  }
  // scale by the max entry so large exponents do not overflow
  double m = 0.0;
  for (double c : v) m = std::max(m, std::abs(c));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double c : v) s += std::pow(std::abs(c) / m, p);
  return m * std::pow(s, 1.0 / p);
}

double conjugate(double p) {
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

void check_exponent(double p) {
  if (!(p >= 1.0)) throw Error(ErrorKind::InvalidSpec, "norm exponent must be >= 1");
}

}  // namespace

NormedSpace::NormedSpace(NormSpec spec, double radius_cap) : spec_(std::move(spec)), cap_(radius_cap) {
  const int n = spec_.dim;
  if (n < 1) throw Error(ErrorKind::InvalidSpec, "dimension must be >= 1");
  if (auto* k = std::get_if<PNorm>(&spec_.kind)) {
    check_exponent(k->p);
    unit_volume_ = lp_unit_volume(n, k->p);
    box_.assign(n, 1.0);
  } else if (auto* w = std::get_if<WeightedPNorm>(&spec_.kind)) {
    check_exponent(w->p);
    if (std::isinf(w->p))
      throw Error(ErrorKind::InvalidSpec, "weighted norms need a finite exponent");
    if (static_cast<int>(w->weights.size()) != n)
      throw Error(ErrorKind::InvalidSpec, "weight count does not match dimension");
    double prod = 1.0;
    for (double wi : w->weights) {
      if (!(wi > 0.0) || !std::isfinite(wi))
        throw Error(ErrorKind::InvalidSpec, "weights must be positive");
      prod *= std::pow(wi, 1.0 / w->p);
      box_.push_back(std::pow(wi, -1.0 / w->p));
    }
    unit_volume_ = lp_unit_volume(n, w->p) / prod;
  } else {
    auto& verts = std::get<PolygonNorm>(spec_.kind).vertices;
    if (n != 2) throw Error(ErrorKind::InvalidSpec, "polygon norms are 2-dimensional");
    const std::size_t m = verts.size();
    if (m < 4 || m % 2 != 0)
      throw Error(ErrorKind::InvalidSpec, "polygon needs an even number (>= 4) of vertices");
    for (const auto& v : verts)
      if (!std::isfinite(v[0]) || !std::isfinite(v[1]))
        throw Error(ErrorKind::InvalidSpec, "non-finite polygon vertex");
    double scale = 0.0;
    for (const auto& v : verts) scale = std::max({scale, std::abs(v[0]), std::abs(v[1])});
    const double tol = 1e-9 * std::max(scale, 1.0);
    for (const auto& v : verts) {
      const bool has_opposite = std::any_of(verts.begin(), verts.end(), [&](const auto& u) {
        return std::abs(u[0] + v[0]) <= tol && std::abs(u[1] + v[1]) <= tol;
      });
      if (!has_opposite) throw Error(ErrorKind::InvalidSpec, "polygon is not symmetric about 0");
    }
    double area2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& a = verts[i];
      const auto& b = verts[(i + 1) % m];
      area2 += a[0] * b[1] - a[1] * b[0];
    }
    const double orient = area2 > 0 ? 1.0 : -1.0;
    double bx = 0.0, by = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& a = verts[i];
      const auto& b = verts[(i + 1) % m];
      const auto& c = verts[(i + 2) % m];
      const double turn = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
      if (orient * turn <= tol * tol)
        throw Error(ErrorKind::InvalidSpec, "polygon is not strictly convex at a vertex");
      // outward normal of edge a -> b
      std::array<double, 2> nrm{orient * (b[1] - a[1]), -orient * (b[0] - a[0])};
      const double h = nrm[0] * a[0] + nrm[1] * a[1];
      if (!(h > tol * std::hypot(nrm[0], nrm[1])))
        throw Error(ErrorKind::InvalidSpec, "origin is not interior to the polygon");
      normals_.push_back(nrm);
      support_.push_back(h);
      bx = std::max(bx, std::abs(a[0]));
      by = std::max(by, std::abs(a[1]));
    }
    unit_volume_ = 0.5 * std::abs(area2);
    box_ = {bx, by};
  }
}

std::string NormedSpace::describe() const {
  std::ostringstream os;
  os << "normed(dim=" << spec_.dim << ", ";
  if (auto* k = std::get_if<PNorm>(&spec_.kind)) {
    os << "p=" << k->p;
  } else if (auto* w = std::get_if<WeightedPNorm>(&spec_.kind)) {
    os << "p=" << w->p << ", weights=[";
    for (std::size_t i = 0; i < w->weights.size(); ++i) os << (i ? "," : "") << w->weights[i];
    os << "]";
  } else {
    os << "polygon with " << std::get<PolygonNorm>(spec_.kind).vertices.size() << " vertices";
  }
  os << ")";
  return os.str();
}

Point NormedSpace::origin() const { return Point::vec(std::vector<double>(spec_.dim, 0.0)); }

bool NormedSpace::valid_coords(const Point& a) const {
  return static_cast<int>(a.size()) == spec_.dim;
}

double NormedSpace::norm(std::span<const double> v) const {
  if (auto* k = std::get_if<PNorm>(&spec_.kind)) return lp_norm(v, k->p);
  if (auto* w = std::get_if<WeightedPNorm>(&spec_.kind)) {
    std::vector<double> y(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) y[i] = std::pow(w->weights[i], 1.0 / w->p) * v[i];
    return lp_norm(y, w->p);
  }
  // |.| keeps the gauge exactly even when opposite edges differ in the last bit
  double g = 0.0;
  for (std::size_t e = 0; e < normals_.size(); ++e)
    g = std::max(g, std::abs(normals_[e][0] * v[0] + normals_[e][1] * v[1]) / support_[e]);
  return g;
}

double NormedSpace::dual_norm(std::span<const double> a) const {
  if (auto* k = std::get_if<PNorm>(&spec_.kind)) return lp_norm(a, conjugate(k->p));
  if (auto* w = std::get_if<WeightedPNorm>(&spec_.kind)) {
    std::vector<double> y(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = std::pow(w->weights[i], -1.0 / w->p) * a[i];
    return lp_norm(y, conjugate(w->p));
  }
  double s = 0.0;
  for (const auto& v : std::get<PolygonNorm>(spec_.kind).vertices)
    s = std::max(s, a[0] * v[0] + a[1] * v[1]);
  return s;
}

bool NormedSpace::strictly_convex() const {
  if (spec_.dim == 1) return true;
  if (auto* k = std::get_if<PNorm>(&spec_.kind)) return k->p > 1.0 && std::isfinite(k->p);
  if (auto* w = std::get_if<WeightedPNorm>(&spec_.kind)) return w->p > 1.0;
  return false;
}

std::optional<double> NormedSpace::radial_jacobian(double, double t) const {
  return std::pow(t, spec_.dim);
}

double NormedSpace::distance_impl(const Point& a, const Point& b) const {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  return norm(d);
}

std::optional<Point> NormedSpace::extend_impl(const Point& p, const Point& x, double s) const {
  std::vector<double> c(p.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = p[i] + s * (x[i] - p[i]);
  return Point::vec(std::move(c));
}

std::optional<Point> NormedSpace::chart_impl(const Point& p, double theta, double s) const {
  std::vector<double> c = p.coords;
  if (spec_.dim == 1) {
    c[0] += std::cos(theta) >= 0.0 ? s : -s;
  } else {
    c[0] += s * std::cos(theta);
    c[1] += s * std::sin(theta);
  }
  return Point::vec(std::move(c));
}

MassEstimate NormedSpace::ball_mass_impl(const Point&, double r, std::size_t,
                                         RandomStream&) const {
  return MassEstimate::exact(unit_volume_ * std::pow(r, spec_.dim));
}

std::vector<Point> NormedSpace::sample_ball_impl(const Point& p, double r, std::size_t count,
                                                 RandomStream& rng) const {
  std::vector<Point> out;
  out.reserve(count);
  std::vector<double> v(spec_.dim);
  while (out.size() < count) {
    for (int i = 0; i < spec_.dim; ++i) v[i] = rng.uniform(-box_[i], box_[i]);
    if (norm(v) > 1.0) continue;
    std::vector<double> c(spec_.dim);
    for (int i = 0; i < spec_.dim; ++i) c[i] = p[i] + r * v[i];
    out.push_back(Point::vec(std::move(c)));
  }
  return out;
}

SpacePtr make_normed(const NormSpec& spec) { return std::make_shared<NormedSpace>(spec); }

SpacePtr make_lp(int dim, double p) { return make_normed(NormSpec{dim, PNorm{p}}); }

}  // namespace mmlab
