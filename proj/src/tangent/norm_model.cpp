#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "mmlab/tangent.hpp"

namespace mmlab {

namespace {

struct Boundary {
  std::vector<Eigen::Vector2d> pts;  // sorted by angle
};

Boundary boundary_of(const NormModel2D& m) {
  Boundary b;
  for (std::size_t i = 0; i < m.theta.size(); ++i)
    b.pts.emplace_back(m.radius[i] * std::cos(m.theta[i]), m.radius[i] * std::sin(m.theta[i]));
  return b;
}

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Fills inner/outer/containment from the boundary polygon.
void measure_containment(NormModel2D& m) {
  const auto b = boundary_of(m);
  const std::size_t n = b.pts.size();
  m.outer = *std::max_element(m.radius.begin(), m.radius.end());
  m.inner = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = b.pts[i];
    const auto& c = b.pts[(i + 1) % n];
    const double len = (c - a).norm();
    // distance from the origin to the supporting line of edge a -> c
    m.inner = std::min(m.inner, len > 0 ? std::abs(cross(a, c)) / len : a.norm());
  }
  m.containment_ratio = m.outer / m.inner;
}

NormModel2D from_points(std::vector<Eigen::Vector2d> pts, const Eigen::Matrix2d& transform) {
  std::vector<std::pair<double, double>> polar;
  for (const auto& p : pts) polar.emplace_back(std::atan2(p.y(), p.x()), p.norm());
  std::sort(polar.begin(), polar.end());
  NormModel2D m;
  for (const auto& [th, r] : polar) {
    m.theta.push_back(th == kPi ? -kPi : th);
    m.radius.push_back(r);
  }
  m.transform = transform;
  measure_containment(m);
  return m;
}

}  // namespace

double NormModel2D::gauge(double x, double y) const {
  const double r = std::hypot(x, y);
  if (r == 0.0) return 0.0;
  const double th = std::atan2(y, x);
  const std::size_t n = theta.size();
  // boundary edge whose angular sector contains th
  auto it = std::upper_bound(theta.begin(), theta.end(), th);
  const std::size_t j = it == theta.end() ? 0 : static_cast<std::size_t>(it - theta.begin());
  const std::size_t i = (j + n - 1) % n;
  const Eigen::Vector2d a(radius[i] * std::cos(theta[i]), radius[i] * std::sin(theta[i]));
  const Eigen::Vector2d c(radius[j] * std::cos(theta[j]), radius[j] * std::sin(theta[j]));
  const Eigen::Vector2d u(x, y);
  // u = s * (a + w (c - a)); solve for s
  const double denom = cross(a, c);
  if (denom == 0.0) return r / a.norm();
  return cross(u, c - a) / cross(a, c - a);
}

double NormModel2D::max_asymmetry() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double x = radius[i] * std::cos(theta[i]), y = radius[i] * std::sin(theta[i]);
    worst = std::max(worst, std::abs(gauge(-x, -y) - 1.0));
  }
  return worst;
}

double NormModel2D::min_turn() const {
  const auto b = boundary_of(*this);
  const std::size_t n = b.pts.size();
  double worst = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d e1 = b.pts[(i + 1) % n] - b.pts[i];
    const Eigen::Vector2d e2 = b.pts[(i + 2) % n] - b.pts[(i + 1) % n];
    const double l = e1.norm() * e2.norm();
    if (l > 0) worst = std::min(worst, cross(e1, e2) / l);
  }
  return worst;
}

void NormModel2D::validate(double tol) const {
  if (theta.size() < 4 || theta.size() != radius.size())
    throw Error(ErrorKind::InvalidParams, "norm model needs at least 4 boundary samples");
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!(radius[i] > 0.0) || !std::isfinite(radius[i]))
      throw Error(ErrorKind::InvalidParams, "boundary radii must be positive");
    if (i > 0 && !(theta[i] > theta[i - 1]))
      throw Error(ErrorKind::InvalidParams, "boundary angles must increase");
  }
  if (max_asymmetry() > tol) throw Error(ErrorKind::NotRegular, "unit ball is not symmetric");
  if (min_turn() < -tol) throw Error(ErrorKind::NotRegular, "unit ball is not convex");
}

std::string NormModel2D::to_csv() const {
  std::string s = "theta,radius\n";
  char buf[80];
  for (std::size_t i = 0; i < theta.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", theta[i], radius[i]);
    s += buf;
  }
  return s;
}

NormModel2D NormModel2D::from_gauge(const std::function<double(double, double)>& g,
                                    std::size_t m) {
  if (m < 4) throw Error(ErrorKind::InvalidParams, "need at least 4 directions");
  std::vector<Eigen::Vector2d> pts;
  for (std::size_t k = 0; k < m; ++k) {
    const double th = -kPi + 2.0 * kPi * k / m;
    const double r = 1.0 / g(std::cos(th), std::sin(th));
    pts.emplace_back(r * std::cos(th), r * std::sin(th));
  }
  return from_points(std::move(pts), Eigen::Matrix2d::Identity());
}

NormModel2D john_normalize(const NormModel2D& model) {
  model.validate(1e-6);
  const auto b = boundary_of(model);
  const std::size_t n = b.pts.size();
  const double scale = *std::max_element(model.radius.begin(), model.radius.end());

  // Khachiyan iteration for the minimum-area centred ellipse containing the
  // symmetric point set; weights live on the samples, antipodes are implied.
  std::vector<double> u(n, 1.0 / n);
  Eigen::Matrix2d Q;
  for (int it = 0; it < 200000; ++it) {
    Q.setZero();
    for (std::size_t i = 0; i < n; ++i) Q += u[i] * (b.pts[i] / scale) * (b.pts[i] / scale).transpose();
    if (std::abs(Q.determinant()) < 1e-14)
      throw Error(ErrorKind::DegenerateBall, "unit ball is flat");
    const Eigen::Matrix2d Qi = Q.inverse();
    std::size_t j = 0;
    double kmax = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector2d q = b.pts[i] / scale;
      const double k = q.dot(Qi * q);
      if (k > kmax) kmax = k, j = i;
    }
    if (kmax <= 2.0 * (1.0 + 1e-13)) break;
    const double step = (kmax - 2.0) / (2.0 * (kmax - 1.0));
    for (auto& w : u) w *= 1.0 - step;
    u[j] += step;
  }
  // ellipse {x : x^T (Q^-1 / 2) x <= 1} in units of `scale`
  const Eigen::Matrix2d M = Q.inverse() / (2.0 * scale * scale);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(M);
  const Eigen::Vector2d ev = es.eigenvalues();
  if (!(ev.minCoeff() > 0.0) || ev.maxCoeff() / ev.minCoeff() > 1e12)
    throw Error(ErrorKind::DegenerateBall, "enclosing ellipse is degenerate");
  const Eigen::Matrix2d A =
      es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();

  std::vector<Eigen::Vector2d> pts;
  for (const auto& p : b.pts) pts.push_back(A * p);
  auto out = from_points(std::move(pts), A * model.transform);
  return out;
}

}  // namespace mmlab
