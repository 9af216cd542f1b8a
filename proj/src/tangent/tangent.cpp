#include <algorithm>
#include <cmath>
#include <limits>

#include "mmlab/tangent.hpp"

namespace mmlab {

namespace {

constexpr double kResolutionFloor = 1e-9;
constexpr double kMonotoneTol = 1e-9;

void check_t_sequence(const std::vector<double>& ts) {
  if (ts.empty()) throw Error(ErrorKind::InvalidParams, "empty t sequence");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(ts[i] > 0.0) || ts[i] > 1.0)
      throw Error(ErrorKind::InvalidParams, "t values must lie in (0, 1]");
    if (i > 0 && !(ts[i] < ts[i - 1]))
      throw Error(ErrorKind::InvalidParams, "t sequence must decrease strictly");
  }
  if (ts.back() < kResolutionFloor)
    throw Error(ErrorKind::ResolutionFloor, "t sequence goes below the resolution floor");
}

/// Chart point at exact distance `target` from p along direction theta.
std::optional<Point> point_at_distance(const Space& space, const Point& p, double theta,
                                       double target) {
  double s = target;
  for (int it = 0; it < 60; ++it) {
    auto x = space.chart_point(p, theta, s);
    if (!x) return std::nullopt;
    const double d = space.distance(p, *x);
    if (d == 0.0) return std::nullopt;
    if (std::abs(d - target) <= 1e-13 * target) return x;
    s *= target / d;
  }
  return space.chart_point(p, theta, s);
}

}  // namespace

std::vector<double> default_t_sequence() {
  std::vector<double> ts;
  for (int k = 0; k <= 12; ++k) ts.push_back(std::ldexp(1.0, -k));
  return ts;
}

FiniteMetric log_map(const Space& space, const Point& p, const std::vector<Point>& pts,
                     const std::vector<double>& t_sequence) {
  check_t_sequence(t_sequence);
  space.check(p);
  for (const auto& x : pts) space.check(x);
  const std::size_t n = pts.size() + 1;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < pts.size(); ++i) d(0, i + 1) = d(i + 1, 0) = space.distance(p, pts[i]);

  // contracted images per t, shared by all pairs
  std::vector<std::vector<Point>> images(t_sequence.size());
  for (std::size_t k = 0; k < t_sequence.size(); ++k)
    for (const auto& x : pts) images[k].push_back(space.intermediate(p, x, t_sequence[k]));

  // rounding noise of one distance evaluation at coordinates of this size
  const double noise = 16.0 * std::numeric_limits<double>::epsilon() * space.coordinate_scale(p);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double floor = kMonotoneTol * (d(0, i + 1) + d(0, j + 1));
      double prev = kInf;
      for (std::size_t k = 0; k < t_sequence.size(); ++k) {
        const double ratio = space.distance(images[k][i], images[k][j]) / t_sequence[k];
        if (ratio > prev + kMonotoneTol * prev + floor + noise / t_sequence[k])
          throw Error(ErrorKind::MonotonicityViolation,
                      "d(x_t, y_t)/t increases as t decreases");
        prev = ratio;
      }
      d(i + 1, j + 1) = d(j + 1, i + 1) = prev;
    }
  std::vector<std::string> labels{"o"};
  for (std::size_t i = 0; i < pts.size(); ++i) labels.push_back("x" + std::to_string(i + 1));
  return FiniteMetric(std::move(labels), std::move(d), 0);
}

std::vector<Point> tangent_net_points(const Space& space, const Point& p, double lambda, double R,
                                      std::size_t k, const RandomStream& rng, std::size_t pool) {
  if (!(lambda > 0.0) || !(R > 0.0) || k == 0 || pool == 0)
    throw Error(ErrorKind::InvalidParams, "tangent_net needs lambda, R > 0 and k, pool >= 1");
  const double r = R / lambda;
  if (r > space.radius_cap()) throw Error(ErrorKind::DomainExceeded, "R / lambda exceeds the domain");
  RandomStream local = rng;
  const auto cand = space.sample_ball(p, r, pool, local);

  std::vector<Point> net{p};
  std::vector<double> gap(cand.size());
  for (std::size_t i = 0; i < cand.size(); ++i) gap[i] = space.distance(p, cand[i]);
  while (net.size() < k) {
    const auto it = std::max_element(gap.begin(), gap.end());
    if (it == gap.end() || !(*it > 0.0))
      throw Error(ErrorKind::DegenerateNet, "ball has fewer than k distinct points");
    const Point next = cand[static_cast<std::size_t>(it - gap.begin())];
    net.push_back(next);
    for (std::size_t i = 0; i < cand.size(); ++i)
      gap[i] = std::min(gap[i], space.distance(next, cand[i]));
  }
  return net;
}

FiniteMetric tangent_net(const Space& space, const Point& p, double lambda, double R,
                         std::size_t k, const RandomStream& rng, std::size_t pool) {
  return FiniteMetric::of_points(space, tangent_net_points(space, p, lambda, R, k, rng, pool), 0)
      .scaled(lambda);
}

TangentProbe tangent_uniqueness_probe(const Space& space, const Point& p,
                                      const std::vector<double>& scales, double R, std::size_t k,
                                      std::size_t cap, const RandomStream& rng, double threshold) {
  if (scales.size() < 2) throw Error(ErrorKind::InvalidParams, "need at least two scales");
  const auto [mn, mx] = std::minmax_element(scales.begin(), scales.end());
  if (!(*mn > 0.0) || *mx / *mn < 100.0 * (1.0 - 1e-9))
    throw Error(ErrorKind::InvalidParams, "scales must span at least two decades");

  std::vector<FiniteMetric> nets;
  for (double s : scales) nets.push_back(tangent_net(space, p, s, R, k, rng));

  TangentProbe out;
  out.scales = scales;
  out.bounds.assign(scales.size(), std::vector<GHBound>(scales.size()));
  out.max_lower = -1.0;
  for (std::size_t i = 0; i < scales.size(); ++i)
    for (std::size_t j = i + 1; j < scales.size(); ++j) {
      const auto b = gh_bounds(nets[i], nets[j], cap);
      out.bounds[i][j] = out.bounds[j][i] = b;
      out.max_upper = std::max(out.max_upper, b.upper);
      if (b.lower > out.max_lower) {
        out.max_lower = b.lower;
        out.witness = {i, j};
      }
      out.exact = out.exact && b.method == GHMethod::Exact;
    }
  out.agree = out.max_upper <= threshold;
  return out;
}

NormModel2D norm_recover(const Space& space, const Point& p, std::size_t resolution,
                         const std::vector<double>& t_sequence, double tol) {
  if (space.dimension() > 2) throw Error(ErrorKind::Unsupported, "norm recovery is planar only");
  if (resolution < 8) throw Error(ErrorKind::InvalidParams, "angular resolution must be >= 8");
  check_t_sequence(t_sequence);
  space.check(p);

  NormModel2D model;
  for (std::size_t k = 0; k < resolution; ++k) {
    const double th = -kPi + 2.0 * kPi * static_cast<double>(k) / static_cast<double>(resolution);
    const auto x = space.chart_point(p, th, 1.0);
    if (!x) throw Error(ErrorKind::DomainExceeded, "chart direction leaves the space");
    const double d = space.distance(p, *x);
    if (!(d > 0.0)) throw Error(ErrorKind::NotRegular, "chart direction collapses");
    model.theta.push_back(th);
    model.radius.push_back(1.0 / d);
  }
  model.outer = *std::max_element(model.radius.begin(), model.radius.end());
  model.validate(tol);

  // d* between chart points must be the gauge of their chart difference
  constexpr std::size_t kProbe = 16;
  std::vector<Point> pts;
  std::vector<Eigen::Vector2d> vec;
  for (std::size_t a = 0; a < kProbe; ++a) {
    const double th = -kPi + 2.0 * kPi * (a + 0.5) / kProbe;
    const auto x = space.chart_point(p, th, 1.0);
    if (!x) throw Error(ErrorKind::DomainExceeded, "chart direction leaves the space");
    pts.push_back(*x);
    vec.emplace_back(std::cos(th), std::sin(th));
  }
  const auto star = log_map(space, p, pts, t_sequence);
  for (std::size_t a = 0; a < kProbe; ++a)
    for (std::size_t b = a + 1; b < kProbe; ++b) {
      const Eigen::Vector2d v = vec[a] - vec[b];
      const double g = model.gauge(v.x(), v.y());
      const double ds = star(a + 1, b + 1);
      if (std::abs(ds - g) > tol * std::max(g, ds))
        throw Error(ErrorKind::NotRegular, "tangent cone distances are not given by a norm");
    }

  // inner/outer radii of the recovered polygon
  double inner = kInf;
  const std::size_t n = model.theta.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const Eigen::Vector2d a(model.radius[i] * std::cos(model.theta[i]),
                            model.radius[i] * std::sin(model.theta[i]));
    const Eigen::Vector2d c(model.radius[j] * std::cos(model.theta[j]),
                            model.radius[j] * std::sin(model.theta[j]));
    const double len = (c - a).norm();
    inner = std::min(inner, len > 0 ? std::abs(a.x() * c.y() - a.y() * c.x()) / len : a.norm());
  }
  model.inner = inner;
  model.containment_ratio = model.outer / inner;
  return model;
}

AlmostIsometryResult almost_isometry_audit(const FiniteMetric& X, const FiniteMetric& Y,
                                           const std::vector<std::size_t>& f, double eps,
                                           double cover) {
  if (f.size() != X.size()) throw Error(ErrorKind::InvalidParams, "map must cover every X point");
  if (!(eps >= 0.0) || !(cover >= 0.0)) throw Error(ErrorKind::InvalidParams, "eps, cover >= 0");
  for (std::size_t v : f)
    if (v >= Y.size()) throw Error(ErrorKind::InvalidParams, "map target out of range");
  AlmostIsometryResult out;
  for (std::size_t i = 0; i < X.size(); ++i)
    for (std::size_t j = i + 1; j < X.size(); ++j) {
      const double dx = X(i, j), dy = Y(f[i], f[j]);
      double dev;
      if (dx > 0.0)
        dev = std::abs(dy / dx - 1.0);
      else
        dev = dy > 0.0 ? kInf : 0.0;
      if (dev > out.max_deviation) {
        out.max_deviation = dev;
        out.worst_pair = {i, j};
      }
    }
  for (std::size_t y = 0; y < Y.size(); ++y) {
    double best = kInf;
    for (std::size_t v : f) best = std::min(best, Y(y, v));
    out.uncovered = std::max(out.uncovered, best);
  }
  out.pass = out.max_deviation <= eps;
  if (out.uncovered > cover)
    throw Error(ErrorKind::NotSurjective, "target point farther than the covering radius");
  return out;
}

AlmostIsometryResult exp_almost_isometry_at(const Space& space, const Point& p, double eps,
                                            double R, const RandomStream& rng,
                                            const ExpRadiusOptions& opt) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::InvalidParams, "eps must lie in (0, 1)");
  if (!(R > 0.0) || opt.angles < 4 || opt.levels < 1)
    throw Error(ErrorKind::InvalidParams, "bad radius or grid");

  // polar grid of points at exact distances jR/J, deduplicated
  std::vector<Point> images;
  for (std::size_t j = 1; j <= opt.levels; ++j)
    for (std::size_t a = 0; a < opt.angles; ++a) {
      const double th = -kPi + 2.0 * kPi * static_cast<double>(a) / static_cast<double>(opt.angles);
      const auto x = point_at_distance(space, p, th, R * static_cast<double>(j) / opt.levels);
      if (!x) throw Error(ErrorKind::DomainExceeded, "grid point leaves the space");
      bool seen = false;
      for (const auto& y : images) seen = seen || space.distance(y, *x) <= 1e-12 * R;
      if (!seen) images.push_back(*x);
    }

  const auto X = log_map(space, p, images, default_t_sequence());

  // covering radius: largest nearest-neighbour gap of the grid in the tangent metric
  double cover = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    double nn = kInf;
    for (std::size_t j = 0; j < X.size(); ++j)
      if (j != i) nn = std::min(nn, X(i, j));
    cover = std::max(cover, nn);
  }
  cover *= 1.0 + eps;

  RandomStream local = rng;
  std::vector<Point> all{p};
  all.insert(all.end(), images.begin(), images.end());
  const auto targets = space.sample_ball(p, R, opt.targets, local);
  all.insert(all.end(), targets.begin(), targets.end());
  const auto Y = FiniteMetric::of_points(space, all, 0);
  std::vector<std::size_t> f(X.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = i;
  try {
    return almost_isometry_audit(X, Y, f, eps, cover);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotSurjective) throw;
    AlmostIsometryResult out;
    out.pass = false;
    out.max_deviation = kInf;
    for (std::size_t y = 0; y < Y.size(); ++y) {
      double best = kInf;
      for (std::size_t v : f) best = std::min(best, Y(y, v));
      out.uncovered = std::max(out.uncovered, best);
    }
    return out;
  }
}

std::optional<double> exp_almost_isometry_radius(const Space& space, const Point& p, double eps,
                                                 double R_cap, const RandomStream& rng,
                                                 const ExpRadiusOptions& opt) {
  if (!(R_cap > 0.0)) throw Error(ErrorKind::InvalidParams, "R_cap must be positive");
  if (!(opt.floor_fraction > 0.0 && opt.floor_fraction < 1.0) || !(opt.rel_tol > 0.0))
    throw Error(ErrorKind::InvalidParams, "bad floor fraction or tolerance");
  auto passes = [&](double R) { return exp_almost_isometry_at(space, p, eps, R, rng, opt).pass; };
  if (passes(R_cap)) return R_cap;
  double lo = opt.floor_fraction * R_cap, hi = R_cap;
  if (!passes(lo)) return std::nullopt;
  while (hi - lo > opt.rel_tol * lo) {
    const double mid = 0.5 * (lo + hi);
    if (passes(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace mmlab
