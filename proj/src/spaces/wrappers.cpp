#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mmlab/spaces.hpp"

namespace mmlab {

// ---------------------------------------------------------------------------
// ConvexSubset
// ---------------------------------------------------------------------------

namespace {

const NormedSpace& as_normed(const Space& s) {
  auto* n = dynamic_cast<const NormedSpace*>(&s);
  if (!n) throw Error(ErrorKind::InvalidSpec, "half-spaces need a normed base space");
  return *n;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

ConvexSubset::ConvexSubset(SpacePtr base, ConvexRegion region)
    : base_(std::move(base)), region_(std::move(region)) {
  if (!base_) throw Error(ErrorKind::InvalidSpec, "null base space");
  if (auto* b = std::get_if<BallRegion>(&region_)) {
    base_->check(b->center);
    if (!(b->radius > 0.0) || !std::isfinite(b->radius))
      throw Error(ErrorKind::InvalidSpec, "ball region needs a positive radius");
    if (b->radius > base_->radius_cap())
      throw Error(ErrorKind::InvalidSpec, "ball region radius beyond the domain cap");
  } else if (auto* h = std::get_if<HalfSpaceRegion>(&region_)) {
    const auto& n = as_normed(*base_);
    if (static_cast<int>(h->normal.size()) != n.dimension())
      throw Error(ErrorKind::InvalidSpec, "half-space normal has the wrong dimension");
    if (!(dot(h->normal, h->normal) > 0.0))
      throw Error(ErrorKind::InvalidSpec, "half-space normal must be non-zero");
    if (!std::isfinite(h->offset)) throw Error(ErrorKind::InvalidSpec, "non-finite offset");
  } else {
    throw Error(ErrorKind::InvalidSpec, "annulus regions are not convex");
  }
}

std::string ConvexSubset::describe() const {
  std::ostringstream os;
  os << "subset(" << base_->describe() << ", ";
  if (auto* b = std::get_if<BallRegion>(&region_)) {
    os << "ball R=" << b->radius;
  } else {
    const auto& h = std::get<HalfSpaceRegion>(region_);
    os << "halfspace <n,x> >= " << h.offset << ", n=[";
    for (std::size_t i = 0; i < h.normal.size(); ++i) os << (i ? "," : "") << h.normal[i];
    os << "]";
  }
  os << ")";
  return os.str();
}

Point ConvexSubset::origin() const {
  if (auto* b = std::get_if<BallRegion>(&region_)) return b->center;
  const auto& h = std::get<HalfSpaceRegion>(region_);
  const double nn = dot(h.normal, h.normal);
  std::vector<double> c(h.normal.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = h.offset * h.normal[i] / nn;
  return Point::vec(std::move(c));
}

bool ConvexSubset::contains(const Point& x) const {
  if (auto* b = std::get_if<BallRegion>(&region_))
    return base_->distance(b->center, x) <= b->radius * (1.0 + 1e-12) + 1e-15;
  const auto& h = std::get<HalfSpaceRegion>(region_);
  const double scale = std::sqrt(dot(h.normal, h.normal));
  return dot(h.normal, x.coords) >= h.offset - 1e-12 * scale * (1.0 + std::abs(h.offset));
}

bool ConvexSubset::valid_coords(const Point& a) const {
  base_->check(a);
  return contains(a);
}

double ConvexSubset::boundary_distance(const Point& x) const {
  if (auto* b = std::get_if<BallRegion>(&region_))
    return std::max(0.0, b->radius - base_->distance(b->center, x));
  const auto& h = std::get<HalfSpaceRegion>(region_);
  const double gap = dot(h.normal, x.coords) - h.offset;
  return std::max(0.0, gap / as_normed(*base_).dual_norm(h.normal));
}

double ConvexSubset::distance_impl(const Point& a, const Point& b) const {
  return base_->distance(a, b);
}

std::optional<Point> ConvexSubset::extend_impl(const Point& p, const Point& x, double s) const {
  if (s <= 1.0) return base_->intermediate(p, x, s);
  auto y = base_->extend(p, x, s);
  if (!y || !contains(*y)) return std::nullopt;
  return y;
}

std::optional<Point> ConvexSubset::chart_impl(const Point& p, double theta, double s) const {
  auto y = base_->chart_point(p, theta, s);
  if (!y || !contains(*y)) return std::nullopt;
  return y;
}

MassEstimate ConvexSubset::ball_mass_impl(const Point& p, double r, std::size_t budget,
                                          RandomStream& rng) const {
  const auto full = base_->ball_mass(p, r, budget, rng);
  if (boundary_distance(p) >= r) return full;
  if (budget == 0) throw Error(ErrorKind::InvalidParams, "Monte Carlo budget must be positive");
  const auto pts = base_->sample_ball(p, r, budget, rng);
  std::size_t hits = 0;
  for (const auto& q : pts) hits += contains(q) ? 1 : 0;
  const double n = static_cast<double>(budget);
  const double f = hits / n;
  const double se_f = std::sqrt(std::max(f * (1.0 - f), 0.25 / n) / n);
  const double value = f * full.value;
  const double se = std::hypot(full.value * se_f, f * full.std_error);
  return {value, se, MassMethod::MonteCarlo, budget};
}

std::vector<Point> ConvexSubset::sample_ball_impl(const Point& p, double r, std::size_t count,
                                                  RandomStream& rng) const {
  std::vector<Point> out;
  out.reserve(count);
  std::size_t drawn = 0;
  const std::size_t limit = 1000 * count + 10000;
  while (out.size() < count) {
    const std::size_t want = std::max<std::size_t>(count - out.size(), 64);
    for (auto& q : base_->sample_ball(p, r, want, rng)) {
      if (contains(q) && out.size() < count) out.push_back(std::move(q));
    }
    drawn += want;
    if (out.empty() && drawn > limit)
      throw Error(ErrorKind::EmptyRegion, "ball does not meet the convex subset");
  }
  return out;
}

SpacePtr make_convex_subset(SpacePtr base, ConvexRegion region) {
  return std::make_shared<ConvexSubset>(std::move(base), std::move(region));
}

// ---------------------------------------------------------------------------
// WeightedSpace
// ---------------------------------------------------------------------------

WeightedSpace::WeightedSpace(SpacePtr base, WeightSpec w) : base_(std::move(base)), w_(w) {
  if (!base_ || base_->family() != Family::Hyperbolic ||
      !dynamic_cast<const HyperbolicPlane*>(base_.get()))
    throw Error(ErrorKind::InvalidSpec, "weighted measures are supported on the hyperbolic plane");
  if (!(w_.coefficient >= 0.0) || !std::isfinite(w_.coefficient))
    throw Error(ErrorKind::InvalidSpec, "potential coefficient must be finite and >= 0");
}

std::string WeightedSpace::describe() const {
  std::ostringstream os;
  os << "weighted(" << base_->describe() << ", V=" << w_.coefficient << "*r^2)";
  return os.str();
}

double WeightedSpace::potential(const Point& x) const {
  base_->check(x);
  return w_.coefficient * x[0] * x[0];
}

double WeightedSpace::density(const Point& x) const { return std::exp(-potential(x)); }

double WeightedSpace::distance_impl(const Point& a, const Point& b) const {
  return base_->distance(a, b);
}

std::optional<Point> WeightedSpace::extend_impl(const Point& p, const Point& x, double s) const {
  return base_->extend(p, x, s);
}

std::optional<Point> WeightedSpace::chart_impl(const Point& p, double theta, double s) const {
  return base_->chart_point(p, theta, s);
}

MassEstimate WeightedSpace::ball_mass_impl(const Point& p, double r, std::size_t budget,
                                           RandomStream& rng) const {
  if (p[0] == 0.0) {
    const double c = w_.coefficient;
    auto f = [c](double s) { return std::exp(-c * s * s) * std::sinh(s); };
    const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, r, 15,
                                                                                   1e-14);
    return MassEstimate::exact(2.0 * kPi * I);
  }
  if (budget < 2) throw Error(ErrorKind::InvalidParams, "Monte Carlo budget must be >= 2");
  const double area = base_->ball_mass(p, r, budget, rng).value;
  double sum = 0.0, sum2 = 0.0;
  for (const auto& q : base_->sample_ball(p, r, budget, rng)) {
    const double d = density(q);
    sum += d;
    sum2 += d * d;
  }
  const double n = static_cast<double>(budget);
  const double mean = sum / n;
  const double var = std::max(0.0, sum2 / n - mean * mean) * n / (n - 1.0);
  return {area * mean, area * std::sqrt(var / n), MassMethod::MonteCarlo, budget};
}

std::vector<Point> WeightedSpace::sample_ball_impl(const Point& p, double r, std::size_t count,
                                                   RandomStream& rng) const {
  const double closest = std::max(0.0, p[0] - r);
  const double dmax = std::exp(-w_.coefficient * closest * closest);
  std::vector<Point> out;
  out.reserve(count);
  while (out.size() < count) {
    auto batch = base_->sample_ball(p, r, std::max<std::size_t>(count - out.size(), 64), rng);
    for (auto& q : batch) {
      if (out.size() < count && rng.uniform() * dmax <= density(q)) out.push_back(std::move(q));
    }
  }
  return out;
}

SpacePtr make_weighted(SpacePtr base, WeightSpec w) {
  return std::make_shared<WeightedSpace>(std::move(base), w);
}

// ---------------------------------------------------------------------------
// RescaledSpace
// ---------------------------------------------------------------------------

RescaledSpace::RescaledSpace(SpacePtr base, double lambda, Point center)
    : base_(std::move(base)), lambda_(lambda), center_(std::move(center)) {
  if (!base_) throw Error(ErrorKind::InvalidSpec, "null base space");
  if (!(lambda_ > 0.0) || !std::isfinite(lambda_))
    throw Error(ErrorKind::InvalidParams, "rescaling factor must be positive");
  base_->check(center_);
}

std::string RescaledSpace::describe() const {
  std::ostringstream os;
  os << "rescale(" << base_->describe() << ", lambda=" << lambda_ << ")";
  return os.str();
}

double RescaledSpace::distance_impl(const Point& a, const Point& b) const {
  return lambda_ * base_->distance(a, b);
}

std::optional<Point> RescaledSpace::extend_impl(const Point& p, const Point& x, double s) const {
  if (s <= 1.0) return base_->intermediate(p, x, s);
  return base_->extend(p, x, s);
}

std::optional<Point> RescaledSpace::chart_impl(const Point& p, double theta, double s) const {
  return base_->chart_point(p, theta, s / lambda_);
}

MassEstimate RescaledSpace::ball_mass_impl(const Point& p, double r, std::size_t budget,
                                           RandomStream& rng) const {
  auto m = base_->ball_mass(p, r / lambda_, budget, rng);
  const double f = std::pow(lambda_, base_->dimension());
  m.value *= f;
  m.std_error *= f;
  return m;
}

std::vector<Point> RescaledSpace::sample_ball_impl(const Point& p, double r, std::size_t count,
                                                   RandomStream& rng) const {
  return base_->sample_ball(p, r / lambda_, count, rng);
}

SpacePtr rescale(SpacePtr base, double lambda, Point center) {
  return std::make_shared<RescaledSpace>(std::move(base), lambda, std::move(center));
}

}  // namespace mmlab
