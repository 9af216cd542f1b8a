#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmlab/spaces.hpp"

namespace mmlab {

GluedIntervalSpec GluedIntervalSpec::power_law(int depth) {
  if (depth < 1) throw Error(ErrorKind::InvalidSpec, "truncation depth must be >= 1");
  GluedIntervalSpec s;
  for (int i = 1; i <= depth; ++i) {
    s.eps.push_back(std::pow(10.0, -double(i * i)));
    s.delta.push_back(std::pow(10.0, -double(i * i + i)));
  }
  return s;
}

void GluedIntervalSpec::validate() const {
  if (eps.empty() || eps.size() != delta.size())
    throw Error(ErrorKind::InvalidSpec, "eps and delta must be non-empty and of equal length");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || !(delta[i] > 0.0) || !std::isfinite(eps[i]))
      throw Error(ErrorKind::InvalidSpec, "scale sequences must be positive");
    if (!(delta[i] < eps[i]))
      throw Error(ErrorKind::InvalidSpec, "need delta_i < eps_i");
    if (i + 1 < eps.size()) {
      if (!(eps[i + 1] < delta[i]))
        throw Error(ErrorKind::InvalidSpec, "need eps_{i+1} < delta_i");
      if (!(delta[i + 1] / eps[i + 1] < delta[i] / eps[i]))
        throw Error(ErrorKind::InvalidSpec, "delta_i / eps_i must decrease");
      if (i + 2 < eps.size() && !(eps[i + 2] / delta[i + 1] < eps[i + 1] / delta[i]))
        throw Error(ErrorKind::InvalidSpec, "eps_{i+1} / delta_i must decrease");
    }
  }
}

GluedIntervalTree::GluedIntervalTree(GluedIntervalSpec spec, double radius_cap)
    : spec_(std::move(spec)), cap_(radius_cap) {
  spec_.validate();
  for (std::size_t i = 0; i < spec_.eps.size(); ++i) {
    const auto idx = std::to_string(i + 1);
    legs_.push_back({spec_.delta[i], spec_.delta[i], "delta" + idx + "+"});
    legs_.push_back({spec_.delta[i], spec_.delta[i], "delta" + idx + "-"});
    legs_.push_back({spec_.eps[i], spec_.eps[i], "eps" + idx});
  }
}

std::string GluedIntervalTree::describe() const {
  std::ostringstream os;
  os << "glued_intervals(depth=" << spec_.eps.size() << ", eps=[";
  for (std::size_t i = 0; i < spec_.eps.size(); ++i) os << (i ? "," : "") << spec_.eps[i];
  os << "], delta=[";
  for (std::size_t i = 0; i < spec_.delta.size(); ++i) os << (i ? "," : "") << spec_.delta[i];
  os << "])";
  return os.str();
}

int GluedIntervalTree::delta_leg(int i, int side) const {
  if (i < 1 || i > static_cast<int>(spec_.delta.size()))
    throw Error(ErrorKind::InvalidParams, "delta leg index out of range");
  return 3 * (i - 1) + (side >= 0 ? 1 : 2);
}

int GluedIntervalTree::eps_leg(int i) const {
  if (i < 1 || i > static_cast<int>(spec_.eps.size()))
    throw Error(ErrorKind::InvalidParams, "eps leg index out of range");
  return 3 * (i - 1) + 3;
}

Point GluedIntervalTree::canonical(int branch, double offset) const {
  if (branch == 0) return Point::tree(0, offset);
  if (offset <= 0.0) return Point::tree(0, legs_[branch - 1].attach);
  return Point::tree(branch, offset);
}

Point GluedIntervalTree::leg_point(int branch, double offset) const {
  if (branch < 0 || branch > static_cast<int>(legs_.size()))
    throw Error(ErrorKind::InvalidParams, "unknown branch");
  return canonical(branch, offset);
}

double GluedIntervalTree::anchor(const Point& x) const {
  return x.branch == 0 ? x[0] : legs_[x.branch - 1].attach;
}

bool GluedIntervalTree::valid_coords(const Point& a) const {
  if (a.size() != 1) return false;
  if (a.branch == 0) return true;
  if (a.branch < 0 || a.branch > static_cast<int>(legs_.size())) return false;
  const double len = legs_[a.branch - 1].length;
  return a[0] >= 0.0 && a[0] <= len * (1.0 + 1e-12);
}

std::optional<double> GluedIntervalTree::radial_jacobian(double, double t) const { return t; }

double GluedIntervalTree::distance_impl(const Point& a, const Point& b) const {
  if (a.branch != 0 && a.branch == b.branch) return std::abs(a[0] - b[0]);
  const double ua = a.branch == 0 ? 0.0 : a[0];
  const double ub = b.branch == 0 ? 0.0 : b[0];
  return ua + std::abs(anchor(a) - anchor(b)) + ub;
}

std::optional<Point> GluedIntervalTree::extend_impl(const Point& p, const Point& x,
                                                    double s) const {
  const double d = distance_impl(p, x);
  if (d == 0.0) return x;
  double L = s * d;

  if (p.branch != 0 && p.branch == x.branch) {
    const double len = legs_[p.branch - 1].length;
    const double off = p[0] + s * (x[0] - p[0]);
    if (off > len * (1.0 + 1e-12)) return std::nullopt;
    // moving inward past the attachment continues along the base in + direction
    if (off < 0.0) return Point::tree(0, legs_[p.branch - 1].attach - off);
    return canonical(p.branch, std::min(off, len));
  }

  const double up = p.branch == 0 ? 0.0 : p[0];
  const double ap = anchor(p), ax = anchor(x);
  if (L <= up) return canonical(p.branch, up - L);
  L -= up;
  const double base_len = std::abs(ax - ap);
  const double dir = ax > ap ? 1.0 : (ax < ap ? -1.0 : 1.0);
  if (x.branch == 0) return Point::tree(0, ap + dir * L);
  if (L <= base_len) return Point::tree(0, ap + dir * L);
  L -= base_len;
  const double len = legs_[x.branch - 1].length;
  if (L > len * (1.0 + 1e-12)) return std::nullopt;
  return canonical(x.branch, std::min(L, len));
}

std::optional<Point> GluedIntervalTree::chart_impl(const Point& p, double theta, double s) const {
  const double sgn = std::cos(theta) >= 0.0 ? 1.0 : -1.0;
  if (p.branch == 0) return Point::tree(0, p[0] + sgn * s);
  const auto& leg = legs_[p.branch - 1];
  const double off = p[0] + sgn * s;
  if (off > leg.length * (1.0 + 1e-12)) return std::nullopt;
  if (off < 0.0) return Point::tree(0, leg.attach - off);
  return canonical(p.branch, std::min(off, leg.length));
}

std::vector<GluedIntervalTree::Segment> GluedIntervalTree::ball_segments(const Point& p,
                                                                         double r) const {
  std::vector<Segment> segs;
  const double up = p.branch == 0 ? 0.0 : p[0];
  const double ap = anchor(p);
  if (r > up) segs.push_back({0, ap - (r - up), ap + (r - up)});
  for (int k = 1; k <= static_cast<int>(legs_.size()); ++k) {
    const auto& leg = legs_[k - 1];
    if (k == p.branch) {
      const double lo = std::max(0.0, up - r), hi = std::min(leg.length, up + r);
      if (hi > lo) segs.push_back({k, lo, hi});
      continue;
    }
    const double rho = r - up - std::abs(leg.attach - ap);
    if (rho > 0.0) segs.push_back({k, 0.0, std::min(leg.length, rho)});
  }
  return segs;
}

std::vector<Point> GluedIntervalTree::sphere(const Point& p, double r) const {
  check(p);
  std::vector<Point> out;
  const double up = p.branch == 0 ? 0.0 : p[0];
  const double ap = anchor(p);
  if (r > up) {
    out.push_back(Point::tree(0, ap - (r - up)));
    out.push_back(Point::tree(0, ap + (r - up)));
  }
  for (int k = 1; k <= static_cast<int>(legs_.size()); ++k) {
    const auto& leg = legs_[k - 1];
    if (k == p.branch) {
      if (up + r <= leg.length) out.push_back(Point::tree(k, up + r));
      if (up - r > 0.0) out.push_back(Point::tree(k, up - r));
      continue;
    }
    const double off = r - up - std::abs(leg.attach - ap);
    if (off > 0.0 && off <= leg.length) out.push_back(Point::tree(k, off));
  }
  return out;
}

MassEstimate GluedIntervalTree::ball_mass_impl(const Point& p, double r, std::size_t,
                                               RandomStream&) const {
  double total = 0.0;
  for (const auto& s : ball_segments(p, r)) total += s.hi - s.lo;
  return MassEstimate::exact(total);
}

std::vector<Point> GluedIntervalTree::sample_ball_impl(const Point& p, double r,
                                                       std::size_t count,
                                                       RandomStream& rng) const {
  const auto segs = ball_segments(p, r);
  std::vector<double> cum;
  double total = 0.0;
  for (const auto& s : segs) cum.push_back(total += s.hi - s.lo);
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = rng.uniform() * total;
    const auto j = std::min<std::size_t>(
        std::upper_bound(cum.begin(), cum.end(), u) - cum.begin(), segs.size() - 1);
    const double start = j == 0 ? 0.0 : cum[j - 1];
    const double off = std::min(segs[j].hi, segs[j].lo + (u - start));
    out.push_back(canonical(segs[j].branch, off));
  }
  return out;
}

SpacePtr make_glued_intervals(const GluedIntervalSpec& spec) {
  return std::make_shared<GluedIntervalTree>(spec);
}

}  // namespace mmlab
