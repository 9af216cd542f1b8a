#include "mmlab/mcp.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <set>
#include <sstream>

namespace mmlab {

// ---------------------------------------------------------------------------
// Regions
// ---------------------------------------------------------------------------

RegionSpec RegionSpec::ball(Point c, double R) {
  RegionSpec a;
  a.kind = Kind::Ball;
  a.center = std::move(c);
  a.outer = R;
  return a;
}

RegionSpec RegionSpec::annulus(Point c, double inner, double outer) {
  RegionSpec a;
  a.kind = Kind::Annulus;
  a.center = std::move(c);
  a.inner = inner;
  a.outer = outer;
  return a;
}

RegionSpec RegionSpec::box(std::vector<double> lo, std::vector<double> hi) {
  RegionSpec a;
  a.kind = Kind::Box;
  a.lo = std::move(lo);
  a.hi = std::move(hi);
  return a;
}

RegionSpec RegionSpec::sample_set(std::vector<Point> pts, double mass) {
  RegionSpec a;
  a.kind = Kind::Samples;
  a.samples = std::move(pts);
  a.sample_mass = mass;
  return a;
}

bool RegionSpec::contains(const Space& space, const Point& x) const {
  switch (kind) {
    case Kind::Ball: return space.distance(center, x) <= outer;
    case Kind::Annulus: {
      const double d = space.distance(center, x);
      return d >= inner && d <= outer;
    }
    case Kind::Box:
      for (std::size_t i = 0; i < lo.size(); ++i)
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
      return true;
    case Kind::Samples:
      return std::any_of(samples.begin(), samples.end(), [&](const Point& q) { return q == x; });
  }
  return false;
}

std::string RegionSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Ball: os << "ball(R=" << outer << ")"; break;
    case Kind::Annulus: os << "annulus(" << inner << " <= d <= " << outer << ")"; break;
    case Kind::Box: os << "box(dim=" << lo.size() << ")"; break;
    case Kind::Samples: os << "samples(n=" << samples.size() << ")"; break;
  }
  return os.str();
}

void AlmostMCPParams::validate() const {
  if (!(delta >= 0.0 && delta < 1.0))
    throw Error(ErrorKind::InvalidParams, "almost-MCP delta must lie in [0, 1)");
}

namespace {

struct RegionSample {
  std::vector<Point> pts;
  double mass = 0.0;
  double mass_se = 0.0;
};

RegionSample sample_region(const Space& space, const RegionSpec& A, std::size_t n,
                           RandomStream& rs) {
  RegionSample out;
  switch (A.kind) {
    case RegionSpec::Kind::Ball: {
      if (!(A.outer > 0.0)) throw Error(ErrorKind::EmptyRegion, "ball of non-positive radius");
      const auto m = space.ball_mass(A.center, A.outer, n, rs);
      out.mass = m.value;
      out.mass_se = m.std_error;
      out.pts = space.sample_ball(A.center, A.outer, n, rs);
      break;
    }
    case RegionSpec::Kind::Annulus: {
      if (!(A.outer > A.inner) || A.inner < 0.0)
        throw Error(ErrorKind::EmptyRegion, "annulus needs 0 <= inner < outer");
      const auto mo = space.ball_mass(A.center, A.outer, n, rs);
      double mi = 0.0, si = 0.0;
      if (A.inner > 0.0) {
        const auto m = space.ball_mass(A.center, A.inner, n, rs);
        mi = m.value;
        si = m.std_error;
      }
      out.mass = mo.value - mi;
      out.mass_se = std::hypot(mo.std_error, si);
      std::size_t tries = 0;
      while (out.pts.size() < n) {
        for (auto& q : space.sample_ball(A.center, A.outer, std::max<std::size_t>(n, 64), rs)) {
          if (out.pts.size() < n && space.distance(A.center, q) >= A.inner)
            out.pts.push_back(std::move(q));
        }
        if (++tries > 1000 && out.pts.empty())
          throw Error(ErrorKind::EmptyRegion, "annulus sampler found no points");
      }
      break;
    }
    case RegionSpec::Kind::Box: {
      auto* normed = dynamic_cast<const NormedSpace*>(&space);
      if (!normed) throw Error(ErrorKind::Unsupported, "box regions need a normed space");
      if (A.lo.size() != A.hi.size() || static_cast<int>(A.lo.size()) != normed->dimension())
        throw Error(ErrorKind::InvalidParams, "box corners have the wrong dimension");
      out.mass = 1.0;
      for (std::size_t i = 0; i < A.lo.size(); ++i) out.mass *= A.hi[i] - A.lo[i];
      for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> c(A.lo.size());
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = rs.uniform(A.lo[i], A.hi[i]);
        out.pts.push_back(Point::vec(std::move(c)));
      }
      break;
    }
    case RegionSpec::Kind::Samples:
      out.pts = A.samples;
      out.mass = A.sample_mass;
      break;
  }
  if (!(out.mass > 0.0) || !std::isfinite(out.mass) || out.pts.empty())
    throw Error(ErrorKind::EmptyRegion, "region has no positive finite mass");
  return out;
}

/// sup of d(p, x) over x in A.
double region_reach(const Space& space, const Point& p, const RegionSpec& A,
                    const RegionSample& s) {
  switch (A.kind) {
    case RegionSpec::Kind::Ball:
    case RegionSpec::Kind::Annulus: return space.distance(p, A.center) + A.outer;
    case RegionSpec::Kind::Box: {
      // a norm is convex, so the farthest point of a box is a corner
      const std::size_t n = A.lo.size();
      double best = 0.0;
      for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        std::vector<double> c(n);
        for (std::size_t i = 0; i < n; ++i) c[i] = (mask >> i) & 1 ? A.hi[i] : A.lo[i];
        best = std::max(best, space.distance(p, Point::vec(std::move(c))));
      }
      return best;
    }
    case RegionSpec::Kind::Samples: {
      double best = 0.0;
      for (const auto& q : s.pts) best = std::max(best, space.distance(p, q));
      return best;
    }
  }
  return 0.0;
}

bool has_uniform_density(const Space& space) {
  return dynamic_cast<const WeightedSpace*>(&space) == nullptr;
}

struct MeanSd {
  double mean = 0.0, sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= v.size();
  if (v.size() > 1) {
    double s = 0.0;
    for (double x : v) s += (x - r.mean) * (x - r.mean);
    r.sd = std::sqrt(s / (v.size() - 1));
  }
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Coefficients
// ---------------------------------------------------------------------------

double mcp_coefficient(const ComparisonParams& params, double d, double t) {
  params.validate();
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidParams, "t must lie in [0, 1]");
  if (!(d >= 0.0) || !std::isfinite(d))
    throw Error(ErrorKind::InvalidParams, "distance must be finite and >= 0");
  if (t == 1.0) return 1.0;
  if (params.K == 0.0) return std::pow(t, params.N);
  if (params.N == 1.0) return t;
  const double k = std::sqrt(-params.K / (params.N - 1.0));
  const double a = d * k;
  if (a == 0.0 || t == 0.0) return std::pow(t, params.N);
  double ratio;
  if (a > 20.0) {
    // sinh(ta)/sinh(a) without overflow
    ratio = std::exp(t * a - a) * (-std::expm1(-2.0 * t * a)) / (-std::expm1(-2.0 * a));
  } else {
    ratio = std::sinh(t * a) / std::sinh(a);
  }
  return t * std::pow(ratio, params.N - 1.0);
}

double exact_contraction_jacobian(const Space& space, const Point& p, const Point& x, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidParams, "t must lie in [0, 1]");
  auto j = space.radial_jacobian(space.distance(p, x), t);
  if (!j) throw Error(ErrorKind::Unsupported, "no closed-form Jacobian for " + space.describe());
  return *j;
}

// ---------------------------------------------------------------------------
// MCP audit
// ---------------------------------------------------------------------------

AuditReport mcp_audit(const Space& space, const Point& p, const RegionSpec& A,
                      const ComparisonParams& params, const AlmostMCPParams& almost,
                      const McpOptions& opt, const RandomStream& rng) {
  params.validate();
  almost.validate();
  if (opt.t_grid.empty()) throw Error(ErrorKind::InvalidParams, "empty t grid");
  if (opt.samples < 2) throw Error(ErrorKind::InvalidParams, "need at least 2 samples");
  for (double t : opt.t_grid)
    if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidParams, "t must lie in (0, 1]");

  const bool jac_ok = has_uniform_density(space) && space.radial_jacobian(1.0, 0.5).has_value();
  McpRoute route = opt.route;
  if (route == McpRoute::Auto) route = jac_ok ? McpRoute::Jacobian : McpRoute::Counting;
  if (route == McpRoute::Jacobian && !jac_ok)
    throw Error(ErrorKind::Unsupported, "Jacobian route needs a closed form and uniform density");
  if (route == McpRoute::Counting && A.kind == RegionSpec::Kind::Samples)
    throw Error(ErrorKind::Unsupported, "counting route needs a region with a membership test");

  RandomStream rs = rng.substream(0);
  const auto S = sample_region(space, A, opt.samples, rs);
  const double scale_floor = 1e-300;
  const double factor = 1.0 - almost.delta;

  std::vector<double> dist(S.pts.size());
  for (std::size_t i = 0; i < S.pts.size(); ++i) dist[i] = space.distance(p, S.pts[i]);
  const double reach = route == McpRoute::Counting ? region_reach(space, p, A, S) : 0.0;

  auto rows = run_batches<std::array<double, 4>>(
      opt.t_grid.size(), opt.jobs, [&](std::size_t ti) -> std::array<double, 4> {
        const double t = opt.t_grid[ti];
        std::vector<double> coef(S.pts.size());
        for (std::size_t i = 0; i < coef.size(); ++i)
          coef[i] = factor * mcp_coefficient(params, dist[i], t);
        const auto c = mean_sd(coef);
        const double rhs = S.mass * c.mean;

        if (route == McpRoute::Jacobian) {
          std::vector<double> jac(S.pts.size()), diff(S.pts.size());
          for (std::size_t i = 0; i < jac.size(); ++i) {
            jac[i] = *space.radial_jacobian(dist[i], t);
            diff[i] = jac[i] - coef[i];
          }
          const auto dj = mean_sd(diff);
          const auto jj = mean_sd(jac);
          const double n = static_cast<double>(diff.size());
          const double margin = S.mass * dj.mean;
          const double sigma = std::hypot(S.mass * dj.sd / std::sqrt(n), S.mass_se * dj.mean);
          return {jj.mean, margin, sigma, rhs};
        }

        // counting: y in A_t iff the extension of p -> y by 1/t lands in A
        RandomStream cs = rng.substream(1 + ti);
        const double rb = std::max(t * reach, 1e-12);
        const auto mb = space.ball_mass(p, rb, opt.samples, cs);
        const auto ys = space.sample_ball(p, rb, opt.samples, cs);
        std::size_t hits = 0;
        for (const auto& y : ys) {
          if (t == 1.0) {
            hits += A.contains(space, y) ? 1 : 0;
            continue;
          }
          auto x = space.extend(p, y, 1.0 / t);
          if (x && space.contains(*x) && A.contains(space, *x)) ++hits;
        }
        const double n = static_cast<double>(ys.size());
        const double f = hits / n;
        const double mt = mb.value * f;
        const double se_t = std::hypot(mb.value * std::sqrt(std::max(f * (1 - f), 0.25 / n) / n),
                                       mb.std_error * f);
        const double se_r = std::hypot(S.mass * c.sd / std::sqrt(double(S.pts.size())),
                                       S.mass_se * c.mean);
        return {mt / S.mass, mt - rhs, std::hypot(se_t, se_r), rhs};
      });

  AuditReport rep;
  rep.name = "mcp";
  // floor for rounding noise in the exact-equality cases
  rep.tolerance = 1e-12;
  for (std::size_t ti = 0; ti < rows.size(); ++ti) {
    const auto& [ratio, margin, sigma, rhs] = rows[ti];
    const double v = (-margin - 3.0 * sigma) / std::max(std::abs(rhs), scale_floor);
    rep.observe(v, Witness{{p}, opt.t_grid[ti], margin + rhs, rhs});
    rep.series["t"].push_back(opt.t_grid[ti]);
    rep.series["ratio"].push_back(ratio);
    rep.series["margin"].push_back(margin);
    rep.series["sigma"].push_back(sigma);
    rep.series["rhs"].push_back(rhs);
    ++rep.trials;
  }
  rep.metrics["mass"] = S.mass;
  rep.metrics["mass_std_error"] = S.mass_se;
  rep.metrics["samples"] = static_cast<double>(S.pts.size());
  rep.metrics["counting_route"] = route == McpRoute::Counting ? 1.0 : 0.0;
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// Bishop-Gromov and density profiles
// ---------------------------------------------------------------------------

double comparison_volume(const ComparisonParams& params, double r) {
  params.validate();
  if (!(r >= 0.0)) throw Error(ErrorKind::InvalidParams, "radius must be >= 0");
  if (params.K == 0.0) return std::pow(r, params.N);
  if (params.N == 1.0) return 2.0 * r;
  const double N = params.N;
  const double k = std::sqrt(-params.K / (N - 1.0));
  const double sigma = 2.0 * std::pow(kPi, 0.5 * N) / std::tgamma(0.5 * N);
  auto f = [&](double s) { return std::pow(std::sinh(k * s) / k, N - 1.0); };
  const double I =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, r, 15, 1e-14);
  return sigma * I;
}

BGProfile bishop_gromov_profile(const Space& space, const Point& p,
                                const ComparisonParams& params, std::vector<double> radii,
                                std::size_t budget, const RandomStream& rng) {
  params.validate();
  if (radii.empty()) throw Error(ErrorKind::InvalidParams, "empty radius grid");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw Error(ErrorKind::InvalidParams, "radii must be positive");
    if (i > 0 && !(radii[i] > radii[i - 1]))
      throw Error(ErrorKind::MonotonicityViolation, "radii must increase strictly");
  }
  BGProfile out;
  out.center = p;
  out.params = params;
  out.radii = std::move(radii);
  for (std::size_t i = 0; i < out.radii.size(); ++i) {
    RandomStream rs = rng.substream(i);
    const auto m = space.ball_mass(p, out.radii[i], budget, rs);
    const double v = comparison_volume(params, out.radii[i]);
    out.ratios.push_back(m.value / v);
    out.errors.push_back(m.std_error / v);
  }
  for (std::size_t i = 0; i + 1 < out.ratios.size(); ++i) {
    const double band = 3.0 * std::hypot(out.errors[i], out.errors[i + 1]) +
                        1e-12 * std::max(out.ratios[i], out.ratios[i + 1]);
    const double excess = out.ratios[i + 1] - out.ratios[i] - band;
    out.worst_increase = std::max(out.worst_increase, excess);
    if (excess > 0.0) out.monotone = false;
  }
  return out;
}

const char* to_string(Collapse c) {
  switch (c) {
    case Collapse::NonCollapsed: return "non_collapsed";
    case Collapse::Collapsed: return "collapsed";
    case Collapse::Divergent: return "divergent";
  }
  return "?";
}

DensityProfile density_profile(const Space& space, const Point& p, double n,
                               std::vector<double> radii, std::size_t budget,
                               const RandomStream& rng, double floor) {
  if (!(n > 0.0)) throw Error(ErrorKind::InvalidParams, "exponent must be positive");
  if (radii.empty()) throw Error(ErrorKind::InvalidParams, "empty radius grid");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] >= floor))
      throw Error(ErrorKind::ResolutionFloor, "radius below the resolution floor");
    if (i > 0 && !(radii[i] < radii[i - 1]))
      throw Error(ErrorKind::MonotonicityViolation, "radii must decrease strictly");
  }
  DensityProfile out;
  out.center = p;
  out.exponent = n;
  out.radii = std::move(radii);
  for (std::size_t i = 0; i < out.radii.size(); ++i) {
    RandomStream rs = rng.substream(i);
    const auto m = space.ball_mass(p, out.radii[i], budget, rs);
    const double rn = std::pow(out.radii[i], n);
    out.values.push_back(m.value / rn);
    out.errors.push_back(m.std_error / rn);
  }
  const std::size_t k = std::min<std::size_t>(3, out.values.size());
  const std::size_t first = out.values.size() - k;
  out.liminf = *std::min_element(out.values.begin() + first, out.values.end());
  out.limsup = *std::max_element(out.values.begin() + first, out.values.end());
  if (k >= 2 && out.liminf > 0.0) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = first; i < out.values.size(); ++i) {
      const double x = std::log(out.radii[i]), y = std::log(out.values[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double kk = static_cast<double>(k);
    out.tail_slope = (kk * sxy - sx * sy) / (kk * sxx - sx * sx);
  }
  if (out.limsup <= 0.0 || out.tail_slope > 0.5)
    out.verdict = Collapse::Collapsed;
  else if (out.tail_slope < -0.5)
    out.verdict = Collapse::Divergent;
  else
    out.verdict = Collapse::NonCollapsed;
  return out;
}

// ---------------------------------------------------------------------------
// Hyperbolic ball certificate and dimension threshold
// ---------------------------------------------------------------------------

CertificateResult hyperbolic_ball_mcp_certificate(double R, double N, double t_step,
                                                  double r_step) {
  if (!(R > 0.0)) throw Error(ErrorKind::InvalidParams, "radius must be positive");
  if (!(N >= 2.0)) throw Error(ErrorKind::InvalidParams, "certificate needs N >= 2");
  if (!(t_step > 0.0 && t_step <= 1e-3 && r_step > 0.0 && r_step <= 1e-3))
    throw Error(ErrorKind::InvalidParams, "grids must resolve 1e-3");
  CertificateResult out;
  const auto nt = static_cast<long>(std::ceil(1.0 / t_step));
  const auto nr = static_cast<long>(std::ceil(R / r_step));
  for (long j = 1; j <= nr; ++j) {
    const double r = std::min(R, j * r_step);
    const double sr = std::sinh(r);
    for (long i = 1; i <= nt; ++i) {
      const double t = std::min(1.0, i * t_step);
      const double f = std::sinh(t * r) - std::pow(t, N - 1.0) * sr;
      const double f2 = r * r * std::sinh(t * r) - (N - 1.0) * (N - 2.0) * std::pow(t, N - 3.0) * sr;
      ++out.grid_points;
      if (f < out.worst) {
        out.worst = f;
        out.witness_t = t;
        out.witness_r = r;
      }
      out.max_second_derivative = std::max(out.max_second_derivative, f2);
    }
  }
  out.pass = out.worst >= -1e-15 * std::sinh(R);
  out.concavity_sufficient = out.max_second_derivative <= 0.0;
  return out;
}

ThresholdResult mcp_dimension_threshold(const Space& space, const Point& p, double R,
                                        double N_lo, double N_hi, const ThresholdOptions& opt,
                                        const RandomStream& rng) {
  if (!(N_lo >= 1.0 && N_hi > N_lo)) throw Error(ErrorKind::InvalidParams, "need 1 <= N_lo < N_hi");
  if (!(opt.tol > 0.0)) throw Error(ErrorKind::InvalidParams, "tolerance must be positive");
  ThresholdResult out;
  const auto ball = RegionSpec::ball(p, R);
  // the comparison deficit peaks at r = R, so the shell must be thin enough not to
  // average it away
  const auto shell = RegionSpec::annulus(p, 0.99 * R, R);
  auto passes = [&](double N) {
    ++out.evaluations;
    const ComparisonParams cp{0.0, N};
    // the same stream on every evaluation keeps the verdict monotone in N
    return mcp_audit(space, p, ball, cp, {}, opt.audit, rng).pass &&
           mcp_audit(space, p, shell, cp, {}, opt.audit, rng).pass;
  };
  if (!passes(N_hi)) throw Error(ErrorKind::BracketError, "upper bracket fails the audit");
  if (passes(N_lo)) throw Error(ErrorKind::BracketError, "lower bracket already passes");
  double lo = N_lo, hi = N_hi;
  while (hi - lo > opt.tol) {
    const double mid = 0.5 * (lo + hi);
    (passes(mid) ? hi : lo) = mid;
  }
  out.lo = lo;
  out.hi = hi;
  out.n_star = hi;
  return out;
}

// ---------------------------------------------------------------------------
// Ball homogeneity
// ---------------------------------------------------------------------------

HomogeneityFit ball_homogeneity_audit(const Space& space, const std::vector<Point>& centers,
                                      const std::vector<double>& radii, std::size_t budget,
                                      const RandomStream& rng) {
  if (centers.empty() || radii.empty())
    throw Error(ErrorKind::InvalidParams, "homogeneity window is empty");
  if (budget < 2) throw Error(ErrorKind::InvalidParams, "budget must be >= 2");
  for (const auto& x : centers)
    for (double r : radii) {
      if (!(r > 0.0)) throw Error(ErrorKind::InvalidParams, "radii must be positive");
      if (r > space.boundary_distance(x) / 10.0)
        throw Error(ErrorKind::MarginViolated, "ball within ten radii of the boundary");
    }

  const Point& o = centers.front();
  double reach = 0.0;
  for (const auto& x : centers) reach = std::max(reach, space.distance(o, x));
  const double rmax = *std::max_element(radii.begin(), radii.end());
  const double Rref = reach + rmax;
  RandomStream rs = rng.substream(0);
  const auto mref = space.ball_mass(o, Rref, budget, rs);
  const auto ref = space.sample_ball(o, Rref, budget, rs);
  const double n = static_cast<double>(ref.size());

  HomogeneityFit fit;
  fit.centers = centers;
  fit.radii = radii;
  for (const auto& x : centers) {
    std::vector<double> dist(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) dist[i] = space.distance(x, ref[i]);
    for (double r : radii) {
      const auto k = std::count_if(dist.begin(), dist.end(), [r](double d) { return d <= r; });
      if (k == 0) throw Error(ErrorKind::DegenerateBall, "no reference sample inside a ball");
      const double f = k / n;
      const double m = mref.value * f;
      fit.masses.push_back(m);
      fit.errors.push_back(std::hypot(mref.value * std::sqrt(f * (1.0 - f) / n),
                                      mref.std_error * f));
    }
  }

  const double dim = space.dimension();
  const std::set<double> distinct(radii.begin(), radii.end());
  fit.underdetermined = distinct.size() < 2;
  const std::size_t nr = radii.size();
  if (fit.underdetermined) {
    fit.n = dim;
    double s = 0.0;
    for (std::size_t i = 0; i < fit.masses.size(); ++i)
      s += fit.masses[i] / std::pow(radii[i % nr], dim);
    fit.C = s / fit.masses.size();
  } else {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < fit.masses.size(); ++i) {
      const double x = std::log(radii[i % nr]), y = std::log(fit.masses[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double m = static_cast<double>(fit.masses.size());
    fit.n = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    fit.C = std::exp((sy - fit.n * sx) / m);
  }
  double pooled = 0.0;
  for (std::size_t i = 0; i < fit.masses.size(); ++i) {
    const double model = fit.C * std::pow(radii[i % nr], fit.n);
    fit.residual = std::max(fit.residual, std::abs(fit.masses[i] / model - 1.0));
    const double rel = fit.errors[i] / fit.masses[i];
    pooled += rel * rel;
  }
  fit.pooled_error = std::sqrt(pooled);

  for (std::size_t j = 0; j < nr; ++j) {
    double lo = kInf, hi = -kInf, slo = 0, shi = 0, mean = 0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const double m = fit.masses[c * nr + j];
      mean += m;
      if (m < lo) lo = m, slo = fit.errors[c * nr + j];
      if (m > hi) hi = m, shi = fit.errors[c * nr + j];
    }
    mean /= centers.size();
    fit.translation_spread = std::max(fit.translation_spread, (hi - lo) / mean);
    if (hi - lo > 3.0 * std::hypot(slo, shi) + 1e-12 * mean) fit.translation_pass = false;
  }
  fit.power_law_pass = fit.underdetermined ||
                       (std::abs(fit.n - dim) <= 0.02 &&
                        fit.residual <= 2.0 * fit.pooled_error + 1e-12);
  return fit;
}

// ---------------------------------------------------------------------------
// Gaussian-type potential on the hyperbolic plane
// ---------------------------------------------------------------------------

double potential_second_difference(const Point& p, double phi, double h) {
  static const HyperbolicPlane H;
  const Point a = H.from_local_polar(p, h, phi);
  const Point b = H.from_local_polar(p, h, phi + kPi);
  const double v0 = p[0] * p[0];
  return (a[0] * a[0] - 2.0 * v0 + b[0] * b[0]) / (h * h);
}

AuditReport gaussian_cd_hessian_audit(std::size_t trials, double h, double tol,
                                      const RandomStream& rng, double max_radius) {
  if (!(h >= 1e-4 && h <= 1e-2))
    throw Error(ErrorKind::InvalidParams, "finite-difference step must lie in [1e-4, 1e-2]");
  if (trials == 0) throw Error(ErrorKind::InvalidParams, "audit needs at least one trial");
  AuditReport rep;
  rep.name = "gaussian_cd_hessian";
  rep.tolerance = tol;
  RandomStream rs = rng.substream(0);
  double min_sd = kInf;
  for (std::size_t i = 0; i < trials; ++i) {
    const Point p = Point::polar(rs.uniform(0.0, max_radius), rs.uniform(-kPi, kPi));
    const double phi = rs.uniform(-kPi, kPi);
    const double sd = potential_second_difference(p, phi, h);
    min_sd = std::min(min_sd, sd);
    rep.observe(2.0 - sd, Witness{{p}, phi, sd, 2.0});
    ++rep.trials;
  }
  rep.metrics["min_second_difference"] = min_sd;
  rep.metrics["min_ricci_witness"] = min_sd - 1.0;
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_csv(const BGProfile& p) {
  std::string s = "r,ratio,sigma\n";
  for (std::size_t i = 0; i < p.radii.size(); ++i)
    s += g17(p.radii[i]) + "," + g17(p.ratios[i]) + "," + g17(p.errors[i]) + "\n";
  return s;
}

std::string to_csv(const DensityProfile& p) {
  std::string s = "r,value,sigma\n";
  for (std::size_t i = 0; i < p.radii.size(); ++i)
    s += g17(p.radii[i]) + "," + g17(p.values[i]) + "," + g17(p.errors[i]) + "\n";
  return s;
}

std::string to_csv(const HomogeneityFit& f) {
  std::string s = "center,radius,mass,error,model\n";
  const std::size_t nr = f.radii.size();
  for (std::size_t i = 0; i < f.masses.size(); ++i) {
    const double r = f.radii[i % nr];
    s += std::to_string(i / nr) + "," + g17(r) + "," + g17(f.masses[i]) + "," +
         g17(f.errors[i]) + "," + g17(f.C * std::pow(r, f.n)) + "\n";
  }
  return s;
}

}  // namespace mmlab
