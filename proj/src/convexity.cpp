#include "mmlab/convexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mmlab {

void AuditReport::observe(double violation, Witness w) {
  if (violation > worst) {
    worst = violation;
    witness = std::move(w);
  }
}

void AuditReport::merge(const AuditReport& other) {
  trials += other.trials;
  degenerate += other.degenerate;
  per_stream_worst.push_back(other.worst);
  if (other.worst > worst) {
    worst = other.worst;
    witness = other.witness;
  }
  for (const auto& [k, v] : other.metrics) {
    auto it = metrics.find(k);
    metrics[k] = it == metrics.end() ? v : std::max(it->second, v);
  }
}

void AuditReport::finalize() { pass = worst <= tolerance; }

namespace {

constexpr double kScaleFloor = 1e-14;
/// Rounding allowance per unit of coordinate magnitude. Intermediate points
/// carry absolute error ~eps |coords|, which is large relative to t d(x, y)
/// when t is small.
constexpr double kRoundoff = 16 * std::numeric_limits<double>::epsilon();
constexpr std::size_t kMaxResample = 1000;

struct Triple {
  Point p, x, y;
  double t;
};

/// Draws (p, x, y, t) with x != y; p is fixed when `fixed_p` is set.
Triple draw_triple(const Space& space, const Point* fixed_p, const SampleBall& region,
                   RandomStream& rs, std::size_t& degenerate) {
  for (std::size_t attempt = 0; attempt < kMaxResample; ++attempt) {
    auto pts = space.sample_ball(region.center, region.radius, fixed_p ? 2 : 3, rs);
    Point p = fixed_p ? *fixed_p : pts[2];
    double t = rs.uniform();
    if (t == 0.0) t = 0.5;
    const double dxy = space.distance(pts[0], pts[1]);
    if (dxy <= 1e-12 * region.radius) {
      ++degenerate;
      continue;
    }
    return {std::move(p), std::move(pts[0]), std::move(pts[1]), t};
  }
  throw Error(ErrorKind::EmptyRegion, "sampling region produced only degenerate triples");
}

/// Shared driver for the three-point inequalities; `score` maps
/// (d(x,y), d(x_t,y_t), t, rounding allowance) to a relative signed violation.
template <class Score>
AuditReport triple_audit(std::string name, const Space& space, const Point* fixed_p,
                         const SampleBall& region, const AuditOptions& opt,
                         const RandomStream& rng, Score score) {
  if (opt.trials == 0) throw Error(ErrorKind::InvalidParams, "audit needs at least one trial");
  const std::size_t batch = std::max<std::size_t>(opt.batch, 1);
  const std::size_t nb = (opt.trials + batch - 1) / batch;
  auto parts = run_batches<AuditReport>(nb, opt.jobs, [&](std::size_t b) {
    AuditReport part;
    RandomStream rs = rng.substream(b);
    const std::size_t n = std::min(batch, opt.trials - b * batch);
    for (std::size_t i = 0; i < n; ++i) {
      auto tr = draw_triple(space, fixed_p, region, rs, part.degenerate);
      const Point xt = space.intermediate(tr.p, tr.x, tr.t);
      const Point yt = space.intermediate(tr.p, tr.y, tr.t);
      const double dxy = space.distance(tr.x, tr.y);
      const double dtt = space.distance(xt, yt);
      const double noise = kRoundoff * (space.coordinate_scale(tr.p) +
                                        space.coordinate_scale(tr.x) + space.coordinate_scale(tr.y));
      const double v = score(dxy, dtt, tr.t, noise);
      part.observe(v, Witness{{tr.p, tr.x, tr.y}, tr.t, dtt, tr.t * dxy});
      ++part.trials;
    }
    return part;
  });
  AuditReport rep;
  rep.name = std::move(name);
  rep.tolerance = opt.tol;
  for (const auto& part : parts) rep.merge(part);
  rep.finalize();
  return rep;
}

double rel_scale(double dxy, double t) { return std::max(t * dxy, kScaleFloor); }

}  // namespace

AuditReport busemann_convexity_audit(const Space& space, const SampleBall& region,
                                     const AuditOptions& opt, const RandomStream& rng) {
  return triple_audit("busemann_convexity", space, nullptr, region, opt, rng,
                      [](double dxy, double dtt, double t, double noise) {
                        return (dtt - t * dxy - noise) / rel_scale(dxy, t);
                      });
}

AuditReport concavity_audit(const Space& space, const Point& p, const SampleBall& region,
                            const AuditOptions& opt, const RandomStream& rng) {
  return triple_audit("concavity", space, &p, region, opt, rng,
                      [](double dxy, double dtt, double t, double noise) {
                        return (t * dxy - dtt - noise) / rel_scale(dxy, t);
                      });
}

AuditReport cone_type_audit(const Space& space, const Point& p, const SampleBall& region,
                            const AuditOptions& opt, const RandomStream& rng) {
  return triple_audit("cone_type", space, &p, region, opt, rng,
                      [](double dxy, double dtt, double t, double noise) {
                        return (std::abs(dtt - t * dxy) - noise) / rel_scale(dxy, t);
                      });
}

AuditReport contraction_lipschitz_audit(const Space& space, const Point& p, double t,
                                        const SampleBall& region, const AuditOptions& opt,
                                        const RandomStream& rng) {
  if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidParams, "t must lie in (0, 1]");
  if (opt.trials == 0) throw Error(ErrorKind::InvalidParams, "audit needs at least one trial");
  const std::size_t batch = std::max<std::size_t>(opt.batch, 1);
  const std::size_t nb = (opt.trials + batch - 1) / batch;
  auto parts = run_batches<AuditReport>(nb, opt.jobs, [&](std::size_t b) {
    AuditReport part;
    part.metrics["sup_ratio"] = 0.0;
    RandomStream rs = rng.substream(b);
    const std::size_t n = std::min(batch, opt.trials - b * batch);
    for (std::size_t i = 0; i < n; ++i) {
      auto tr = draw_triple(space, &p, region, rs, part.degenerate);
      const double dxy = space.distance(tr.x, tr.y);
      const double dtt =
          space.distance(space.intermediate(p, tr.x, t), space.intermediate(p, tr.y, t));
      const double ratio = dtt / dxy;
      part.metrics["sup_ratio"] = std::max(part.metrics["sup_ratio"], ratio);
      part.observe(ratio / t - 1.0, Witness{{p, tr.x, tr.y}, t, dtt, t * dxy});
      ++part.trials;
    }
    return part;
  });
  AuditReport rep;
  rep.name = "contraction_lipschitz";
  rep.tolerance = opt.tol;
  for (const auto& part : parts) rep.merge(part);
  rep.metrics["margin"] = t - rep.metrics["sup_ratio"];
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// Uniqueness probe
// ---------------------------------------------------------------------------

const char* to_string(Uniqueness u) {
  switch (u) {
    case Uniqueness::Unique: return "unique";
    case Uniqueness::Multiple: return "multiple";
    case Uniqueness::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

void classify(const Space& space, UniquenessResult& res, double tol) {
  std::vector<Point> distinct;
  for (const auto& m : res.midpoints) {
    const bool seen = std::any_of(distinct.begin(), distinct.end(),
                                  [&](const Point& q) { return space.distance(q, m) <= tol; });
    if (!seen) distinct.push_back(m);
  }
  res.midpoints = std::move(distinct);
  for (std::size_t i = 0; i < res.midpoints.size(); ++i)
    for (std::size_t j = i + 1; j < res.midpoints.size(); ++j)
      if (space.distance(res.midpoints[i], res.midpoints[j]) > 10.0 * tol) {
        res.verdict = Uniqueness::Multiple;
        // keep the separated pair first so it serves as the witness
        std::swap(res.midpoints[1], res.midpoints[j]);
        std::swap(res.midpoints[0], res.midpoints[i]);
        return;
      }
  if (res.midpoints.empty() || res.resolution > 10.0 * tol)
    res.verdict = Uniqueness::Inconclusive;
  else
    res.verdict = Uniqueness::Unique;
}

}  // namespace

UniquenessResult uniqueness_probe(const Space& space, const Point& x, const Point& y,
                                  std::size_t grid, double tol) {
  const double d = space.distance(x, y);
  if (d == 0.0) throw Error(ErrorKind::InvalidParams, "uniqueness probe needs x != y");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidParams, "tolerance must be positive");
  const double half = 0.5 * d;
  auto defect = [&](const Point& w) {
    return std::abs(space.distance(x, w) - half) + std::abs(space.distance(w, y) - half);
  };

  UniquenessResult res;
  if (auto* tree = dynamic_cast<const GluedIntervalTree*>(&space)) {
    // the sphere of a finite tree is a finite set, so the search is exact
    for (const auto& w : tree->sphere(x, half)) {
      const double f = defect(w);
      ++res.candidates;
      res.min_defect = std::min(res.min_defect, f);
      if (f <= tol) res.midpoints.push_back(w);
    }
    res.resolution = 0.0;
    classify(space, res, tol);
    return res;
  }

  if (grid < 3) throw Error(ErrorKind::InvalidParams, "grid needs at least 3 directions");
  auto on_sphere = [&](double theta) -> std::optional<Point> {
    double s = half;
    for (int it = 0; it < 3; ++it) {
      auto q = space.chart_point(x, theta, s);
      if (!q) return std::nullopt;
      const double a = space.distance(x, *q);
      if (a == 0.0) return std::nullopt;
      if (std::abs(a - half) <= 1e-15 * half) return q;
      s *= half / a;
    }
    return space.chart_point(x, theta, s);
  };
  auto f_theta = [&](double theta) {
    auto w = on_sphere(theta);
    return w ? defect(*w) : kInf;
  };

  // Near a strict minimum the defect grows quadratically, so a point at
  // distance tol from the midpoint has defect about tol^2 / d. Accepting
  // larger defects would report near-midpoints as separate ones.
  const double accept = std::min(tol, tol * tol / d);
  const double step = 2.0 * kPi / static_cast<double>(grid);
  std::vector<std::optional<Point>> net(grid);
  std::vector<double> f(grid);
  for (std::size_t k = 0; k < grid; ++k) {
    net[k] = on_sphere(k * step);
    f[k] = net[k] ? defect(*net[k]) : kInf;
  }
  res.candidates = grid;
  double coarse = 0.0;
  std::vector<double> spacing(grid, kInf);
  for (std::size_t k = 0; k < grid; ++k) {
    const auto& a = net[k];
    const auto& b = net[(k + 1) % grid];
    if (a && b) {
      spacing[k] = space.distance(*a, *b);
      coarse = std::max(coarse, spacing[k]);
    }
  }

  // The defect is 2-Lipschitz, so any midpoint between two grid nodes forces
  // a nearby node below twice the local spacing; refine all such nodes.
  double refined = 0.0;
  bool any_refined = false;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (std::size_t k = 0; k < grid; ++k) {
    const double fl = f[(k + grid - 1) % grid], fr = f[(k + 1) % grid];
    const double local = std::max(spacing[k], spacing[(k + grid - 1) % grid]);
    const bool local_min = f[k] <= fl && f[k] <= fr;
    if (!(local_min || f[k] <= 2.0 * local)) continue;
    if (!std::isfinite(f[k])) continue;
    double a = (k - 1.0) * step, b = (k + 1.0) * step;
    double c = b - gr * (b - a), e = a + gr * (b - a);
    double fc = f_theta(c), fe = f_theta(e);
    for (int it = 0; it < 200 && (b - a) > 1e-14; ++it) {
      if (fc <= fe) {
        b = e;
        e = c;
        fe = fc;
        c = b - gr * (b - a);
        fc = f_theta(c);
      } else {
        a = c;
        c = e;
        fc = fe;
        e = a + gr * (b - a);
        fe = f_theta(e);
      }
    }
    const double th = fc <= fe ? c : e;
    auto w = on_sphere(th);
    auto wa = on_sphere(a), wb = on_sphere(b);
    if (wa && wb) refined = std::max(refined, space.distance(*wa, *wb));
    any_refined = true;
    const double fw = w ? defect(*w) : kInf;
    res.min_defect = std::min({res.min_defect, fw, f[k]});
    if (w && fw <= accept) res.midpoints.push_back(*w);
  }
  res.resolution = any_refined ? refined : coarse;
  classify(space, res, tol);
  return res;
}

// ---------------------------------------------------------------------------
// Almost extendability
// ---------------------------------------------------------------------------

AuditReport almost_extendability_audit(const Space& space, const Point& p, double delta,
                                       std::span<const double> radii,
                                       std::span<const double> t_grid,
                                       const ExtendabilityOptions& opt, const RandomStream& rng) {
  if (!(delta >= 0.0)) throw Error(ErrorKind::InvalidParams, "delta must be >= 0");
  if (radii.empty() || t_grid.empty())
    throw Error(ErrorKind::InvalidParams, "radii and t grid must be non-empty");
  if (opt.probes == 0 || opt.sources < 2)
    throw Error(ErrorKind::InvalidParams, "need probes >= 1 and sources >= 2");
  for (double t : t_grid)
    if (!(t > 0.0 && t < 1.0)) throw Error(ErrorKind::InvalidParams, "t must lie in (0, 1)");

  const std::size_t cells = radii.size() * t_grid.size();
  auto parts = run_batches<AuditReport>(cells, opt.jobs, [&](std::size_t cell) {
    const double r = radii[cell / t_grid.size()];
    const double t = t_grid[cell % t_grid.size()];
    RandomStream rs = rng.substream(cell);
    const auto src = space.sample_ball(p, r, opt.sources, rs);
    if (src.empty()) throw Error(ErrorKind::EmptyRegion, "empty source ball");
    const auto img = contract_set(space, p, t, src);
    const auto probes = space.sample_ball(p, t * r, opt.probes, rs);

    // covering radius of the image, estimated from nearest-neighbour gaps
    const std::size_t nn_n = std::min<std::size_t>(img.size(), 500);
    double cover = 0.0;
    for (std::size_t i = 0; i < nn_n; ++i) {
      double best = kInf;
      for (std::size_t j = 0; j < img.size(); ++j)
        if (j != i) best = std::min(best, space.distance(img[i], img[j]));
      cover = std::max(cover, best);
    }

    AuditReport part;
    double worst_gap = 0.0;
    for (const auto& q : probes) {
      double best = kInf;
      for (const auto& z : img) best = std::min(best, space.distance(z, q));
      worst_gap = std::max(worst_gap, best);
      const double allowed = delta * t * r + 2.0 * cover;
      part.observe((best - allowed) / (t * r), Witness{{p, q}, t, best, allowed});
    }
    part.trials = probes.size();
    part.metrics["max_gap_rel"] = worst_gap / (t * r);
    part.metrics["max_cover_rel"] = cover / (t * r);
    return part;
  });

  AuditReport rep;
  rep.name = "almost_extendability";
  rep.tolerance = 0.0;
  for (const auto& part : parts) {
    rep.merge(part);
    rep.series["max_gap_rel"].push_back(part.metrics.at("max_gap_rel"));
    rep.series["cover_rel"].push_back(part.metrics.at("max_cover_rel"));
  }
  rep.metrics["delta"] = delta;
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// Rays
// ---------------------------------------------------------------------------

Point ray_at(const Space& space, const RaySample& gamma, double s) {
  const double L = space.distance(gamma.origin, gamma.anchor);
  if (L == 0.0) throw Error(ErrorKind::InvalidParams, "ray anchor equals its origin");
  auto q = space.extend(gamma.origin, gamma.anchor, s / L);
  if (!q) throw Error(ErrorKind::DomainExceeded, "ray leaves the space");
  return *q;
}

RaySample make_ray(const Space& space, const Point& origin, const Point& anchor,
                   std::vector<double> grid) {
  RaySample ray{origin, anchor, std::move(grid), {}};
  for (double s : ray.grid) {
    if (!(s >= 0.0)) throw Error(ErrorKind::InvalidParams, "ray parameters must be >= 0");
    ray.points.push_back(ray_at(space, ray, s));
  }
  return ray;
}

double ray_isometry_defect(const Space& space, const RaySample& ray) {
  double worst = 0.0;
  for (std::size_t i = 0; i < ray.points.size(); ++i)
    for (std::size_t j = i + 1; j < ray.points.size(); ++j)
      worst = std::max(worst, std::abs(space.distance(ray.points[i], ray.points[j]) -
                                       std::abs(ray.grid[i] - ray.grid[j])));
  return worst;
}

ParallelRay parallel_ray_construct(const Space& space, const Point& y, const RaySample& gamma,
                                   double T) {
  if (!(T > 0.0)) throw Error(ErrorKind::InvalidParams, "horizon must be positive");
  if (gamma.grid.empty()) throw Error(ErrorKind::InvalidParams, "ray grid is empty");
  const double tmax = *std::max_element(gamma.grid.begin(), gamma.grid.end());
  ParallelRay out;
  std::vector<Point> prev;
  for (int i = 0; i <= 6; ++i) {
    const double Ti = T * std::ldexp(1.0, i);
    const Point q = ray_at(space, gamma, Ti);
    const double L = space.distance(y, q);
    if (L <= tmax) continue;  // horizon too short for the grid
    std::vector<Point> cur;
    for (double s : gamma.grid) cur.push_back(space.intermediate(y, q, s / L));
    if (!prev.empty()) {
      double gap = 0.0;
      for (std::size_t k = 0; k < cur.size(); ++k)
        gap = std::max(gap, space.distance(prev[k], cur[k]) / (1.0 + gamma.grid[k]));
      out.cauchy_gaps.push_back(gap);
    }
    out.horizons.push_back(Ti);
    prev = std::move(cur);
  }
  if (out.cauchy_gaps.empty())
    throw Error(ErrorKind::NoConvergence, "horizon schedule never exceeds the ray grid");
  out.converged = out.cauchy_gaps.back() <= 1e-6;
  if (!out.converged)
    throw Error(ErrorKind::NoConvergence,
                "successive approximations differ by " + std::to_string(out.cauchy_gaps.back()));
  out.eta.origin = y;
  out.eta.anchor = prev.back();
  out.eta.grid = gamma.grid;
  out.eta.points = std::move(prev);
  for (std::size_t k = 0; k < gamma.grid.size(); ++k)
    out.distances.push_back(space.distance(gamma.points.at(k), out.eta.points[k]));
  return out;
}

// ---------------------------------------------------------------------------
// Globalization chain
// ---------------------------------------------------------------------------

AuditReport globalization_chain_check(const Space& space, const Point& p, const Point& x,
                                      const Point& y, double t, int m, double tol) {
  if (m < 2) throw Error(ErrorKind::InvalidParams, "subdivision needs m >= 2");
  if (!(t > 0.0 && t < 1.0)) throw Error(ErrorKind::InvalidParams, "t must lie in (0, 1)");
  const Point xt = space.intermediate(p, x, t);
  const Point yt = space.intermediate(p, y, t);
  const double dxy = space.distance(x, y);
  const double dtt = space.distance(xt, yt);
  const double scale = std::max(t * dxy / m, kScaleFloor);

  std::vector<Point> z, w;
  for (int i = 0; i <= m; ++i) {
    z.push_back(space.intermediate(xt, yt, static_cast<double>(i) / m));
    if (i == 0) {
      w.push_back(x);
    } else if (i == m) {
      w.push_back(y);
    } else {
      auto wi = space.extend(p, z.back(), 1.0 / t);
      if (!wi) throw Error(ErrorKind::DomainExceeded, "extension of p -> z_i leaves the space");
      w.push_back(*wi);
    }
  }

  AuditReport rep;
  rep.name = "globalization_chain";
  rep.tolerance = tol;
  double sum_z = 0.0, sum_w = 0.0;
  for (int i = 0; i < m; ++i) {
    const double dz = space.distance(z[i], z[i + 1]);
    const double dw = space.distance(w[i], w[i + 1]);
    sum_z += dz;
    sum_w += dw;
    const double slack = dz - t * dw;
    rep.series["link_slack"].push_back(slack);
    rep.observe(-slack / scale, Witness{{p, z[i], z[i + 1], w[i], w[i + 1]}, t, dz, t * dw});
    ++rep.trials;
  }
  // the subdivision must also reproduce the contracted distance
  const double path_defect = std::abs(sum_z - dtt) / std::max(dtt, kScaleFloor);
  rep.observe(path_defect, Witness{{p, x, y}, t, sum_z, dtt});
  rep.metrics["d_contracted"] = dtt;
  rep.metrics["sum_z"] = sum_z;
  rep.metrics["t_sum_w"] = t * sum_w;
  rep.metrics["t_d_xy"] = t * dxy;
  rep.finalize();
  return rep;
}

}  // namespace mmlab
