#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "mmlab/convexity.hpp"
#include "oracles.hpp"

using namespace mmlab;

namespace {

AuditOptions trials(std::size_t n, double tol = 1e-10) {
  AuditOptions o;
  o.trials = n;
  o.tol = tol;
  return o;
}

std::vector<fixture::Model> normed_models() {
  std::vector<fixture::Model> out;
  for (auto& m : fixture::all_models())
    if (m.space->family() == Family::Normed && m.space->boundary_distance(m.space->origin()) == kInf)
      out.push_back(m);
  return out;
}

/// Hyperbolic pair at radius 1 with angular gap pi/2, contracted toward the origin.
constexpr double kTheta = kPi / 2;

}  // namespace

TEST_SUITE("convexity") {
  TEST_CASE("busemann convexity examples") {
    RandomStream rng(fixture::kSeed, 30);
    auto l2 = make_lp(2, 2.0);
    auto r = busemann_convexity_audit(*l2, {l2->origin(), 1.0}, trials(10000), rng);
    CHECK(r.pass);
    CHECK(r.worst <= 1e-12);

    auto h = make_hyperbolic();
    auto rh = busemann_convexity_audit(*h, {h->origin(), 2.0}, trials(10000), rng);
    CHECK(rh.pass);
    // spot check by the law of cosines: p = origin, x, y at radius 1, gap pi/2, t = 0.5
    const double dxy = oracle::hyperbolic_distance(1, 0, 1, kTheta);
    const double dt = oracle::hyperbolic_distance(0.5, 0, 0.5, kTheta);
    CHECK(dt <= 0.5 * dxy);
    CHECK(h->distance(h->intermediate(h->origin(), Point::polar(1, 0), 0.5),
                      h->intermediate(h->origin(), Point::polar(1, kTheta), 0.5)) ==
          doctest::Approx(dt).epsilon(1e-13));

    auto T = fixture::tree();
    CHECK(busemann_convexity_audit(*T, {T->origin(), 0.5}, trials(10000), rng).pass);
  }

  TEST_CASE("busemann convexity at a branching triple of the tree") {
    GluedIntervalTree T(GluedIntervalSpec::power_law(4));
    const double d1 = T.spec().delta[0];
    const Point p = T.base_point(0.0);
    const Point x = T.leg_point(T.delta_leg(1, +1), d1);
    const Point y = T.base_point(2 * d1);
    // by hand: x_t sits on the leg at offset 2 d1 t - d1 when t > 1/2, y_t on the line at 2 d1 t
    const double t = 0.75;
    const auto xt = T.intermediate(p, x, t), yt = T.intermediate(p, y, t);
    CHECK(T.distance(x, y) == doctest::Approx(2 * d1));
    CHECK(T.distance(xt, yt) == doctest::Approx(2 * (2 * d1 * t - d1)));
    CHECK(T.distance(xt, yt) <= t * T.distance(x, y));
  }

  TEST_CASE("concavity examples") {
    RandomStream rng(fixture::kSeed, 31);
    for (const auto& m : normed_models()) {
      auto r = concavity_audit(*m.space, m.space->origin(), {m.space->origin(), 1.0}, trials(2000),
                               rng);
      CHECK_MESSAGE(r.pass, m.name);
      CHECK_MESSAGE(r.worst <= 1e-12, m.name);
    }
    // negative curvature contracts strictly, so d(x_t, y_t) >= t d(x, y) fails
    auto h = make_hyperbolic();
    auto rh = concavity_audit(*h, h->origin(), {h->origin(), 1.0}, trials(1000), rng);
    CHECK_FALSE(rh.pass);
    REQUIRE(rh.witness);
    CHECK(oracle::hyperbolic_distance(0.5, 0, 0.5, kTheta) <
          0.5 * oracle::hyperbolic_distance(1, 0, 1, kTheta));

    auto T = fixture::tree();
    auto rt = concavity_audit(*T, T->origin(), {T->origin(), 0.5}, trials(2000), rng);
    CHECK_FALSE(rt.pass);
  }

  TEST_CASE("cone-type examples") {
    RandomStream rng(fixture::kSeed, 32);
    auto l3 = make_lp(2, 3.0);
    auto r = cone_type_audit(*l3, Point::vec({0.4, -1.3}), {Point::vec({0.4, -1.3}), 1.0},
                             trials(10000, 1e-12), rng);
    CHECK(r.pass);
    // frozen two-sided gap at the law-of-cosines pair: |0.72121 - 0.5 * 1.49526|
    const double gap = 0.5 * oracle::hyperbolic_distance(1, 0, 1, kTheta) -
                       oracle::hyperbolic_distance(0.5, 0, 0.5, kTheta);
    CHECK(gap == doctest::Approx(0.0264).epsilon(0.01));
    CHECK(gap > 0.01);
    auto h = make_hyperbolic();
    auto rh = cone_type_audit(*h, h->origin(), {h->origin(), 1.0}, trials(1000, 1e-3), rng);
    CHECK_FALSE(rh.pass);
  }

  TEST_CASE("contraction Lipschitz constant") {
    RandomStream rng(fixture::kSeed, 33);
    auto e = make_lp(2, 2.0);
    auto r = contraction_lipschitz_audit(*e, e->origin(), 0.5, {e->origin(), 1.0}, trials(2000), rng);
    CHECK(r.pass);
    CHECK(r.metrics.at("sup_ratio") == doctest::Approx(0.5).epsilon(1e-12));
    auto h = make_hyperbolic();
    auto rh = contraction_lipschitz_audit(*h, h->origin(), 0.5, {h->origin(), 1.0}, trials(2000), rng);
    CHECK(rh.pass);
    CHECK(rh.metrics.at("sup_ratio") < 0.5);
    CHECK(rh.metrics.at("margin") > 0.0);
    auto r1 = contraction_lipschitz_audit(*h, h->origin(), 1.0, {h->origin(), 1.0}, trials(500), rng);
    CHECK(r1.metrics.at("sup_ratio") == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("midpoint uniqueness") {
    auto l1 = make_lp(2, 1.0);
    CHECK(uniqueness_probe(*l1, Point::vec({0, 0}), Point::vec({1, 1}), 720, 1e-6).verdict ==
          Uniqueness::Multiple);
    for (double p : {2.0, 1.5, 3.0}) {
      auto S = make_lp(2, p);
      auto u = uniqueness_probe(*S, Point::vec({0, 0}), Point::vec({1, 1}), 720, 1e-6);
      CHECK_MESSAGE(u.verdict == Uniqueness::Unique, "p=" << p);
    }
    auto h = make_hyperbolic();
    CHECK(uniqueness_probe(*h, Point::polar(0.5, 0), Point::polar(1, 2), 720, 1e-6).verdict ==
          Uniqueness::Unique);
  }

  TEST_CASE("almost extendability examples") {
    RandomStream rng(fixture::kSeed, 34);
    ExtendabilityOptions o;
    o.probes = 100;
    o.sources = 1000;
    const std::vector<double> radii{0.5, 1.0}, ts{0.25, 0.5, 0.75};
    auto e = make_lp(2, 2.0);
    CHECK(almost_extendability_audit(*e, e->origin(), 0.05, radii, ts, o, rng).pass);

    // A half-plane is a cone over each of its boundary points, so the contraction
    // toward such a point is onto B(p, t r): no witness can exist there.
    auto half = make_convex_subset(e, HalfSpaceRegion{{1.0, 0.0}, 0.0});
    CHECK(almost_extendability_audit(*half, Point::vec({0, 0}), 0.05, radii, ts, o, rng).pass);
    const Point q{Point::vec({0.1, 0.3})};
    CHECK(half->distance(half->intermediate(Point::vec({0, 0}), Point::vec({0.2, 0.6}), 0.5), q) ==
          0.0);

    // a disk is not a cone at its boundary: points behind p have no preimage
    auto disk = make_convex_subset(e, BallRegion{Point::vec({0, 0}), 1.0});
    auto rd = almost_extendability_audit(*disk, Point::vec({1, 0}), 0.05, radii, ts, o, rng);
    CHECK_FALSE(rd.pass);
    REQUIRE(rd.witness);
    CHECK(disk->contains(rd.witness->points[1]));
    CHECK(rd.witness->lhs > rd.witness->rhs);

    CHECK(almost_extendability_audit(*disk, Point::vec({1, 0}), 2.0, radii, ts, o, rng).pass);
  }

  TEST_CASE("parallel rays") {
    auto e = make_lp(2, 2.0);
    auto gamma = make_ray(*e, e->origin(), Point::vec({1, 0}), {0, 1, 2, 5, 10});
    auto eta = parallel_ray_construct(*e, Point::vec({0, 1}), gamma, 1e6);
    CHECK(eta.converged);
    for (std::size_t i = 0; i < gamma.grid.size(); ++i) {
      CHECK(eta.eta.points[i][0] == doctest::Approx(gamma.grid[i]).epsilon(1e-6));
      CHECK(eta.eta.points[i][1] == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(eta.distances[i] == doctest::Approx(1.0).epsilon(1e-6));
    }

    auto hex = fixture::hexagon();
    auto g2 = make_ray(*hex, hex->origin(), Point::vec({0.3, 0.1}), {0, 1, 5, 10});
    const Point y = Point::vec({-0.2, 0.7});
    auto eh = parallel_ray_construct(*hex, y, g2, 1e6);
    for (std::size_t i : {1u, 2u, 3u})
      CHECK(std::abs(eh.distances[i] - hex->distance(hex->origin(), y)) <= 1e-6);

    auto h = make_hyperbolic();
    const Point yh = Point::polar(1.0, kPi / 2);
    auto gh = make_ray(*h, h->origin(), Point::polar(1.0, 0.0), {0, 1, 5});
    auto ph = parallel_ray_construct(*h, yh, gh, 10.5);
    CHECK(ph.converged);
    CHECK(ph.distances[2] < 1.0);
  }

  TEST_CASE("globalization chain") {
    auto l3 = make_lp(2, 3.0);
    auto r = globalization_chain_check(*l3, Point::vec({0.2, 0.1}), Point::vec({1, -1}),
                                       Point::vec({-0.5, 2}), 0.4, 8, 1e-10);
    CHECK(r.pass);
    for (double s : r.series.at("link_slack")) CHECK(std::abs(s) <= 1e-10);

    // every hyperbolic link contracts strictly: slack negative, chain reports the deficit
    auto h = make_hyperbolic();
    auto rh = globalization_chain_check(*h, h->origin(), Point::polar(1, 0), Point::polar(1, 1.5),
                                        0.5, 8, 1e-10);
    for (double s : rh.series.at("link_slack")) CHECK(s < 0.0);
    CHECK_FALSE(rh.pass);

    // the contracted pair straddles the attachment point of the first delta leg
    GluedIntervalTree T(GluedIntervalSpec::power_law(4));
    const double d1 = T.spec().delta[0];
    const Point p = T.base_point(0.0);
    const Point x = T.leg_point(T.delta_leg(1, +1), d1);
    const Point y = T.base_point(3 * d1);
    auto rt = globalization_chain_check(T, p, x, y, 0.75, 4, 1e-10);
    CHECK_FALSE(rt.pass);
  }

  TEST_CASE("audit reports merge deterministically") {
    RandomStream rng(fixture::kSeed, 35);
    auto h = make_hyperbolic();
    AuditOptions one = trials(2000), four = trials(2000);
    four.jobs = 4;
    auto a = cone_type_audit(*h, h->origin(), {h->origin(), 1.0}, one, rng);
    auto b = cone_type_audit(*h, h->origin(), {h->origin(), 1.0}, four, rng);
    CHECK(a.worst == b.worst);
    CHECK(a.per_stream_worst == b.per_stream_worst);
  }
}

TEST_SUITE("property") {
  TEST_CASE("busemann convexity is an equality on normed spaces") {
    for (const auto& m : normed_models()) {
      RandomStream rng(fixture::kSeed, 40);
      auto r = busemann_convexity_audit(*m.space, {m.space->origin(), m.radius}, trials(10000), rng);
      CHECK_MESSAGE(r.worst <= 1e-12, m.name << " worst " << r.worst);
    }
  }

  TEST_CASE("convexity implies contraction Lipschitz bound") {
    RandomStream rng(fixture::kSeed, 41);
    for (const auto& m : fixture::all_models()) {
      const Space& S = *m.space;
      const SampleBall region{S.origin(), m.radius};
      auto conv = busemann_convexity_audit(S, region, trials(2000), rng.substream(1));
      if (!conv.pass) continue;
      for (int k = 0; k < 3; ++k) {
        const double t = rng.uniform(0.05, 1.0);
        auto pts = S.sample_ball(S.origin(), m.radius, 1, rng);
        auto lip = contraction_lipschitz_audit(S, pts[0], t, region, trials(1000), rng.substream(2 + k));
        CHECK_MESSAGE(lip.pass, m.name << " t=" << t << " worst " << lip.worst);
      }
    }
  }

  TEST_CASE("cone-type equality on norms, violation on hyperbolic") {
    for (const auto& m : normed_models()) {
      RandomStream rng(fixture::kSeed, 42);
      auto r = cone_type_audit(*m.space, m.space->origin(), {m.space->origin(), m.radius},
                               trials(10000, 1e-10), rng);
      CHECK_MESSAGE(r.pass, m.name << " worst " << r.worst);
    }
    auto h = make_hyperbolic();
    RandomStream rng(fixture::kSeed, 43);
    auto a = cone_type_audit(*h, h->origin(), {h->origin(), 1.0}, trials(1000, 1e-3), rng);
    auto b = cone_type_audit(*h, h->origin(), {h->origin(), 1.0}, trials(1000, 1e-3), rng);
    REQUIRE_FALSE(a.pass);
    REQUIRE(a.witness);
    REQUIRE(b.witness);
    CHECK(a.witness->points == b.witness->points);
    // re-evaluating the witness reproduces both sides
    const auto& w = *a.witness;
    const double lhs = h->distance(h->intermediate(w.points[0], w.points[1], w.t),
                                   h->intermediate(w.points[0], w.points[2], w.t));
    CHECK(lhs == doctest::Approx(w.lhs).epsilon(1e-12));
    CHECK(w.t * h->distance(w.points[1], w.points[2]) == doctest::Approx(w.rhs).epsilon(1e-12));
  }

  TEST_CASE("parallel rays are unit-speed isometric embeddings") {
    std::vector<std::pair<SpacePtr, double>> cases{
        {make_lp(2, 2.0), 1e6}, {make_lp(2, 3.0), 1e6}, {fixture::hexagon(), 1e6},
        {make_hyperbolic(), 10.5}};
    const std::vector<double> grid{0, 0.5, 1, 2, 3, 5, 8, 10};
    for (const auto& [S, T] : cases) {
      auto gamma = make_ray(*S, S->origin(), *S->chart_point(S->origin(), 0.3, 1.0), grid);
      CHECK(ray_isometry_defect(*S, gamma) <= 1e-8);
      auto eta = parallel_ray_construct(*S, *S->chart_point(S->origin(), 2.0, 1.0), gamma, T);
      CHECK_MESSAGE(ray_isometry_defect(*S, eta.eta) <= 1e-8, S->describe());
    }
  }

  TEST_CASE("exact surjectivity on complete spaces, failure at subset boundaries") {
    ExtendabilityOptions o;
    o.probes = 100;
    o.sources = 1500;
    const std::vector<double> ts{0.25, 0.5, 0.75};
    RandomStream rng(fixture::kSeed, 44);
    auto T = fixture::tree();
    struct Case {
      SpacePtr space;
      Point p;
      std::vector<double> radii;
    };
    std::vector<Case> complete{{make_lp(2, 2.0), Point::vec({0.3, 0.2}), {0.5, 1.0}},
                               {make_lp(2, 3.0), Point::vec({0, 0}), {0.5, 1.0}},
                               {make_hyperbolic(), Point::polar(0.4, 1.0), {0.5, 1.0}},
                               {T, Point::tree(0, 0.1), {0.02, 0.05, 0.08}}};
    for (const auto& c : complete)
      CHECK_MESSAGE(almost_extendability_audit(*c.space, c.p, 0.0, c.radii, ts, o, rng).pass,
                    c.space->describe());

    auto disk = make_convex_subset(make_lp(2, 2.0), BallRegion{Point::vec({0, 0}), 1.0});
    auto hball = make_convex_subset(make_hyperbolic(), BallRegion{Point::polar(0, 0), 1.0});
    std::vector<Case> boundary{{disk, Point::vec({1, 0}), {0.5, 1.0}},
                               {hball, Point::polar(1.0, 0.3), {0.5, 1.0}}};
    for (const auto& c : boundary)
      CHECK_MESSAGE(!almost_extendability_audit(*c.space, c.p, 0.0, c.radii, ts, o, rng).pass,
                    c.space->describe());
  }
}
