#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "mmlab/mcp.hpp"

using namespace mmlab;

namespace {

McpOptions samples(std::size_t n, std::vector<double> ts = {0.25, 0.5, 0.75},
                   McpRoute route = McpRoute::Auto) {
  McpOptions o;
  o.samples = n;
  o.t_grid = std::move(ts);
  o.route = route;
  return o;
}

/// (1/m(A)) * integral over A = B(o, 1) of t sinh(t d) / sinh(d), which is
/// (cosh t - 1) / (cosh 1 - 1) on the hyperbolic plane.
double hyperbolic_ball_ratio(double t, double R = 1.0) {
  return (std::cosh(t * R) - 1.0) / (std::cosh(R) - 1.0);
}

}  // namespace

TEST_SUITE("mcp") {
  TEST_CASE("comparison coefficient") {
    CHECK(mcp_coefficient({0.0, 3.0}, 1.7, 0.5) == doctest::Approx(0.125));
    for (double K : {0.0, -0.5, -2.0})
      for (double N : {1.0, 2.0, 3.5}) CHECK(mcp_coefficient({K, N}, 1.3, 1.0) == doctest::Approx(1.0));
    // frozen: 0.5 sinh(0.5) / sinh(1) at 30 digits
    CHECK(mcp_coefficient({-1.0, 2.0}, 1.0, 0.5) ==
          doctest::Approx(0.2217047209925185).epsilon(1e-14));
    CHECK(mcp_coefficient({-1.0, 1.0}, 2.0, 0.3) == doctest::Approx(0.3));
    CHECK_THROWS_AS(mcp_coefficient({0.0, 2.0}, 1.0, 1.5), Error);
  }

  TEST_CASE("exact contraction Jacobian") {
    auto e = make_lp(2, 1.5);
    CHECK(exact_contraction_jacobian(*e, e->origin(), Point::vec({0.3, 0.9}), 0.5) ==
          doctest::Approx(0.25));
    auto h = make_hyperbolic();
    CHECK(exact_contraction_jacobian(*h, h->origin(), Point::polar(1.0, 2.0), 0.5) ==
          doctest::Approx(0.2217047209925185).epsilon(1e-13));
    CHECK(exact_contraction_jacobian(*h, Point::polar(0.3, 1.0), Point::polar(1.0, 2.0), 1.0) ==
          doctest::Approx(1.0));
    // one-dimensional Hausdorff measure scales by t
    CHECK(exact_contraction_jacobian(*fixture::tree(), Point::tree(0, 0.0), Point::tree(0, 0.5),
                                     0.5) == 0.5);
    CHECK_THROWS_AS(exact_contraction_jacobian(*e, e->origin(), Point::vec({1, 0}), 1.5), Error);
  }

  TEST_CASE("mcp audit examples") {
    RandomStream rng(fixture::kSeed, 50);
    auto e = make_lp(2, 2.0);
    auto r = mcp_audit(*e, e->origin(), RegionSpec::ball(e->origin(), 1.0), {0.0, 2.0}, {},
                       samples(10000, {0.5}), rng);
    CHECK(r.pass);
    CHECK(r.series.at("ratio")[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(std::abs(r.series.at("margin")[0]) <= 1e-12);

    auto h = make_hyperbolic();
    auto rh = mcp_audit(*h, h->origin(), RegionSpec::ball(h->origin(), 1.0), {-1.0, 2.0}, {},
                        samples(100000), rng);
    CHECK(rh.pass);
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(std::abs(rh.series.at("margin")[i]) <= 3 * rh.series.at("sigma")[i] + 1e-12);

    // annulus 2 <= d <= 3, t = 0.5: the deficit integrates to
    // 2 pi [(cosh 1.5 - cosh 1) - 0.25 (cosh 3 - cosh 2)]
    auto ra = mcp_audit(*h, h->origin(), RegionSpec::annulus(h->origin(), 2.0, 3.0), {0.0, 2.0}, {},
                        samples(100000, {0.5}), rng);
    CHECK_FALSE(ra.pass);
    const double deficit = 2 * kPi * ((std::cosh(1.5) - std::cosh(1.0)) -
                                      0.25 * (std::cosh(3.0) - std::cosh(2.0)));
    CHECK(ra.series.at("margin")[0] < -3 * ra.series.at("sigma")[0]);
    CHECK(std::abs(ra.series.at("margin")[0] - deficit) <= 3 * ra.series.at("sigma")[0]);
  }

  TEST_CASE("mcp audit rejects bad parameters") {
    RandomStream rng(fixture::kSeed, 51);
    auto e = make_lp(2, 2.0);
    const auto A = RegionSpec::ball(e->origin(), 1.0);
    CHECK_THROWS_AS(mcp_audit(*e, e->origin(), A, {1.0, 2.0}, {}, samples(100), rng), Error);
    CHECK_THROWS_AS(mcp_audit(*e, e->origin(), A, {0.0, 2.0}, {}, samples(100, {}), rng), Error);
    CHECK_THROWS_AS(mcp_audit(*e, e->origin(), A, {0.0, 2.0}, {1.5}, samples(100), rng), Error);
  }

  TEST_CASE("bishop-gromov profiles") {
    RandomStream rng(fixture::kSeed, 52);
    auto e = make_lp(2, 2.0);
    auto be = bishop_gromov_profile(*e, e->origin(), {0.0, 2.0}, {0.5, 1, 2, 3}, 20000, rng);
    CHECK(be.monotone);
    for (double v : be.ratios) CHECK(v == doctest::Approx(kPi));

    auto h = make_hyperbolic();
    auto b0 = bishop_gromov_profile(*h, h->origin(), {0.0, 2.0}, {1, 2, 3}, 20000, rng);
    CHECK_FALSE(b0.monotone);
    // frozen: 2 pi (cosh r - 1) / r^2 at r = 1, 2, 3
    CHECK(b0.ratios[0] == doctest::Approx(3.4122762652849023));
    CHECK(b0.ratios[1] == doctest::Approx(4.338846845442859));
    CHECK(b0.ratios[2] == doctest::Approx(6.330422291371287));

    auto b1 = bishop_gromov_profile(*h, h->origin(), {-1.0, 2.0}, {0.5, 1, 2, 3}, 20000, rng);
    CHECK(b1.monotone);
    for (double v : b1.ratios) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("density profiles") {
    RandomStream rng(fixture::kSeed, 53);
    const std::vector<double> radii{1.0, 0.5, 0.1, 0.01, 1e-3, 1e-4};
    auto e = make_lp(2, 2.0);
    auto de = density_profile(*e, e->origin(), 2.0, radii, 20000, rng);
    CHECK(de.verdict == Collapse::NonCollapsed);
    CHECK(de.liminf == doctest::Approx(kPi));
    CHECK(de.limsup == doctest::Approx(kPi));
    auto h = make_hyperbolic();
    auto d2 = density_profile(*h, h->origin(), 2.0, radii, 20000, rng);
    CHECK(d2.verdict == Collapse::NonCollapsed);
    CHECK(d2.values.back() == doctest::Approx(kPi).epsilon(1e-6));
    auto d3 = density_profile(*h, h->origin(), 3.0, radii, 20000, rng);
    CHECK(d3.verdict == Collapse::Divergent);
    // 2 pi (cosh r - 1) / r^3 ~ pi / r
    CHECK(d3.values.back() * 1e-4 == doctest::Approx(kPi).epsilon(1e-6));
    auto d1 = density_profile(*h, h->origin(), 1.0, radii, 20000, rng);
    CHECK(d1.verdict == Collapse::Collapsed);
  }

  TEST_CASE("hyperbolic ball certificate") {
    auto a = hyperbolic_ball_mcp_certificate(0.5, 2.5);
    CHECK(a.pass);
    CHECK(a.worst >= 0.0);
    CHECK(0.25 <= (2.5 - 1) * (2.5 - 2));
    auto b = hyperbolic_ball_mcp_certificate(0.5, 2.0);
    CHECK_FALSE(b.pass);
    // sinh is convex, so sinh(t r) < t sinh(r) strictly inside (0, 1)
    CHECK(std::sinh(b.witness_t * b.witness_r) < b.witness_t * std::sinh(b.witness_r));
    CHECK(hyperbolic_ball_mcp_certificate(0.1, 3.0).pass);
    CHECK_THROWS_AS(hyperbolic_ball_mcp_certificate(-1.0, 3.0), Error);
  }

  TEST_CASE("dimension thresholds") {
    RandomStream rng(fixture::kSeed, 54);
    ThresholdOptions o;
    o.tol = 0.05;
    auto e = make_lp(2, 2.0);
    auto te = mcp_dimension_threshold(*e, e->origin(), 1.0, 1.5, 3.0, o, rng);
    CHECK(std::abs(te.n_star - 2.0) <= 0.05);
    auto h = make_hyperbolic();
    auto th = mcp_dimension_threshold(*h, h->origin(), 0.5, 1.5, 2.5, o, rng);
    CHECK(th.n_star > 2.0);
    CHECK(th.n_star <= 2.5);
    auto t2 = mcp_dimension_threshold(*h, h->origin(), 2.0, 3.0, 8.0, o, rng);
    CHECK(t2.n_star > 3.0);
    CHECK_FALSE(hyperbolic_ball_mcp_certificate(2.0, 3.0).pass);
    CHECK_THROWS_AS(mcp_dimension_threshold(*h, h->origin(), 0.5, 2.5, 3.0, o, rng), Error);
  }

  TEST_CASE("ball homogeneity") {
    RandomStream rng(fixture::kSeed, 55);
    auto l15 = make_lp(2, 1.5);
    std::vector<Point> centers{Point::vec({0, 0}), Point::vec({3, 1}), Point::vec({-2, 5}),
                               Point::vec({10, -4}), Point::vec({0.5, 0.5})};
    auto f = ball_homogeneity_audit(*l15, centers, {0.5, 1.0, 2.0}, 400000, rng);
    CHECK(std::abs(f.n - 2.0) <= 0.02);
    CHECK(f.residual <= 2 * f.pooled_error);
    CHECK(f.translation_pass);
    CHECK(f.power_law_pass);

    auto h = make_hyperbolic();
    auto fh = ball_homogeneity_audit(*h, {Point::polar(0, 0), Point::polar(1, 0)}, {0.5, 1.0},
                                     400000, rng);
    CHECK(fh.translation_pass);
    CHECK_FALSE(fh.power_law_pass);

    auto one = ball_homogeneity_audit(*l15, {Point::vec({0, 0})}, {1.0}, 10000, rng);
    CHECK(one.underdetermined);
    CHECK(one.residual == 0.0);
  }

  TEST_CASE("gaussian potential hessian") {
    // radial geodesic through the origin: V(s) = s^2
    CHECK(potential_second_difference(Point::polar(1.0, 0.3), 0.0, 1e-3) ==
          doctest::Approx(2.0).epsilon(1e-6));
    // circular direction at r = 1: 2 r coth(r); frozen 2 coth(1) at 30 digits
    CHECK(potential_second_difference(Point::polar(1.0, 0.3), kPi / 2, 1e-3) ==
          doctest::Approx(2.6260705709986626).epsilon(1e-6));
    RandomStream rng(fixture::kSeed, 56);
    auto r = gaussian_cd_hessian_audit(1000, 1e-3, 1e-4, rng);
    CHECK(r.pass);
    CHECK(r.metrics.at("min_second_difference") >= 2.0 - 1e-4);
  }

  TEST_CASE("csv exports") {
    RandomStream rng(fixture::kSeed, 57);
    auto e = make_lp(2, 2.0);
    auto be = bishop_gromov_profile(*e, e->origin(), {0.0, 2.0}, {0.5, 1}, 1000, rng);
    const auto csv = to_csv(be);
    CHECK(csv.rfind("r,ratio,sigma\n", 0) == 0);
  }
}

TEST_SUITE("property") {
  TEST_CASE("coefficient continuity at K -> 0") {
    for (double N : {1.0, 1.5, 2.0, 3.0, 5.0})
      for (double t : {0.01, 0.1, 0.25, 0.5, 0.75, 0.99, 1.0})
        for (double d : {0.0, 1e-6, 0.1, 1.0, 5.0, 10.0})
          CHECK_MESSAGE(std::abs(mcp_coefficient({-1e-9, N}, d, t) - std::pow(t, N)) <= 1e-6,
                        "N=" << N << " t=" << t << " d=" << d);
  }

  TEST_CASE("Monte Carlo contraction ratio matches the integrated Jacobian") {
    RandomStream rng(fixture::kSeed, 60);
    const std::vector<double> ts{0.25, 0.5, 0.75};
    auto h = make_hyperbolic();
    auto r = mcp_audit(*h, h->origin(), RegionSpec::ball(h->origin(), 1.0), {-1.0, 2.0}, {},
                       samples(100000, ts, McpRoute::Counting), rng);
    REQUIRE(r.metrics.at("counting_route") == 1.0);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double sigma = r.series.at("sigma")[i] / r.metrics.at("mass");
      CHECK(std::abs(r.series.at("ratio")[i] - hyperbolic_ball_ratio(ts[i])) <= 3 * sigma);
    }
    for (auto S : {make_lp(2, 2.0), make_lp(2, 1.5), fixture::hexagon()}) {
      auto rn = mcp_audit(*S, S->origin(), RegionSpec::ball(Point::vec({0.3, -0.2}), 1.0),
                          {0.0, 2.0}, {}, samples(100000, ts, McpRoute::Counting), rng);
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const double sigma = rn.series.at("sigma")[i] / rn.metrics.at("mass");
        CHECK(std::abs(rn.series.at("ratio")[i] - ts[i] * ts[i]) <= 3 * sigma);
      }
    }
  }

  TEST_CASE("norms satisfy MCP(0, n) with equality") {
    RandomStream rng(fixture::kSeed, 61);
    for (const auto& m : fixture::all_models()) {
      const Space& S = *m.space;
      if (S.family() != Family::Normed || S.boundary_distance(S.origin()) != kInf) continue;
      const double n = S.dimension();
      for (auto A : {RegionSpec::ball(S.origin(), 1.0),
                     RegionSpec::annulus(S.origin(), 0.5, 1.5)}) {
        auto r = mcp_audit(S, S.origin(), A, {0.0, n}, {}, samples(20000), rng);
        CHECK_MESSAGE(r.pass, m.name);
        for (std::size_t i = 0; i < 3; ++i)
          CHECK_MESSAGE(std::abs(r.series.at("margin")[i]) <= 3 * r.series.at("sigma")[i] + 1e-12,
                        m.name);
      }
    }
  }

  TEST_CASE("MCP on nested balls implies Bishop-Gromov") {
    RandomStream rng(fixture::kSeed, 62);
    struct Case {
      SpacePtr space;
      double N;
    };
    const std::vector<double> radii{0.25, 0.5, 1.0};
    std::vector<Case> cases{{make_lp(2, 2.0), 2.0}, {make_lp(2, 1.5), 2.0},
                            {fixture::hexagon(), 2.0}, {make_hyperbolic(), 2.0},
                            {make_hyperbolic(), 3.0}, {make_lp(3, 3.0), 3.0}};
    int implications = 0;
    for (const auto& c : cases) {
      const Space& S = *c.space;
      bool all = true;
      for (double r : radii)
        all &= mcp_audit(S, S.origin(), RegionSpec::ball(S.origin(), r), {0.0, c.N}, {},
                         samples(20000), rng)
                   .pass;
      if (!all) continue;
      ++implications;
      auto bg = bishop_gromov_profile(S, S.origin(), {0.0, c.N}, radii, 20000, rng);
      CHECK_MESSAGE(bg.monotone, S.describe() << " N=" << c.N);
    }
    CHECK(implications >= 4);
  }

  TEST_CASE("certificate agrees with the audit") {
    RandomStream rng(fixture::kSeed, 63);
    auto h = make_hyperbolic();
    std::vector<double> ts;
    for (int i = 1; i < 20; ++i) ts.push_back(i / 20.0);
    for (auto [R, N] : {std::pair{0.5, 2.5}, std::pair{0.5, 2.0}, std::pair{0.1, 3.0}}) {
      const bool cert = hyperbolic_ball_mcp_certificate(R, N).pass;
      auto a = mcp_audit(*h, h->origin(), RegionSpec::ball(h->origin(), R), {0.0, N}, {},
                         samples(100000, ts), rng);
      CHECK_MESSAGE(cert == a.pass, "R=" << R << " N=" << N);
    }
  }
}
