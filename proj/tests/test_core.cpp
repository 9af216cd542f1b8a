#include <cmath>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace mmlab;

TEST_SUITE("core") {
  TEST_CASE("distance examples") {
    auto e = make_lp(2, 2.0);
    CHECK(distance(*e, Point::vec({0, 0}), Point::vec({3, 4})) == doctest::Approx(5.0).epsilon(1e-15));
    auto h = make_hyperbolic();
    CHECK(distance(*h, Point::polar(1, 0), Point::polar(1, kPi)) ==
          doctest::Approx(2.0).epsilon(1e-14));
    auto linf = make_lp(2, kInf);
    CHECK(distance(*linf, Point::vec({0, 0}), Point::vec({1, 2})) == 2.0);
  }

  TEST_CASE("distance rejects foreign and malformed points") {
    auto e = make_lp(2, 2.0);
    CHECK_THROWS_AS(distance(*e, Point::polar(1, 0), Point::vec({0, 0})), Error);
    CHECK_THROWS_AS(distance(*e, Point::vec({0, 0, 0}), Point::vec({0, 0})), Error);
    CHECK_THROWS_AS(distance(*e, Point::vec({NAN, 0}), Point::vec({0, 0})), Error);
  }

  TEST_CASE("intermediate examples") {
    auto e = make_lp(2, 2.0);
    auto q = intermediate(*e, Point::vec({0, 0}), Point::vec({2, 0}), 0.25);
    CHECK(q[0] == doctest::Approx(0.5));
    CHECK(q[1] == doctest::Approx(0.0));
    auto h = make_hyperbolic();
    auto m = intermediate(*h, h->origin(), Point::polar(1, 0), 0.5);
    CHECK(m[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(m[1]) < 1e-14);
    for (const auto& model : fixture::all_models()) {
      RandomStream rng(fixture::kSeed, 1);
      auto pts = model.space->sample_ball(model.space->origin(), model.radius, 2, rng);
      auto end = intermediate(*model.space, pts[0], pts[1], 1.0);
      CHECK_MESSAGE(distance(*model.space, end, pts[1]) <= 1e-12 * (1 + model.radius), model.name);
    }
    CHECK_THROWS_AS(intermediate(*e, Point::vec({0, 0}), Point::vec({1, 0}), 1.5), Error);
  }

  TEST_CASE("contract_set examples") {
    auto e = make_lp(2, 2.0);
    std::vector<Point> pts{Point::vec({1, 0}), Point::vec({0, 1})};
    auto half = contract_set(*e, e->origin(), 0.5, pts);
    CHECK(half[0][0] == doctest::Approx(0.5));
    CHECK(half[1][1] == doctest::Approx(0.5));
    auto same = contract_set(*e, e->origin(), 1.0, pts);
    CHECK(same[0] == pts[0]);
    CHECK(same[1] == pts[1]);
    auto zero = contract_set(*e, e->origin(), 0.0, pts);
    for (const auto& z : zero) CHECK(distance(*e, z, e->origin()) == 0.0);
  }

  TEST_CASE("ball_mass examples") {
    RandomStream rng(fixture::kSeed);
    auto e = make_lp(2, 2.0);
    auto m = ball_mass(*e, e->origin(), 1.0, 1000, rng);
    CHECK(m.method == MassMethod::Exact);
    CHECK(m.value == doctest::Approx(kPi).epsilon(1e-14));
    auto h = make_hyperbolic();
    // frozen: 2 pi (cosh 1 - 1) evaluated in long double
    CHECK(ball_mass(*h, h->origin(), 1.0, 1000, rng).value ==
          doctest::Approx(3.4122762652849023).epsilon(1e-14));
    auto l1 = make_lp(2, 1.0);
    CHECK(ball_mass(*l1, l1->origin(), 1.0, 1000, rng).value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(ball_mass(*h, h->origin(), 100.0, 1000, rng), Error);
  }

  TEST_CASE("sample_ball examples") {
    RandomStream rng(fixture::kSeed, 2);
    auto e = make_lp(2, 2.0);
    auto pts = sample_ball(*e, e->origin(), 1.0, 100000, rng);
    double mx = 0, my = 0;
    for (const auto& p : pts) {
      mx += p[0];
      my += p[1];
      CHECK_LE(distance(*e, p, e->origin()), 1.0);
    }
    CHECK(std::abs(mx / pts.size()) < 0.01);
    CHECK(std::abs(my / pts.size()) < 0.01);

    auto h = make_hyperbolic();
    auto hp = sample_ball(*h, h->origin(), 1.0, 100000, rng);
    double inside = 0;
    for (const auto& p : hp) inside += p[0] <= 0.5 ? 1 : 0;
    // frozen: (cosh 0.5 - 1) / (cosh 1 - 1)
    CHECK(inside / hp.size() == doctest::Approx(0.2350037122015945).epsilon(0.01 / 0.235));
    CHECK(sample_ball(*h, h->origin(), 1.0, 0, rng).empty());
    CHECK_THROWS_AS(sample_ball(*h, h->origin(), 0.0, 5, rng), Error);
  }

  TEST_CASE("random streams are replayable and substreams independent") {
    RandomStream a(7, 3), b(7, 3);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    RandomStream root(7);
    auto s1 = root.substream(1), s2 = root.substream(2);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) seen.insert(s1.next_u64());
    int shared = 0;
    for (int i = 0; i < 1000; ++i) shared += seen.count(s2.next_u64()) ? 1 : 0;
    CHECK(shared == 0);
    RandomStream u(11);
    double mean = 0;
    for (int i = 0; i < 100000; ++i) {
      const double x = u.uniform();
      REQUIRE(x >= 0.0);
      REQUIRE(x < 1.0);
      mean += x;
    }
    CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));
  }

  TEST_CASE("comparison params validation") {
    CHECK_NOTHROW((ComparisonParams{-1.0, 2.0}.validate()));
    CHECK_THROWS_AS((ComparisonParams{0.5, 2.0}.validate()), Error);
    CHECK_THROWS_AS((ComparisonParams{0.0, 0.5}.validate()), Error);
  }

  TEST_CASE("run_batches keeps batch order") {
    auto out = run_batches<int>(20, 4, [](std::size_t b) { return static_cast<int>(b * b); });
    for (std::size_t b = 0; b < 20; ++b) CHECK(out[b] == static_cast<int>(b * b));
  }
}

TEST_SUITE("property") {
  TEST_CASE("metric axioms on random triples") {
    for (const auto& m : fixture::all_models()) {
      const Space& S = *m.space;
      RandomStream rng(fixture::kSeed, 10);
      auto pts = S.sample_ball(S.origin(), m.radius, 30000, rng);
      double worst = 0.0;
      bool symmetric = true, nonneg = true, zero = true;
      for (std::size_t i = 0; i + 2 < pts.size(); i += 3) {
        const auto &a = pts[i], &b = pts[i + 1], &c = pts[i + 2];
        const double ab = S.distance(a, b), ba = S.distance(b, a);
        const double bc = S.distance(b, c), ac = S.distance(a, c);
        symmetric &= ab == ba;
        nonneg &= ab >= 0 && bc >= 0 && ac >= 0;
        zero &= S.distance(a, a) == 0.0;
        worst = std::min(worst, (ab + bc - ac) / (1.0 + m.radius));
      }
      CHECK_MESSAGE(symmetric, m.name);
      CHECK_MESSAGE(nonneg, m.name);
      CHECK_MESSAGE(zero, m.name);
      CHECK_MESSAGE(worst >= -1e-12, m.name << " worst triangle slack " << worst);
    }
  }

  TEST_CASE("contraction semigroup") {
    for (const auto& m : fixture::all_models()) {
      const Space& S = *m.space;
      RandomStream rng(fixture::kSeed, 11);
      auto pts = S.sample_ball(S.origin(), m.radius, 2000, rng);
      double worst = 0.0;
      for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
        const double s = rng.uniform(), t = rng.uniform();
        const auto& p = pts[i];
        const auto& x = pts[i + 1];
        auto nested = S.intermediate(p, S.intermediate(p, x, s), t);
        auto direct = S.intermediate(p, x, s * t);
        worst = std::max(worst, S.distance(nested, direct));
      }
      CHECK_MESSAGE(worst <= 1e-10 * (1.0 + m.radius), m.name << " worst " << worst);
    }
  }

  TEST_CASE("empirical ball masses match ball_mass") {
    for (const auto& m : fixture::all_models()) {
      const Space& S = *m.space;
      RandomStream rng(fixture::kSeed, 12);
      const Point p = S.origin();
      const double R = m.radius, r = 0.6 * m.radius;
      const auto big = S.ball_mass(p, R, 200000, rng);
      const auto small = S.ball_mass(p, r, 200000, rng);
      const std::size_t n = 40000;
      std::size_t hits = 0;
      for (const auto& q : S.sample_ball(p, R, n, rng)) hits += S.distance(p, q) <= r ? 1 : 0;
      const double f = static_cast<double>(hits) / n;
      const double ratio = small.value / big.value;
      const double se = std::sqrt(ratio * (1 - ratio) / n);
      const double rel_mc = std::hypot(small.std_error / small.value, big.std_error / big.value);
      const double sigma = std::hypot(se, ratio * rel_mc);
      CHECK_MESSAGE(std::abs(f - ratio) <= 3 * sigma, m.name << " f=" << f << " ratio=" << ratio);
    }
  }
}
