#pragma once

#include <cmath>

#include <string>
#include <vector>

#include "mmlab/spaces.hpp"

namespace fixture {

inline constexpr std::uint64_t kSeed = MMLAB_TEST_SEED;

struct Model {
  std::string name;
  mmlab::SpacePtr space;
  double radius;  ///< sampling window around the origin
};

inline mmlab::SpacePtr hexagon() {
  std::vector<std::array<double, 2>> v;
  for (int k = 0; k < 6; ++k) v.push_back({std::cos(k * mmlab::kPi / 3), std::sin(k * mmlab::kPi / 3)});
  return mmlab::make_normed({2, mmlab::PolygonNorm{v}});
}

inline mmlab::SpacePtr tree() {
  return mmlab::make_glued_intervals(mmlab::GluedIntervalSpec::power_law(4));
}

/// Every family and wrapper once.
inline std::vector<Model> all_models() {
  using namespace mmlab;
  return {
      {"l2", make_lp(2, 2.0), 2.0},
      {"l1.5", make_lp(2, 1.5), 2.0},
      {"l3", make_lp(2, 3.0), 2.0},
      {"l1", make_lp(2, 1.0), 2.0},
      {"linf", make_lp(2, kInf), 2.0},
      {"l2^3", make_lp(3, 2.0), 2.0},
      {"wlp", make_normed({2, WeightedPNorm{3.0, {1.0, 4.0}}}), 2.0},
      {"hexagon", hexagon(), 2.0},
      {"hyperbolic", make_hyperbolic(), 2.0},
      {"tree", tree(), 0.5},
      {"half-plane", make_convex_subset(make_lp(2, 2.0), HalfSpaceRegion{{1.0, 0.0}, -0.5}), 2.0},
      {"hyperbolic ball",
       make_convex_subset(make_hyperbolic(), BallRegion{Point::polar(0.3, 1.0), 1.5}), 1.0},
      {"weighted", make_weighted(make_hyperbolic(), {1.0}), 2.0},
      {"rescaled", rescale(make_hyperbolic(), 10.0, Point::polar(0.0, 0.0)), 10.0},
  };
}

}  // namespace fixture
