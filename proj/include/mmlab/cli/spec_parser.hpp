#pragma once

#include <string>

#include "mmlab/spaces.hpp"

namespace mmlab::cli {

/// Builds a space from a spec string such as
///   lp(2, p=1.5)          wlp(2, p=3, w=[1, 4])     polygon(n=6)
///   polygon([[1,0],[0,1],[-1,0],[0,-1]])            hyperbolic
///   glued(eps=10^-i^2, delta=10^-i^2-i, depth=4)
///   subset(lp(2), halfspace(normal=[1,0], offset=0))
///   subset(hyperbolic, ball(center=polar(0,0), radius=1))
///   weighted(hyperbolic, c=1)   rescale(lp(2), lambda=10)
/// Throws Error(InvalidSpec) on malformed input.
SpacePtr parse_space(const std::string& text);

/// Points: [x, y, ...] (normed), polar(r, theta), tree(branch, offset) or
/// base(offset) (glued trees).
Point parse_point(const std::string& text);

/// Multi-line summary: family, dimension, measure kind, caps, Jacobian.
std::string describe_space(const Space& space);

}  // namespace mmlab::cli
