#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mmlab/tangent.hpp"

/// Independent reference formulas shared by the test binaries.
namespace oracle {

/// Hyperbolic law of cosines for points given in polar form, in long double.
inline double hyperbolic_distance(double r1, double t1, double r2, double t2) {
  const long double c = std::cosh((long double)r1) * std::cosh((long double)r2) -
                        std::sinh((long double)r1) * std::sinh((long double)r2) *
                            std::cos((long double)(t1 - t2));
  return static_cast<double>(std::acosh(std::max<long double>(c, 1.0L)));
}

inline double lp_distance(const std::vector<double>& a, const std::vector<double>& b, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(std::abs(a[i] - b[i]), p);
  return std::pow(s, 1.0 / p);
}

/// Distortion of the relation graph(f) union graph(g)^T.
inline double distortion(const mmlab::FiniteMetric& X, const mmlab::FiniteMetric& Y,
                         const std::vector<std::size_t>& f, const std::vector<std::size_t>& g) {
  std::vector<std::pair<std::size_t, std::size_t>> R;
  for (std::size_t i = 0; i < f.size(); ++i) R.emplace_back(i, f[i]);
  for (std::size_t j = 0; j < g.size(); ++j) R.emplace_back(g[j], j);
  double d = 0.0;
  for (const auto& [a, b] : R)
    for (const auto& [c, e] : R) d = std::max(d, std::abs(X(a, c) - Y(b, e)));
  return d;
}

/// Pointed GH distance by enumerating every pair of maps f: X -> Y and
/// g: Y -> X fixing the base points. Every correspondence contains such a
/// pair, so the minimum is exact. Feasible for |X|, |Y| <= 5.
inline double brute_force_gh(const mmlab::FiniteMetric& X, const mmlab::FiniteMetric& Y) {
  const std::size_t n = X.size(), m = Y.size();
  std::vector<std::size_t> f(n, 0), g(m, 0);
  f[X.base()] = Y.base();
  g[Y.base()] = X.base();
  double best = 1e300;
  auto advance = [](std::vector<std::size_t>& v, std::size_t fixed, std::size_t radix) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i == fixed) continue;
      if (++v[i] < radix) return true;
      v[i] = 0;
    }
    return false;
  };
  do {
    std::fill(g.begin(), g.end(), 0);
    g[Y.base()] = X.base();
    do {
      best = std::min(best, distortion(X, Y, f, g));
    } while (advance(g, Y.base(), n));
  } while (advance(f, X.base(), m));
  return best / 2.0;
}

/// Finite metric from a distance matrix given row by row; base point 0.
inline mmlab::FiniteMetric metric(const std::vector<std::vector<double>>& rows) {
  const auto n = rows.size();
  Eigen::MatrixXd d(n, n);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) {
    labels.push_back("p" + std::to_string(i));
    for (std::size_t j = 0; j < n; ++j) d(i, j) = rows[i][j];
  }
  return mmlab::FiniteMetric(labels, d, 0);
}

}  // namespace oracle
