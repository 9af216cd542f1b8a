#include <algorithm>
#include <cmath>
#include <cstdint>

#include "mmlab/tangent.hpp"

namespace mmlab {

const char* to_string(GHMethod m) {
  return m == GHMethod::Exact ? "exact" : "heuristic";
}

double correspondence_distortion(const FiniteMetric& X, const FiniteMetric& Y,
                                 const std::vector<std::size_t>& f,
                                 const std::vector<std::size_t>& g) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t x = 0; x < f.size(); ++x) pairs.emplace_back(x, f[x]);
  for (std::size_t y = 0; y < g.size(); ++y) pairs.emplace_back(g[y], y);
  double dis = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    for (std::size_t j = i + 1; j < pairs.size(); ++j)
      dis = std::max(dis, std::abs(X(pairs[i].first, pairs[j].first) -
                                   Y(pairs[i].second, pairs[j].second)));
  return dis;
}

namespace {

/// Backtracking search for a pointed correspondence of distortion <= delta.
/// Pairs are indexed a * ny + b; at most 64 of them.
class CorrespondenceSearch {
 public:
  CorrespondenceSearch(const FiniteMetric& X, const FiniteMetric& Y) : X_(X), Y_(Y) {
    nx_ = X.size();
    ny_ = Y.size();
    for (std::size_t x = 0; x < nx_; ++x)
      if (x != X.base()) vars_.push_back({true, x});
    for (std::size_t y = 0; y < ny_; ++y)
      if (y != Y.base()) vars_.push_back({false, y});
    for (const auto& v : vars_) {
      std::uint64_t dom = 0;
      if (v.is_f)
        for (std::size_t y = 0; y < ny_; ++y) dom |= bit(v.index, y);
      else
        for (std::size_t x = 0; x < nx_; ++x) dom |= bit(x, v.index);
      domains_.push_back(dom);
    }
  }

  bool feasible(double delta) {
    const std::size_t P = nx_ * ny_;
    compat_.assign(P, 0);
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t q = 0; q < P; ++q) {
        const double diff = std::abs(X_(p / ny_, q / ny_) - Y_(p % ny_, q % ny_));
        if (diff <= delta) compat_[p] |= std::uint64_t{1} << q;
      }
    const std::size_t root = X_.base() * ny_ + Y_.base();
    chosen_.assign(vars_.size(), 0);
    return search(0, compat_[root]);
  }

  std::vector<std::pair<std::size_t, std::size_t>> solution() const {
    std::vector<std::pair<std::size_t, std::size_t>> out{{X_.base(), Y_.base()}};
    for (std::size_t p : chosen_) out.emplace_back(p / ny_, p % ny_);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  struct Var {
    bool is_f;
    std::size_t index;
  };

  std::uint64_t bit(std::size_t x, std::size_t y) const {
    return std::uint64_t{1} << (x * ny_ + y);
  }

  bool search(std::size_t k, std::uint64_t allowed) {
    if (k == vars_.size()) return true;
    // forward check: every open variable keeps a value
    for (std::size_t j = k; j < vars_.size(); ++j)
      if (!(allowed & domains_[j])) return false;
    std::uint64_t cand = allowed & domains_[k];
    while (cand) {
      const int p = __builtin_ctzll(cand);
      cand &= cand - 1;
      chosen_[k] = static_cast<std::size_t>(p);
      if (search(k + 1, allowed & compat_[p])) return true;
    }
    return false;
  }

  const FiniteMetric& X_;
  const FiniteMetric& Y_;
  std::size_t nx_ = 0, ny_ = 0;
  std::vector<Var> vars_;
  std::vector<std::uint64_t> domains_;
  std::vector<std::uint64_t> compat_;
  std::vector<std::size_t> chosen_;
};

double radial_hausdorff(const FiniteMetric& X, const FiniteMetric& Y) {
  auto one_side = [](const FiniteMetric& A, const FiniteMetric& B) {
    double h = 0.0;
    for (std::size_t a = 0; a < A.size(); ++a) {
      double best = kInf;
      for (std::size_t b = 0; b < B.size(); ++b)
        best = std::min(best, std::abs(A(A.base(), a) - B(B.base(), b)));
      h = std::max(h, best);
    }
    return h;
  };
  return std::max(one_side(X, Y), one_side(Y, X));
}

double local_search(const FiniteMetric& X, const FiniteMetric& Y, std::vector<std::size_t>& f,
                    std::vector<std::size_t>& g) {
  double best = correspondence_distortion(X, Y, f, g);
  for (int sweep = 0; sweep < 50; ++sweep) {
    bool improved = false;
    for (std::size_t x = 0; x < f.size(); ++x) {
      if (x == X.base()) continue;
      for (std::size_t y = 0; y < Y.size(); ++y) {
        const std::size_t old = f[x];
        if (y == old) continue;
        f[x] = y;
        const double d = correspondence_distortion(X, Y, f, g);
        if (d < best) {
          best = d;
          improved = true;
        } else {
          f[x] = old;
        }
      }
    }
    for (std::size_t y = 0; y < g.size(); ++y) {
      if (y == Y.base()) continue;
      for (std::size_t x = 0; x < X.size(); ++x) {
        const std::size_t old = g[y];
        if (x == old) continue;
        g[y] = x;
        const double d = correspondence_distortion(X, Y, f, g);
        if (d < best) {
          best = d;
          improved = true;
        } else {
          g[y] = old;
        }
      }
    }
    if (!improved) break;
  }
  return best;
}

}  // namespace

GHBound gh_bounds(const FiniteMetric& X, const FiniteMetric& Y, std::size_t cap) {
  if (X.size() == 0 || Y.size() == 0) throw Error(ErrorKind::InvalidParams, "empty metric");
  GHBound out;
  const bool exact = X.size() <= cap && Y.size() <= cap && X.size() * Y.size() <= 64;

  if (exact) {
    std::vector<double> cand{0.0};
    for (std::size_t a = 0; a < X.size(); ++a)
      for (std::size_t c = a + 1; c < X.size(); ++c)
        for (std::size_t b = 0; b < Y.size(); ++b)
          for (std::size_t d = 0; d < Y.size(); ++d) cand.push_back(std::abs(X(a, c) - Y(b, d)));
    for (std::size_t b = 0; b < Y.size(); ++b)
      for (std::size_t d = b + 1; d < Y.size(); ++d) cand.push_back(Y(b, d));
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    CorrespondenceSearch search(X, Y);
    std::size_t lo = 0, hi = cand.size() - 1;  // cand[hi] is always feasible
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (search.feasible(cand[mid]))
        hi = mid;
      else
        lo = mid + 1;
    }
    search.feasible(cand[hi]);
    out.method = GHMethod::Exact;
    out.lower = out.upper = 0.5 * cand[hi];
    out.correspondence = search.solution();
    return out;
  }

  out.method = GHMethod::Heuristic;
  double best = kInf;
  std::vector<std::size_t> f(X.size()), g(Y.size());
  if (X.size() == Y.size() && X.base() == Y.base()) {
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = g[i] = i;
    best = std::min(best, local_search(X, Y, f, g));
  }
  // radial matching: pair points whose distances to the base agree best
  for (std::size_t x = 0; x < X.size(); ++x) {
    std::size_t arg = Y.base();
    double bd = kInf;
    for (std::size_t y = 0; y < Y.size(); ++y) {
      const double d = std::abs(X(X.base(), x) - Y(Y.base(), y));
      if (d < bd) bd = d, arg = y;
    }
    f[x] = x == X.base() ? Y.base() : arg;
  }
  for (std::size_t y = 0; y < Y.size(); ++y) {
    std::size_t arg = X.base();
    double bd = kInf;
    for (std::size_t x = 0; x < X.size(); ++x) {
      const double d = std::abs(X(X.base(), x) - Y(Y.base(), y));
      if (d < bd) bd = d, arg = x;
    }
    g[y] = y == Y.base() ? X.base() : arg;
  }
  best = std::min(best, local_search(X, Y, f, g));
  out.upper = 0.5 * best;
  out.lower = std::min(out.upper, std::max(0.5 * std::abs(X.diameter() - Y.diameter()),
                                           0.5 * radial_hausdorff(X, Y)));
  return out;
}

}  // namespace mmlab
