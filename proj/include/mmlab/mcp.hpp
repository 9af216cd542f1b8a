#pragma once

#include "mmlab/convexity.hpp"

namespace mmlab {

/// A measurable set A of positive finite mass.
struct RegionSpec {
  enum class Kind { Ball, Annulus, Box, Samples };

  Kind kind = Kind::Ball;
  Point center;
  double inner = 0.0;  ///< annulus inner radius
  double outer = 1.0;  ///< ball radius or annulus outer radius
  std::vector<double> lo, hi;  ///< box corners (normed spaces)
  std::vector<Point> samples;  ///< explicit sample set, equally weighted
  double sample_mass = 0.0;    ///< total mass carried by `samples`

  static RegionSpec ball(Point c, double R);
  static RegionSpec annulus(Point c, double a, double b);
  static RegionSpec box(std::vector<double> lo, std::vector<double> hi);
  static RegionSpec sample_set(std::vector<Point> pts, double mass);

  bool contains(const Space& space, const Point& x) const;
  std::string describe() const;
};

struct AlmostMCPParams {
  double delta = 0.0;  ///< coefficient multiplier is 1 - delta

  void validate() const;
};

/// Comparison coefficient of MCP(K, N) at distance d and time t.
double mcp_coefficient(const ComparisonParams& params, double d, double t);

/// Infinitesimal mass distortion of the t-contraction toward p at x.
double exact_contraction_jacobian(const Space& space, const Point& p, const Point& x, double t);

enum class McpRoute { Auto, Jacobian, Counting };

struct McpOptions {
  std::size_t samples = 20000;
  std::vector<double> t_grid{0.25, 0.5, 0.75};
  McpRoute route = McpRoute::Auto;
  unsigned jobs = 1;
};

/// Checks m(A_t) >= (1 - delta) * integral over A of the comparison
/// coefficient, for each t of the grid, with a one-sided 3 sigma rule.
/// Series "ratio" holds m(A_t)/m(A), "margin" the raw margin and "sigma" its
/// standard error.
AuditReport mcp_audit(const Space& space, const Point& p, const RegionSpec& A,
                      const ComparisonParams& params, const AlmostMCPParams& almost,
                      const McpOptions& opt, const RandomStream& rng);

/// Volume of the radius-r ball in the (K, N) model space; r^N when K = 0.
double comparison_volume(const ComparisonParams& params, double r);

struct BGProfile {
  Point center;
  ComparisonParams params;
  std::vector<double> radii;
  std::vector<double> ratios;
  std::vector<double> errors;
  bool monotone = true;
  double worst_increase = 0.0;  ///< largest increase beyond its 3 sigma band
};

BGProfile bishop_gromov_profile(const Space& space, const Point& p,
                                const ComparisonParams& params, std::vector<double> radii,
                                std::size_t budget, const RandomStream& rng);

enum class Collapse { NonCollapsed, Collapsed, Divergent };
const char* to_string(Collapse c);

struct DensityProfile {
  Point center;
  double exponent = 0.0;
  std::vector<double> radii;
  std::vector<double> values;
  std::vector<double> errors;
  double liminf = 0.0;
  double limsup = 0.0;
  double tail_slope = 0.0;  ///< d log(value) / d log(r) over the tail
  Collapse verdict = Collapse::NonCollapsed;
};

/// Radii must decrease toward `floor`.
DensityProfile density_profile(const Space& space, const Point& p, double n,
                               std::vector<double> radii, std::size_t budget,
                               const RandomStream& rng, double floor = 1e-8);

struct CertificateResult {
  bool pass = true;
  double worst = kInf;  ///< min of sinh(tr) - t^(N-1) sinh(r) over the grid
  double witness_t = 0.0, witness_r = 0.0;
  double max_second_derivative = -kInf;
  bool concavity_sufficient = false;  ///< f'' <= 0 on the whole grid
  std::size_t grid_points = 0;
};

CertificateResult hyperbolic_ball_mcp_certificate(double R, double N, double t_step = 1e-3,
                                                  double r_step = 1e-3);

struct ThresholdOptions {
  McpOptions audit{20000, {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5,
                           0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.99}};
  double tol = 0.01;
};

struct ThresholdResult {
  double n_star = 0.0;
  double lo = 0.0, hi = 0.0;
  int evaluations = 0;
};

/// Minimal N for which MCP(0, N) audits pass on B(p, R) and its outer
/// shell; assumes the verdict is monotone in N.
ThresholdResult mcp_dimension_threshold(const Space& space, const Point& p, double R,
                                        double N_lo, double N_hi, const ThresholdOptions& opt,
                                        const RandomStream& rng);

struct HomogeneityFit {
  double C = 0.0;
  double n = 0.0;
  double residual = 0.0;       ///< max relative deviation from C r^n
  double pooled_error = 0.0;   ///< root-sum-square of relative standard errors
  double translation_spread = 0.0;  ///< max over radii of (max - min) / mean mass
  bool translation_pass = true;
  bool power_law_pass = true;
  bool underdetermined = false;
  std::vector<Point> centers;
  std::vector<double> radii;
  std::vector<double> masses;  ///< row-major: centers x radii
  std::vector<double> errors;
};

/// Fits m(B(x, r)) = C r^n over a window; every mass is estimated by counting
/// points of one shared reference sample.
HomogeneityFit ball_homogeneity_audit(const Space& space, const std::vector<Point>& centers,
                                      const std::vector<double>& radii, std::size_t budget,
                                      const RandomStream& rng);

/// Second differences of V = r^2 along unit-speed geodesics of the
/// hyperbolic plane. Metrics: "min_second_difference" and "min_ricci_witness"
/// (second difference minus one).
AuditReport gaussian_cd_hessian_audit(std::size_t trials, double h, double tol,
                                      const RandomStream& rng, double max_radius = 3.0);

/// Second difference of V along the geodesic through p with local direction phi.
double potential_second_difference(const Point& p, double phi, double h);

std::string to_csv(const BGProfile& p);
std::string to_csv(const DensityProfile& p);
std::string to_csv(const HomogeneityFit& f);

}  // namespace mmlab
