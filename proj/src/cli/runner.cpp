#include "mmlab/cli/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "mmlab/cli/spec_parser.hpp"
#include "mmlab/convexity.hpp"
#include "mmlab/mcp.hpp"
#include "mmlab/tangent.hpp"

namespace mmlab::cli {

// ---------------------------------------------------------------------------
// Expectations
// ---------------------------------------------------------------------------

std::string Expectations::expected(const std::string& space_class, const std::string& audit,
                                   double K, double N, int n) const {
  auto it = table.find(space_class + "/" + audit);
  if (it == table.end()) return "any";
  const std::string& rule = it->second;
  if (rule == "pass-if N>=n") return N >= n ? "pass" : "fail";
  if (rule == "pass-if K<=1-N") return K <= 1.0 - N ? "pass" : "fail";
  return rule;
}

Expectations Expectations::builtin() {
  Expectations e;
  e.version = "1";
  auto& t = e.table;
  for (const std::string cls : {"normed-strict", "normed-flat"}) {
    t[cls + "/busemann"] = "pass";
    t[cls + "/concavity"] = "pass";
    t[cls + "/cone-type"] = "pass";
    t[cls + "/uniqueness"] = cls == "normed-strict" ? "pass" : "fail";
    t[cls + "/almost-extendability"] = "pass";
    t[cls + "/mcp"] = "pass-if N>=n";
    t[cls + "/bishop-gromov"] = "pass-if N>=n";
    t[cls + "/density"] = "pass";
    t[cls + "/tangent-uniqueness"] = "pass";
    t[cls + "/norm-recover"] = "pass";
    t[cls + "/exp-almost-iso"] = "pass";
  }
  t["hyperbolic/busemann"] = "pass";
  t["hyperbolic/concavity"] = "fail";
  t["hyperbolic/cone-type"] = "fail";
  t["hyperbolic/uniqueness"] = "pass";
  t["hyperbolic/almost-extendability"] = "pass";
  t["hyperbolic/mcp"] = "pass-if K<=1-N";
  t["hyperbolic/bishop-gromov"] = "pass-if K<=1-N";
  t["hyperbolic/density"] = "pass";
  t["hyperbolic/tangent-uniqueness"] = "pass";
  t["hyperbolic/norm-recover"] = "pass";
  t["hyperbolic/exp-almost-iso"] = "pass";
  t["weighted/busemann"] = "pass";
  t["weighted/concavity"] = "fail";
  t["weighted/cone-type"] = "fail";
  t["weighted/uniqueness"] = "pass";
  t["tree/busemann"] = "pass";
  t["tree/concavity"] = "fail";
  t["tree/cone-type"] = "fail";
  t["tree/uniqueness"] = "pass";
  t["tree/mcp"] = "pass-if N>=n";
  t["tree/density"] = "pass";
  t["tree/tangent-uniqueness"] = "fail";
  t["tree/norm-recover"] = "fail";
  t["rigidity/hom"] = "pass";
  t["rigidity/trans"] = "pass";
  t["rigidity/cone"] = "pass";
  t["rigidity/noncol"] = "pass";
  t["rigidity/hyp-ball"] = "pass";
  t["rigidity/gauss-cd"] = "pass";
  t["rigidity/glued-tangent"] = "fail";
  t["rigidity/exp-almost-iso"] = "pass";
  return e;
}

Expectations Expectations::from_json(const std::string& text) {
  Expectations e;
  try {
    const auto j = Json::parse(text);
    e.version = j.at("version").get<std::string>();
    for (const auto& [k, v] : j.at("expectations").items()) {
      const auto rule = v.get<std::string>();
      if (rule != "pass" && rule != "fail" && rule != "any" && rule != "pass-if N>=n" &&
          rule != "pass-if K<=1-N")
        throw Error(ErrorKind::InvalidSpec, "unknown expectation rule '" + rule + "'");
      e.table[k] = rule;
    }
  } catch (const Json::exception& ex) {
    throw Error(ErrorKind::InvalidSpec, std::string("bad expectations file: ") + ex.what());
  }
  return e;
}

Json Expectations::to_json() const { return Json{{"version", version}, {"expectations", table}}; }

std::string space_class(const Space& space) {
  if (auto r = dynamic_cast<const RescaledSpace*>(&space)) return space_class(*r->base());
  if (dynamic_cast<const ConvexSubset*>(&space)) return "subset";
  if (dynamic_cast<const WeightedSpace*>(&space)) return "weighted";
  if (auto n = dynamic_cast<const NormedSpace*>(&space))
    return n->strictly_convex() ? "normed-strict" : "normed-flat";
  if (space.family() == Family::Hyperbolic) return "hyperbolic";
  return "tree";
}

std::string list_suites() {
  return "convexity: busemann concavity cone-type uniqueness almost-extendability\n"
         "mcp:       mcp bishop-gromov density\n"
         "tangent:   tangent-uniqueness norm-recover exp-almost-iso\n"
         "rigidity:  hom trans cone noncol hyp-ball gauss-cd glued-tangent exp-almost-iso\n"
         "all:       every suite above\n";
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

namespace {

struct Outcome {
  bool pass = false;
  Json details = Json::object();
  std::vector<Profile> profiles;
};

using Pipeline = std::function<Outcome(const RandomStream&)>;

struct Task {
  std::string suite, audit, concept_tag, space, expectation_key;
  Pipeline run;
};

/// FNV-1a, so substream ids do not depend on the standard library.
std::uint64_t stable_id(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

/// Two points for the geodesic uniqueness probe.
std::pair<Point, Point> probe_pair(const Space& space, const Point& p, double R) {
  // direction with slope 1/2 lies inside a face of the l1, l_inf and
  // hexagonal unit balls, where shortest paths branch
  const double theta = std::atan2(0.5, 1.0);
  auto y = space.chart_point(p, theta, R);
  if (!y) throw Error(ErrorKind::DomainExceeded, "probe direction leaves the space");
  return {p, *y};
}

std::vector<Task> config_tasks(const ExperimentConfig& c, Suite suite) {
  std::vector<Task> tasks;
  const Space& S = *c.space;
  const Point p = c.point;
  const std::string sp = c.space_spec;
  const double R = c.radii.back();
  const bool tree = S.family() == Family::Tree;
  AuditOptions aopt;
  aopt.trials = c.trials;
  aopt.tol = c.tol;
  aopt.jobs = c.jobs;

  auto add = [&](const char* s, const char* audit, const char* concept_tag, Pipeline fn) {
    tasks.push_back({s, audit, concept_tag, sp, audit, std::move(fn)});
  };

  if (suite == Suite::Convexity || suite == Suite::All) {
    add("convexity", "busemann", "busemann-convexity", [=, &S](const RandomStream& rng) {
      auto r = busemann_convexity_audit(S, SampleBall{p, R}, aopt, rng);
      return Outcome{r.pass, audit_json(r), {}};
    });
    add("convexity", "concavity", "busemann-concavity", [=, &S](const RandomStream& rng) {
      auto r = concavity_audit(S, p, SampleBall{p, R}, aopt, rng);
      return Outcome{r.pass, audit_json(r), {}};
    });
    add("convexity", "cone-type", "cone-type", [=, &S](const RandomStream& rng) {
      auto r = cone_type_audit(S, p, SampleBall{p, R}, aopt, rng);
      return Outcome{r.pass, audit_json(r), {}};
    });
    add("convexity", "uniqueness", "unique-geodesics", [=, &S](const RandomStream&) {
      const auto [x, y] = probe_pair(S, p, R);
      auto u = uniqueness_probe(S, x, y, 720, 1e-6);
      Json d{{"verdict", to_string(u.verdict)}, {"min_defect", u.min_defect},
             {"resolution", u.resolution}, {"candidates", u.candidates},
             {"midpoints", u.midpoints.size()}, {"x", point_json(x)}, {"y", point_json(y)}};
      if (u.verdict == Uniqueness::Inconclusive) throw Error(ErrorKind::NoConvergence, "inconclusive");
      return Outcome{u.verdict == Uniqueness::Unique, d, {}};
    });
    add("convexity", "almost-extendability", "almost-extendability",
        [=, &S](const RandomStream& rng) {
          const std::vector<double> ts{0.25, 0.5, 0.75};
          ExtendabilityOptions eo;
          eo.jobs = c.jobs;
          auto r = almost_extendability_audit(S, p, c.delta, c.radii, ts, eo, rng);
          return Outcome{r.pass, audit_json(r), {}};
        });
  }

  if (suite == Suite::Mcp || suite == Suite::All) {
    const ComparisonParams cp{c.K, c.N};
    add("mcp", "mcp", "measure-contraction", [=, &S](const RandomStream& rng) {
      McpOptions mo;
      mo.samples = c.budget;
      mo.jobs = c.jobs;
      auto r = mcp_audit(S, p, RegionSpec::ball(p, R), cp, AlmostMCPParams{0.0}, mo, rng);
      Json d = audit_json(r);
      d["K"] = c.K;
      d["N"] = c.N;
      return Outcome{r.pass, d, {}};
    });
    add("mcp", "bishop-gromov", "bishop-gromov", [=, &S](const RandomStream& rng) {
      auto bg = bishop_gromov_profile(S, p, cp, c.radii, c.budget, rng);
      Json d{{"monotone", bg.monotone}, {"worst_increase", bg.worst_increase},
             {"radii", bg.radii}, {"ratios", bg.ratios}, {"errors", bg.errors},
             {"K", c.K}, {"N", c.N}};
      return Outcome{bg.monotone, d,
                     {bishop_gromov_profile_table("bg", bg.radii, bg.ratios, bg.errors)}};
    });
    add("mcp", "density", "non-collapsed", [=, &S](const RandomStream& rng) {
      std::vector<double> radii;
      for (int k = 0; k < 8; ++k) radii.push_back(R * std::pow(0.5, k));
      auto dp = density_profile(S, p, S.dimension(), radii, c.budget, rng);
      Json d{{"verdict", to_string(dp.verdict)}, {"liminf", dp.liminf}, {"limsup", dp.limsup},
             {"tail_slope", dp.tail_slope}, {"exponent", dp.exponent}};
      return Outcome{dp.verdict == Collapse::NonCollapsed, d,
                     {density_profile_table("density", dp.radii, dp.values, dp.errors)}};
    });
  }

  if (suite == Suite::Tangent || suite == Suite::All) {
    add("tangent", "tangent-uniqueness", "tangent-cone-uniqueness",
        [=, &S](const RandomStream& rng) {
          const std::vector<double> scales =
              tree ? std::vector<double>{1e4, 1e6} : std::vector<double>{1e2, 1e3, 1e4};
          const std::size_t k = tree ? 8 : 16;
          auto tp = tangent_uniqueness_probe(S, p, scales, 2.0, k, 8, rng);
          std::vector<std::vector<double>> lo(scales.size(), std::vector<double>(scales.size())),
              hi = lo;
          for (std::size_t i = 0; i < scales.size(); ++i)
            for (std::size_t j = 0; j < scales.size(); ++j) {
              lo[i][j] = tp.bounds[i][j].lower;
              hi[i][j] = tp.bounds[i][j].upper;
            }
          Json d{{"agree", tp.agree}, {"max_upper", tp.max_upper}, {"max_lower", tp.max_lower},
                 {"exact", tp.exact}, {"scales", scales}, {"k", k},
                 {"witness", {scales[tp.witness.first], scales[tp.witness.second]}}};
          return Outcome{tp.agree, d, {gh_gap_table("gh", scales, lo, hi)}};
        });
    add("tangent", "norm-recover", "banach-tangent", [=, &S](const RandomStream&) {
      try {
        auto m = norm_recover(S, p, 256, default_t_sequence());
        Json d{{"containment_ratio", m.containment_ratio}, {"inner", m.inner},
               {"outer", m.outer}, {"max_asymmetry", m.max_asymmetry()},
               {"min_turn", m.min_turn()}};
        return Outcome{true, d, {}};
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NotRegular) throw;
        return Outcome{false, Json{{"error", e.what()}}, {}};
      }
    });
    add("tangent", "exp-almost-iso", "exp-almost-isometry", [=, &S](const RandomStream& rng) {
      auto r = exp_almost_isometry_radius(S, p, c.eps, R, rng);
      Json d{{"eps", c.eps}, {"R_cap", R}};
      d["radius"] = r ? Json(*r) : Json(nullptr);
      return Outcome{r.has_value(), d, {}};
    });
  }
  return tasks;
}

std::vector<Task> rigidity_tasks(const ExperimentConfig& c) {
  std::vector<Task> tasks;
  const auto& names = c.experiments.empty() ? rigidity_experiments() : c.experiments;
  auto want = [&](const std::string& n) {
    return std::find(names.begin(), names.end(), n) != names.end();
  };
  auto add = [&](const std::string& name, const std::string& concept_tag, const std::string& sp,
                 Pipeline fn) {
    if (want(name)) tasks.push_back({"rigidity", name, concept_tag, sp, name, std::move(fn)});
  };

  add("hom", "ball-homogeneity", "lp(2, p=1.5)", [](const RandomStream& rng) {
    auto S = parse_space("lp(2, p=1.5)");
    const std::vector<Point> centers{Point::vec({0, 0}), Point::vec({3, 1}),
                                     Point::vec({-2, 4}), Point::vec({5, -5}),
                                     Point::vec({1, -3})};
    auto f = ball_homogeneity_audit(*S, centers, {0.5, 1.0, 2.0}, 400000, rng);
    Json d{{"C", f.C}, {"n", f.n}, {"residual", f.residual}, {"pooled_error", f.pooled_error},
           {"translation_spread", f.translation_spread},
           {"translation_pass", f.translation_pass}, {"power_law_pass", f.power_law_pass}};
    return Outcome{f.translation_pass && f.power_law_pass, d, {}};
  });

  add("trans", "parallel-rays", "polygon(n=6); hyperbolic", [](const RandomStream&) {
    const std::vector<double> grid{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    // normed rays converge like 1/T, hyperbolic ones like exp(-T); the
    // hyperbolic schedule must stay below the 700 radius limit
    auto gap_at = [&](const Space& S, double T, double t) {
      const Point x = S.origin();
      const Point y = *S.chart_point(x, kPi / 2, 1.0);
      auto gamma = make_ray(S, x, *S.chart_point(x, 0.0, 1.0), grid);
      auto eta = parallel_ray_construct(S, y, gamma, T);
      const std::size_t i = static_cast<std::size_t>(t);
      return S.distance(x, y) - eta.distances[i];
    };
    auto poly = parse_space("polygon(n=6)");
    auto hyp = make_hyperbolic();
    double flat = 0.0;
    for (double t : {1.0, 5.0, 10.0}) flat = std::max(flat, std::abs(gap_at(*poly, 1e6, t)));
    const double deficit = gap_at(*hyp, 10.5, 5.0);
    Json d{{"polygon_max_gap", flat}, {"hyperbolic_deficit_t5", deficit}};
    return Outcome{flat <= 1e-6 && deficit > 0.0, d, {}};
  });

  add("cone", "cone-type", "lp(2, p=3); hyperbolic", [](const RandomStream& rng) {
    auto S = parse_space("lp(2, p=3)");
    AuditOptions o;
    o.trials = 10000;
    auto r = cone_type_audit(*S, S->origin(), SampleBall{S->origin(), 1.0}, o, rng);
    auto H = make_hyperbolic();
    auto h = cone_type_audit(*H, H->origin(), SampleBall{H->origin(), 1.0}, o, rng);
    Json d{{"normed", audit_json(r)}, {"hyperbolic_worst", h.worst},
           {"hyperbolic_pass", h.pass}};
    return Outcome{r.pass && !h.pass, d, {}};
  });

  add("noncol", "almost-extendability", "lp(2); hyperbolic; glued", [](const RandomStream& rng) {
    const std::vector<double> ts{0.25, 0.5, 0.75};
    ExtendabilityOptions eo;
    Json d = Json::object();
    bool ok = true;
    auto run1 = [&](const std::string& key, const Space& S, const Point& p,
                    std::vector<double> radii, std::uint64_t id) {
      auto r = almost_extendability_audit(S, p, 0.05, radii, ts, eo, rng.substream(id));
      d[key] = audit_json(r);
      return r.pass;
    };
    auto l2 = make_lp(2, 2);
    auto hyp = make_hyperbolic();
    auto tree = make_glued_intervals(GluedIntervalSpec::power_law(4));
    ok = run1("l2", *l2, l2->origin(), {0.5, 1.0}, 1) && ok;
    ok = run1("hyperbolic", *hyp, hyp->origin(), {0.5, 1.0}, 2) && ok;
    ok = run1("glued", *tree, Point::tree(0, 0.1), {0.02, 0.05, 0.08}, 3) && ok;
    return Outcome{ok, d, {}};
  });

  add("hyp-ball", "hyperbolic-ball-mcp", "subset(hyperbolic, ball)", [](const RandomStream& rng) {
    auto a = hyperbolic_ball_mcp_certificate(0.5, 2.5);
    auto b = hyperbolic_ball_mcp_certificate(0.1, 3.0);
    auto c = hyperbolic_ball_mcp_certificate(0.5, 2.0);
    auto ball = make_convex_subset(make_hyperbolic(), BallRegion{Point::polar(0, 0), 0.5});
    ThresholdOptions to;
    to.tol = 0.05;
    auto th = mcp_dimension_threshold(*ball, ball->origin(), 0.5, 1.5, 3.0, to, rng);
    Json d{{"R0.5_N2.5", a.pass}, {"R0.1_N3", b.pass}, {"R0.5_N2", c.pass},
           {"R0.5_N2_worst", c.worst}, {"n_star", th.n_star}, {"n_star_lo", th.lo},
           {"n_star_hi", th.hi}};
    const bool ok = a.pass && b.pass && !c.pass && th.n_star > 2.0 && th.n_star <= 2.5;
    return Outcome{ok, d, {certificate_table("R0.5_N2", 0.5, 2.0, 0.05)}};
  });

  add("gauss-cd", "gaussian-cd", "weighted(hyperbolic, c=1)", [](const RandomStream& rng) {
    auto r = gaussian_cd_hessian_audit(1000, 1e-3, 1e-4, rng);
    return Outcome{r.pass, audit_json(r), {}};
  });

  add("glued-tangent", "tangent-cone-uniqueness", "glued(depth=4)", [](const RandomStream& rng) {
    auto S = make_glued_intervals(GluedIntervalSpec::power_law(4));
    const std::vector<double> scales{1e4, 1e6};
    auto tp = tangent_uniqueness_probe(*S, S->origin(), scales, 2.0, 8, 8, rng);
    std::vector<std::vector<double>> lo(2, std::vector<double>(2)), hi = lo;
    lo[0][1] = tp.bounds[0][1].lower;
    hi[0][1] = tp.bounds[0][1].upper;
    Json d{{"agree", tp.agree}, {"max_lower", tp.max_lower}, {"max_upper", tp.max_upper},
           {"exact", tp.exact}, {"scales", scales}};
    return Outcome{tp.agree, d, {gh_gap_table("gh", scales, lo, hi)}};
  });

  add("exp-almost-iso", "exp-almost-isometry", "hyperbolic; lp(2, p=3); glued",
      [](const RandomStream& rng) {
        auto hyp = make_hyperbolic();
        auto l3 = make_lp(2, 3);
        auto tree = make_glued_intervals(GluedIntervalSpec::power_law(4));
        auto rh = exp_almost_isometry_radius(*hyp, hyp->origin(), 0.01, 1.0, rng);
        auto rn = exp_almost_isometry_radius(*l3, l3->origin(), 0.01, 1.0, rng);
        auto rt = exp_almost_isometry_radius(*tree, Point::tree(0, 0.1), 0.5, 0.05, rng);
        auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
        Json d{{"hyperbolic_radius", opt(rh)}, {"normed_radius", opt(rn)},
               {"glued_radius", opt(rt)}, {"cosh_bound_radius", std::acosh(1.01)}};
        return Outcome{rh.has_value() && rn && *rn == 1.0 && !rt, d, {}};
      });
  return tasks;
}

}  // namespace

RunResult run(const ExperimentConfig& config, const Expectations& expectations,
              std::ostream& log) {
  if (!config.space || !config.seed)
    throw Error(ErrorKind::InvalidSpec, "config must be validated before running");
  std::vector<Task> tasks;
  if (config.suite != Suite::Rigidity) tasks = config_tasks(config, config.suite);
  if (config.suite == Suite::Rigidity || config.suite == Suite::All) {
    auto r = rigidity_tasks(config);
    tasks.insert(tasks.end(), r.begin(), r.end());
  }
  const std::string cls = space_class(*config.space);
  const RandomStream root(*config.seed);

  RunResult out;
  bool runtime_error = false;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& task = tasks[i];
    AuditRecord rec;
    rec.suite = task.suite;
    rec.audit = task.audit;
    rec.concept_tag = task.concept_tag;
    rec.space = task.space;
    rec.expected = task.suite == "rigidity"
                       ? expectations.expected("rigidity", task.audit, 0, 0, 0)
                       : expectations.expected(cls, task.audit, config.K, config.N,
                                               config.space->dimension());
    // substream ids depend on the audit name only, so suites replay alike
    const RandomStream rng = root.substream(stable_id(task.suite + "/" + task.audit));
    try {
      auto o = task.run(rng);
      rec.verdict = o.pass ? "pass" : "fail";
      rec.details = std::move(o.details);
      rec.profiles = std::move(o.profiles);
    } catch (const Error& e) {
      const bool skip = e.kind() == ErrorKind::Unsupported || e.kind() == ErrorKind::DomainExceeded;
      rec.verdict = skip ? "skipped" : "error";
      rec.details = Json{{"error", e.what()}};
      runtime_error = runtime_error || !skip;
    }
    rec.matched = rec.verdict == "skipped" || rec.expected == "any"
                      ? rec.verdict != "error"
                      : rec.verdict == rec.expected;
    log << rec.summary_line() << "\n";
    out.records.push_back(std::move(rec));
  }

  bool all = true;
  Json audits = Json::array();
  std::string text;
  for (const auto& r : out.records) {
    all = all && r.matched;
    audits.push_back(r.to_json());
    text += r.summary_line() + "\n";
  }
  out.exit_code = runtime_error ? 2 : all ? 0 : 1;
  out.summary = Json{{"expectations_version", expectations.version},
                     {"space", config.space_spec},
                     {"space_class", cls},
                     {"point", point_json(config.point)},
                     {"suite", to_string(config.suite)},
                     {"seed", *config.seed},
                     {"params",
                      {{"K", config.K}, {"N", config.N}, {"delta", config.delta},
                       {"eps", config.eps}, {"radii", config.radii}, {"budget", config.budget},
                       {"trials", config.trials}, {"tol", config.tol}}},
                     {"all_matched", all},
                     {"exit_code", out.exit_code},
                     {"audits", audits}};

  if (!config.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    for (const auto& r : out.records) {
      std::ofstream f(fs::path(config.out_dir) / (r.suite + "-" + r.audit + ".json"));
      f << dump(r.to_json());
    }
    std::ofstream(fs::path(config.out_dir) / "summary.json") << dump(out.summary);
    std::ofstream(fs::path(config.out_dir) / "summary.txt") << text;
  }
  return out;
}

}  // namespace mmlab::cli
