#include "mmlab/cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mmlab/cli/spec_parser.hpp"

namespace mmlab::cli {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::InvalidSpec, msg); }

template <class T>
T scalar(const YAML::Node& n, const std::string& key) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

const char* to_string(Suite s) {
  switch (s) {
    case Suite::Convexity: return "convexity";
    case Suite::Mcp: return "mcp";
    case Suite::Tangent: return "tangent";
    case Suite::Rigidity: return "rigidity";
    case Suite::All: return "all";
  }
  return "?";
}

Suite parse_suite(const std::string& name) {
  for (Suite s : {Suite::Convexity, Suite::Mcp, Suite::Tangent, Suite::Rigidity, Suite::All})
    if (name == to_string(s)) return s;
  fail("unknown suite '" + name + "' (convexity, mcp, tangent, rigidity, all)");
}

const std::vector<std::string>& rigidity_experiments() {
  static const std::vector<std::string> names{"hom",           "trans",    "cone",
                                              "noncol",        "hyp-ball", "gauss-cd",
                                              "glued-tangent", "exp-almost-iso"};
  return names;
}

void ExperimentConfig::validate() {
  if (!seed) fail("config must set 'seed'");
  if (space_spec.empty()) fail("config must set 'space'");
  space = parse_space(space_spec);
  point = point_spec.empty() ? space->origin() : parse_point(point_spec);
  try {
    space->check(point);
  } catch (const Error& e) {
    fail(std::string("config key 'point': ") + e.what());
  }
  try {
    ComparisonParams{K, N}.validate();
  } catch (const Error& e) {
    fail(std::string("config keys 'K'/'N': ") + e.what());
  }
  if (!(delta >= 0.0 && delta < 1.0)) fail("config key 'delta' must lie in [0, 1)");
  if (!(eps > 0.0 && eps < 1.0)) fail("config key 'eps' must lie in (0, 1)");
  if (radii.empty()) fail("config key 'radii' must not be empty");
  for (double r : radii)
    if (!(r > 0.0) || r > space->radius_cap())
      fail("config key 'radii' has a value outside (0, radius cap]");
  if (budget < 100) fail("config key 'budget' must be >= 100");
  if (trials < 1) fail("config key 'trials' must be >= 1");
  if (!(tol > 0.0)) fail("config key 'tol' must be positive");
  if (jobs < 1) fail("config key 'jobs' must be >= 1");
  const auto& known = rigidity_experiments();
  for (const auto& e : experiments)
    if (std::find(known.begin(), known.end(), e) == known.end())
      fail("config key 'experiments' names unknown experiment '" + e + "'");
}

ExperimentConfig load_config_text(const std::string& yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    fail(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) fail("config must be a mapping");
  static const std::set<std::string> keys{"space", "point", "suite", "seed",  "out",  "K",
                                          "N",     "delta", "eps",   "radii", "budget",
                                          "trials", "tol",  "jobs",  "experiments"};
  ExperimentConfig c;
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!keys.count(key)) fail("unknown config key '" + key + "'");
  }
  if (root["space"]) c.space_spec = scalar<std::string>(root["space"], "space");
  if (root["point"]) c.point_spec = scalar<std::string>(root["point"], "point");
  if (root["suite"]) c.suite = parse_suite(scalar<std::string>(root["suite"], "suite"));
  if (root["seed"]) c.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (root["out"]) c.out_dir = scalar<std::string>(root["out"], "out");
  if (root["K"]) c.K = scalar<double>(root["K"], "K");
  if (root["N"]) c.N = scalar<double>(root["N"], "N");
  if (root["delta"]) c.delta = scalar<double>(root["delta"], "delta");
  if (root["eps"]) c.eps = scalar<double>(root["eps"], "eps");
  if (root["radii"]) c.radii = scalar<std::vector<double>>(root["radii"], "radii");
  if (root["budget"]) c.budget = scalar<std::size_t>(root["budget"], "budget");
  if (root["trials"]) c.trials = scalar<std::size_t>(root["trials"], "trials");
  if (root["tol"]) c.tol = scalar<double>(root["tol"], "tol");
  if (root["jobs"]) c.jobs = scalar<unsigned>(root["jobs"], "jobs");
  if (root["experiments"])
    c.experiments = scalar<std::vector<std::string>>(root["experiments"], "experiments");
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config_text(ss.str());
}

}  // namespace mmlab::cli
