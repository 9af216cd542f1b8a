#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmlab/spaces.hpp"

namespace mmlab::cli {

enum class Suite { Convexity, Mcp, Tangent, Rigidity, All };

const char* to_string(Suite s);
Suite parse_suite(const std::string& name);

/// Names of the rigidity experiments, in run order.
const std::vector<std::string>& rigidity_experiments();

/// One experiment run. Every field is validated by `validate()` before any
/// computation starts; the parsed space is built there too.
struct ExperimentConfig {
  std::string space_spec;
  std::string point_spec;  ///< base point; empty selects the space origin
  Suite suite = Suite::All;
  std::optional<std::uint64_t> seed;
  std::string out_dir;

  double K = 0.0;
  double N = 2.0;
  double delta = 0.05;  ///< almost-extendability / almost-MCP slack
  double eps = 0.01;    ///< almost-isometry tolerance
  std::vector<double> radii{0.25, 0.5, 1.0};
  std::size_t budget = 20000;  ///< Monte Carlo samples per mass estimate
  std::size_t trials = 2000;   ///< convexity audit trials
  double tol = 1e-10;
  unsigned jobs = 1;
  std::vector<std::string> experiments;  ///< rigidity subset; empty = all

  SpacePtr space;
  Point point;

  /// Parses the space and point and checks every parameter. Throws
  /// Error(InvalidSpec) with a message naming the offending key.
  void validate();
};

/// Reads a YAML mapping. Unknown keys are rejected.
ExperimentConfig load_config_text(const std::string& yaml);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace mmlab::cli
