#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "mmlab/cli/config.hpp"
#include "mmlab/cli/report.hpp"

namespace mmlab::cli {

/// Versioned expected-verdict table keyed by "<space class>/<audit>".
///
/// Values are "pass", "fail", "any", "pass-if N>=n" (n = space dimension)
/// or "pass-if K<=1-N". Missing keys mean "any".
struct Expectations {
  std::string version;
  std::map<std::string, std::string> table;

  std::string expected(const std::string& space_class, const std::string& audit, double K,
                       double N, int n) const;

  static Expectations builtin();
  /// {"version": "...", "expectations": {"hyperbolic/mcp": "fail", ...}}
  static Expectations from_json(const std::string& text);
  Json to_json() const;
};

/// Expectation class of a space: normed-strict, normed-flat, hyperbolic,
/// tree, subset or weighted. Rescaling keeps the class of its base.
std::string space_class(const Space& space);

struct RunResult {
  std::vector<AuditRecord> records;
  int exit_code = 0;
  Json summary;
};

/// Runs the configured suites. Writes one JSON report per audit and
/// summary.json / summary.txt into `config.out_dir` when it is non-empty.
RunResult run(const ExperimentConfig& config, const Expectations& expectations,
              std::ostream& log);

/// Audit names per suite, for `list-suites`.
std::string list_suites();

}  // namespace mmlab::cli
