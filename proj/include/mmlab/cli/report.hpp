#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "mmlab/convexity.hpp"

namespace mmlab::cli {

using Json = nlohmann::json;

/// A table destined for one CSV file. `kind` is one of "bishop-gromov"
/// (r, ratio, sigma), "density" (r, value, sigma), "certificate"
/// (r, t, f_r(t)) or "gh-gaps" (scale_i, scale_j, lower, upper).
struct Profile {
  std::string kind;
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  Json to_json() const;
  static Profile from_json(const Json& j);
  std::string to_csv() const;
};

Profile bishop_gromov_profile_table(const std::string& name, const std::vector<double>& r,
                                    const std::vector<double>& ratio,
                                    const std::vector<double>& sigma);
Profile density_profile_table(const std::string& name, const std::vector<double>& r,
                              const std::vector<double>& value, const std::vector<double>& sigma);
Profile certificate_table(const std::string& name, double R, double N, double step);
Profile gh_gap_table(const std::string& name, const std::vector<double>& scales,
                     const std::vector<std::vector<double>>& lower,
                     const std::vector<std::vector<double>>& upper);

/// Outcome of one audit inside a suite.
struct AuditRecord {
  std::string suite;
  std::string audit;
  std::string concept_tag;  ///< short name of the result the audit exercises
  std::string space;
  std::string verdict;   ///< "pass", "fail" or "error"
  std::string expected;  ///< "pass", "fail" or "any"
  bool matched = true;
  Json details = Json::object();
  std::vector<Profile> profiles;

  Json to_json() const;
  std::string summary_line() const;
};

/// Metrics, witness and series of a module audit report.
Json audit_json(const AuditReport& r);
Json point_json(const Point& p);

/// Stable text form: sorted keys, two-space indent, trailing newline.
std::string dump(const Json& j);

/// Writes one CSV per profile in `report` into `dir`; returns the paths.
std::vector<std::string> emit_plot_data(const Json& report, const std::string& dir);

}  // namespace mmlab::cli
