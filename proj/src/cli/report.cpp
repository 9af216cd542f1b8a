#include "mmlab/cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace mmlab::cli {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string safe_name(std::string s) {
  for (char& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) c = '_';
  return s;
}

}  // namespace

Json Profile::to_json() const {
  return Json{{"kind", kind}, {"name", name}, {"columns", columns}, {"rows", rows}};
}

Profile Profile::from_json(const Json& j) {
  Profile p;
  p.kind = j.at("kind").get<std::string>();
  p.name = j.at("name").get<std::string>();
  p.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& row : j.at("rows")) {
    std::vector<double> r;
    for (const auto& v : row) r.push_back(v.is_null() ? std::nan("") : v.get<double>());
    p.rows.push_back(std::move(r));
  }
  return p;
}

std::string Profile::to_csv() const {
  std::string s = "# " + kind + ": columns";
  for (const auto& c : columns) s += " " + c;
  s += "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
  s += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + fmt(row[i]);
    s += "\n";
  }
  return s;
}

Profile bishop_gromov_profile_table(const std::string& name, const std::vector<double>& r,
                                    const std::vector<double>& ratio,
                                    const std::vector<double>& sigma) {
  Profile p{"bishop-gromov", name, {"r", "ratio", "sigma"}, {}};
  for (std::size_t i = 0; i < r.size(); ++i) p.rows.push_back({r[i], ratio[i], sigma[i]});
  return p;
}

Profile density_profile_table(const std::string& name, const std::vector<double>& r,
                              const std::vector<double>& value, const std::vector<double>& sigma) {
  Profile p{"density", name, {"r", "value", "sigma"}, {}};
  for (std::size_t i = 0; i < r.size(); ++i) p.rows.push_back({r[i], value[i], sigma[i]});
  return p;
}

Profile certificate_table(const std::string& name, double R, double N, double step) {
  Profile p{"certificate", name, {"r", "t", "f_r(t)"}, {}};
  const int nr = static_cast<int>(std::round(R / step));
  const int nt = static_cast<int>(std::round(1.0 / step));
  for (int i = 1; i <= nr; ++i)
    for (int j = 0; j <= nt; ++j) {
      const double r = R * i / nr, t = static_cast<double>(j) / nt;
      p.rows.push_back({r, t, std::sinh(t * r) - std::pow(t, N - 1.0) * std::sinh(r)});
    }
  return p;
}

Profile gh_gap_table(const std::string& name, const std::vector<double>& scales,
                     const std::vector<std::vector<double>>& lower,
                     const std::vector<std::vector<double>>& upper) {
  Profile p{"gh-gaps", name, {"scale_i", "scale_j", "lower", "upper"}, {}};
  for (std::size_t i = 0; i < scales.size(); ++i)
    for (std::size_t j = i + 1; j < scales.size(); ++j)
      p.rows.push_back({scales[i], scales[j], lower[i][j], upper[i][j]});
  return p;
}

Json AuditRecord::to_json() const {
  Json profs = Json::array();
  for (const auto& p : profiles) profs.push_back(p.to_json());
  return Json{{"suite", suite},       {"audit", audit},       {"concept", concept_tag},
              {"space", space},       {"verdict", verdict},   {"expected", expected},
              {"matched", matched},   {"details", details},   {"profiles", profs}};
}

std::string AuditRecord::summary_line() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "[%s] %s/%s on %s: %s (expected %s) %s", concept_tag.c_str(),
                suite.c_str(), audit.c_str(), space.c_str(), verdict.c_str(), expected.c_str(),
                matched ? "MATCH" : "MISMATCH");
  return buf;
}

Json point_json(const Point& p) {
  Json j{{"family", to_string(p.family)}, {"coords", p.coords}};
  if (p.family == Family::Tree) j["branch"] = p.branch;
  return j;
}

Json audit_json(const AuditReport& r) {
  Json j{{"name", r.name},
         {"trials", r.trials},
         {"degenerate", r.degenerate},
         {"tolerance", r.tolerance},
         {"worst", r.worst},
         {"pass", r.pass},
         {"metrics", r.metrics},
         {"series", r.series}};
  if (r.witness) {
    Json pts = Json::array();
    for (const auto& p : r.witness->points) pts.push_back(point_json(p));
    j["witness"] = Json{{"points", pts}, {"t", r.witness->t}, {"lhs", r.witness->lhs},
                        {"rhs", r.witness->rhs}};
  }
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::vector<std::string> emit_plot_data(const Json& report, const std::string& dir) {
  std::vector<Json> records;
  if (report.contains("audits"))
    for (const auto& a : report.at("audits")) records.push_back(a);
  else
    records.push_back(report);

  std::vector<std::string> written;
  std::filesystem::create_directories(dir);
  for (const auto& rec : records) {
    if (!rec.contains("profiles")) continue;
    for (const auto& pj : rec.at("profiles")) {
      const auto p = Profile::from_json(pj);
      const std::string stem = rec.value("suite", std::string("report")) + "-" +
                               rec.value("audit", std::string("audit")) + "-" + p.name;
      const auto path = (std::filesystem::path(dir) / (safe_name(stem) + ".csv")).string();
      std::ofstream out(path);
      if (!out) throw Error(ErrorKind::InvalidParams, "cannot write '" + path + "'");
      out << p.to_csv();
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace mmlab::cli
