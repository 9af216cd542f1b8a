#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mmlab/tangent.hpp"

namespace mmlab {

FiniteMetric::FiniteMetric(std::vector<std::string> labels, Eigen::MatrixXd d, std::size_t base)
    : labels_(std::move(labels)), d_(std::move(d)), base_(base) {
  if (labels_.empty()) throw Error(ErrorKind::InvalidParams, "finite metric needs a point");
  if (d_.rows() != static_cast<Eigen::Index>(labels_.size()) || d_.cols() != d_.rows())
    throw Error(ErrorKind::InvalidParams, "distance matrix shape does not match labels");
  if (base_ >= labels_.size()) throw Error(ErrorKind::InvalidParams, "base index out of range");
}

double FiniteMetric::diameter() const { return d_.size() ? d_.maxCoeff() : 0.0; }

void FiniteMetric::validate() const {
  const auto n = static_cast<Eigen::Index>(size());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d_(i, i) != 0.0) throw Error(ErrorKind::InvalidParams, "non-zero diagonal");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!std::isfinite(d_(i, j)) || d_(i, j) < 0.0)
        throw Error(ErrorKind::InvalidParams, "distances must be finite and >= 0");
      if (d_(i, j) != d_(j, i)) throw Error(ErrorKind::InvalidParams, "asymmetric distances");
    }
  }
  const double slack = 1e-10 * diameter();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k)
        if (d_(i, k) > d_(i, j) + d_(j, k) + slack)
          throw Error(ErrorKind::InvalidParams, "triangle inequality fails");
}

FiniteMetric FiniteMetric::restrict(const std::vector<std::size_t>& idx, std::size_t base) const {
  Eigen::MatrixXd d(idx.size(), idx.size());
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    labels.push_back(labels_.at(idx[i]));
    for (std::size_t j = 0; j < idx.size(); ++j) d(i, j) = d_(idx[i], idx[j]);
  }
  return FiniteMetric(std::move(labels), std::move(d), base);
}

FiniteMetric FiniteMetric::permuted(const std::vector<std::size_t>& perm) const {
  if (perm.size() != size()) throw Error(ErrorKind::InvalidParams, "permutation size mismatch");
  const auto it = std::find(perm.begin(), perm.end(), base_);
  if (it == perm.end()) throw Error(ErrorKind::InvalidParams, "permutation drops the base point");
  return restrict(perm, static_cast<std::size_t>(it - perm.begin()));
}

FiniteMetric FiniteMetric::scaled(double lambda) const {
  return FiniteMetric(labels_, d_ * lambda, base_);
}

std::string FiniteMetric::to_csv() const {
  std::string s = "labels";
  for (std::size_t i = 0; i < size(); ++i) s += "," + std::string(i == base_ ? "*" : "") + labels_[i];
  s += "\n";
  char buf[32];
  for (std::size_t i = 0; i < size(); ++i) {
    s += labels_[i];
    for (std::size_t j = 0; j < size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", d_(i, j));
      s += ",";
      s += buf;
    }
    s += "\n";
  }
  return s;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

}  // namespace

FiniteMetric FiniteMetric::from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::InvalidSpec, "empty metric CSV");
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "labels")
    throw Error(ErrorKind::InvalidSpec, "metric CSV must start with a labels header");
  std::vector<std::string> labels;
  std::size_t base = 0;
  bool have_base = false;
  for (std::size_t i = 1; i < header.size(); ++i) {
    std::string l = header[i];
    if (!l.empty() && l[0] == '*') {
      if (have_base) throw Error(ErrorKind::InvalidSpec, "metric CSV marks two base points");
      base = i - 1;
      have_base = true;
      l.erase(0, 1);
    }
    labels.push_back(l);
  }
  const std::size_t n = labels.size();
  Eigen::MatrixXd d(n, n);
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (row >= n || cells.size() != n + 1)
      throw Error(ErrorKind::InvalidSpec, "metric CSV row has the wrong length");
    if (cells[0] != labels[row]) throw Error(ErrorKind::InvalidSpec, "row label mismatch");
    for (std::size_t j = 0; j < n; ++j) {
      try {
        std::size_t used = 0;
        d(row, j) = std::stod(cells[j + 1], &used);
        if (used != cells[j + 1].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw Error(ErrorKind::InvalidSpec, "bad number '" + cells[j + 1] + "' in metric CSV");
      }
    }
    ++row;
  }
  if (row != n) throw Error(ErrorKind::InvalidSpec, "metric CSV has too few rows");
  FiniteMetric m(std::move(labels), std::move(d), base);
  m.validate();
  return m;
}

FiniteMetric FiniteMetric::of_points(const Space& space, const std::vector<Point>& pts,
                                     std::size_t base) {
  const std::size_t n = pts.size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d(i, j) = d(j, i) = space.distance(pts[i], pts[j]);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(i == base ? "o" : "x" + std::to_string(i));
  return FiniteMetric(std::move(labels), std::move(d), base);
}

}  // namespace mmlab
