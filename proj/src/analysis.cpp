// Copyright 2026 The wxforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wxforge/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <regex>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <json.hpp>

#include "wxforge/error.hpp"

namespace wxforge {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kCfEps = 1e-16;
constexpr int kCfMaxIter = 10000;

// Modified Lentz evaluation of the continued fraction for I_x(a, b); valid
// and fast for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) {
    d = kTiny;
  }
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kCfMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    d = std::fabs(d) < kTiny ? kTiny : d;
    c = 1.0 + aa / c;
    c = std::fabs(c) < kTiny ? kTiny : c;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    d = std::fabs(d) < kTiny ? kTiny : d;
    c = 1.0 + aa / c;
    c = std::fabs(c) < kTiny ? kTiny : c;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kCfEps) {
      return h;
    }
  }
  throw Error(errc::kInvalidArgument,
              fmt::format("incomplete beta did not converge for a={} b={} x={}", a, b, x));
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw Error(errc::kInvalidArgument,
                fmt::format("incomplete beta needs a, b > 0 and x in [0, 1]; got {}, {}, {}", a,
                            b, x));
  }
  if (x == 0.0 || x == 1.0) {
    return x;
  }
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double pearson_p_value(double r, std::size_t n) {
  if (n < 3) {
    throw Error(errc::kInsufficientSamples, fmt::format("p-value needs n >= 3, got {}", n));
  }
  const double ar = std::min(std::fabs(r), 1.0);
  if (ar == 1.0) {
    return 0.0;
  }
  // t² / (df + t²) = r², so the t tail reduces to I_{1−r²}(df/2, 1/2).
  const double one_minus_r2 = (1.0 - ar) * (1.0 + ar);
  const double df = static_cast<double>(n - 2);
  return std::clamp(incomplete_beta(0.5 * df, 0.5, one_minus_r2), 0.0, 1.0);
}

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(errc::kLengthMismatch,
                fmt::format("series of length {} and {}", x.size(), y.size()));
  }
  const std::size_t n = x.size();
  if (n < 3) {
    throw Error(errc::kInsufficientSamples, fmt::format("Pearson needs n >= 3, got {}", n));
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(errc::kConstantSeries, "Pearson correlation of a constant series");
  }
  CorrelationResult out;
  out.n = n;
  out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  out.p = pearson_p_value(out.r, n);
  return out;
}

// ---------------------------------------------------------------------------

std::string ProjectedPoints::to_csv() const {
  std::string out = "label,pc1,pc2\n";
  for (std::size_t i = 0; i < coords.size(); ++i) {
    out += fmt::format("{},{},{}\n", labels[i], format_number(coords[i][0]),
                       format_number(coords[i][1]));
  }
  return out;
}

ProjectedPoints pca_project(const Eigen::MatrixXd& points, std::vector<std::string> labels) {
  const Eigen::Index n = points.rows();
  const Eigen::Index dim = points.cols();
  if (n < 3) {
    throw Error(errc::kInsufficientSamples, fmt::format("PCA needs at least 3 points, got {}", n));
  }
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw Error(errc::kLengthMismatch,
                fmt::format("{} labels for {} points", labels.size(), n));
  }
  const Eigen::MatrixXd c = points.rowwise() - points.colwise().mean();
  ProjectedPoints out;
  out.labels = std::move(labels);
  out.coords.resize(static_cast<std::size_t>(n));

  // Eigenvalues and projections of the top two components. The n × n Gram
  // route shares its non-zero spectrum with the covariance and is cheaper
  // when points are fewer than dimensions.
  Eigen::VectorXd lambda;
  Eigen::MatrixXd proj(n, 2);
  proj.setZero();
  double total = 0.0;
  if (n < dim) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c * c.transpose());
    lambda = es.eigenvalues().cwiseMax(0.0);
    total = lambda.sum();
    for (int k = 0; k < 2 && k < n; ++k) {
      const Eigen::Index idx = n - 1 - k;
      Eigen::VectorXd u = es.eigenvectors().col(idx);
      // The loading vector is cᵀu / √λ; fix its sign by its largest entry.
      const Eigen::VectorXd loading = c.transpose() * u;
      Eigen::Index arg = 0;
      loading.cwiseAbs().maxCoeff(&arg);
      if (loading(arg) < 0.0) {
        u = -u;
      }
      proj.col(k) = u * std::sqrt(lambda(idx));
    }
    lambda = lambda.reverse().eval();
  } else {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.transpose() * c);
    lambda = es.eigenvalues().cwiseMax(0.0);
    total = lambda.sum();
    for (int k = 0; k < 2 && k < dim; ++k) {
      Eigen::VectorXd v = es.eigenvectors().col(dim - 1 - k);
      Eigen::Index arg = 0;
      v.cwiseAbs().maxCoeff(&arg);
      if (v(arg) < 0.0) {
        v = -v;
      }
      proj.col(k) = c * v;
    }
    lambda = lambda.reverse().eval();
  }
  if (!(total > 0.0)) {
    throw Error(errc::kDegenerate, "PCA of identical points");
  }
  for (int k = 0; k < 2; ++k) {
    out.explained_variance[static_cast<std::size_t>(k)] =
        k < lambda.size() ? std::clamp(lambda(k) / total, 0.0, 1.0) : 0.0;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    out.coords[static_cast<std::size_t>(i)] = {proj(i, 0), proj(i, 1)};
  }
  return out;
}

ProjectedPoints pca_project(std::span<const LabeledEmbeddings> sets) {
  std::size_t total = 0;
  std::size_t dim = 0;
  for (const auto& s : sets) {
    if (s.set == nullptr) {
      throw Error(errc::kInvalidArgument, fmt::format("set '{}' is missing", s.label));
    }
    if (total > 0 && s.set->dim != dim) {
      throw Error(errc::kDimensionMismatch,
                  fmt::format("set '{}' has dimension {}, expected {}", s.label, s.set->dim, dim));
    }
    if (s.set->n > 0) {
      dim = s.set->dim;
    }
    total += s.set->n;
  }
  Eigen::MatrixXd pooled(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(dim));
  std::vector<std::string> labels;
  labels.reserve(total);
  Eigen::Index row = 0;
  for (const auto& s : sets) {
    for (std::size_t i = 0; i < s.set->n; ++i, ++row) {
      for (std::size_t j = 0; j < dim; ++j) {
        pooled(row, static_cast<Eigen::Index>(j)) = s.set->data[i * dim + j];
      }
      labels.push_back(s.label);
    }
  }
  return pca_project(pooled, std::move(labels));
}

// ---------------------------------------------------------------------------

std::string default_dataset_label(std::string_view set_name) {
  return set_name.starts_with("albu_") ? "albumentations" : "a-bdd";
}

std::string MinDistanceReport::to_csv() const {
  std::string out = "group";
  for (const auto& t : triggers) {
    out += "," + t;
  }
  for (const auto& t : triggers) {
    out += "," + t + "_argmin";
  }
  out += "\n";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    out += groups[g];
    for (std::size_t t = 0; t < triggers.size(); ++t) {
      const double v = min(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(t));
      out += "," + (std::isnan(v) ? std::string() : format_number(v));
    }
    for (std::size_t t = 0; t < triggers.size(); ++t) {
      out += "," + argmin[g][t];
    }
    out += "\n";
  }
  return out;
}

std::string MinDistanceReport::to_json() const {
  using ojson = nlohmann::ordered_json;
  ojson series = ojson::array();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    ojson values = ojson::array();
    for (std::size_t t = 0; t < triggers.size(); ++t) {
      const double v = min(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(t));
      values.push_back(std::isnan(v) ? ojson(nullptr) : ojson(v));
    }
    series.push_back(ojson{{"group", groups[g]}, {"values", values}, {"argmin", argmin[g]}});
  }
  const ojson doc{{"metric", metric}, {"axes", triggers}, {"series", series}};
  return doc.dump(2) + "\n";
}

MinDistanceReport min_distance_report(const DataTable& table, std::string_view metric,
                                      const Grouping& grouping) {
  MinDistanceReport rep;
  rep.metric = std::string(metric);
  const std::string prefix = std::string(metric) + ".";
  const std::string suffix = "_" + std::string(metric);
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    const std::string& name = table.columns[i];
    if (name.starts_with("c_")) {
      continue;
    }
    if (name.size() > prefix.size() && name.starts_with(prefix)) {
      rep.triggers.push_back(name.substr(prefix.size()));
      cols.push_back(i);
    } else if (name.size() > suffix.size() && name.ends_with(suffix)) {
      rep.triggers.push_back(name.substr(0, name.size() - suffix.size()));
      cols.push_back(i);
    }
  }
  if (cols.empty() || table.rows.empty()) {
    throw Error(errc::kEmptyInput,
                fmt::format("no rows or no '{}' columns for a minimal-distance report", metric));
  }
  std::map<std::string, std::size_t> group_index;
  std::vector<std::size_t> row_group(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string label = grouping(table.rows[r]);
    const auto [it, inserted] = group_index.emplace(label, rep.groups.size());
    if (inserted) {
      rep.groups.push_back(label);
    }
    row_group[r] = it->second;
  }
  const auto ng = static_cast<Eigen::Index>(rep.groups.size());
  const auto nt = static_cast<Eigen::Index>(cols.size());
  rep.min = Eigen::MatrixXd::Constant(ng, nt, std::numeric_limits<double>::quiet_NaN());
  rep.argmin.assign(rep.groups.size(), std::vector<std::string>(cols.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto g = static_cast<Eigen::Index>(row_group[r]);
    for (Eigen::Index t = 0; t < nt; ++t) {
      const double v = table.values[r][cols[static_cast<std::size_t>(t)]];
      if (std::isnan(v)) {
        continue;
      }
      double& cur = rep.min(g, t);
      if (std::isnan(cur) || v < cur) {
        cur = v;
        rep.argmin[static_cast<std::size_t>(g)][static_cast<std::size_t>(t)] = table.rows[r];
      }
    }
  }
  return rep;
}

MinDistanceReport min_distance_report(const DistanceMatrix& matrix, std::string_view metric,
                                      const Grouping& grouping) {
  return min_distance_report(matrix.to_table(), metric, grouping);
}

// ---------------------------------------------------------------------------

std::string StudyReport::to_json() const {
  using ojson = nlohmann::ordered_json;
  const ojson doc{
      {"x_field", x_field},
      {"y_field", y_field},
      {"exclude", exclude_pattern},
      {"n", result.n},
      {"r", result.r},
      {"p", result.p},
      {"rows", rows_used},
  };
  return doc.dump(2) + "\n";
}

StudyReport correlate_study(const DataTable& table, std::string_view x_field,
                            std::string_view y_field, std::string_view exclude_pattern) {
  const std::vector<double> xs = table.column(x_field);
  const std::vector<double> ys = table.column(y_field);
  std::optional<std::regex> exclude;
  if (!exclude_pattern.empty()) {
    try {
      exclude.emplace(std::string(exclude_pattern), std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw Error(errc::kInvalidArgument,
                  fmt::format("row filter '{}' is not a valid regex: {}", exclude_pattern,
                              e.what()));
    }
  }
  StudyReport rep;
  rep.x_field = std::string(x_field);
  rep.y_field = std::string(y_field);
  rep.exclude_pattern = std::string(exclude_pattern);
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (exclude && std::regex_search(table.rows[r], *exclude)) {
      continue;
    }
    if (std::isnan(xs[r]) || std::isnan(ys[r])) {
      continue;
    }
    x.push_back(xs[r]);
    y.push_back(ys[r]);
    rep.rows_used.push_back(table.rows[r]);
  }
  rep.result = pearson(x, y);
  return rep;
}

}  // namespace wxforge
