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

// Correlation studies, PCA projection and minimal-distance reports over
// distance matrices and results tables.

#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "wxforge/embeddings.hpp"
#include "wxforge/metrics.hpp"
#include "wxforge/table.hpp"

namespace wxforge {

struct CorrelationResult {
  double r = 0.0;
  double p = 1.0;  ///< two-tailed
  std::size_t n = 0;
};

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
/// Errors: invalid-argument (a or b not positive, x outside [0, 1]).
double incomplete_beta(double a, double b, double x);

/// Two-tailed p-value of Pearson r over n samples, from Student's t with
/// n − 2 degrees of freedom: I_{1−r²}((n−2)/2, 1/2).
double pearson_p_value(double r, std::size_t n);

/// Errors: length-mismatch, insufficient-samples (n < 3), constant-series.
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------

struct LabeledEmbeddings {
  std::string label;
  const EmbeddingSet* set = nullptr;
};

struct ProjectedPoints {
  std::vector<std::string> labels;           ///< one per point
  std::vector<std::array<double, 2>> coords;
  std::array<double, 2> explained_variance{};

  /// Columns label, pc1, pc2.
  std::string to_csv() const;
};

/// Pooled points projected on the top two principal components of their
/// covariance. Each component's sign is fixed so its largest-magnitude
/// loading is positive.
/// Errors: insufficient-samples (pooled n < 3), dimension-mismatch,
/// degenerate (all points identical).
ProjectedPoints pca_project(std::span<const LabeledEmbeddings> sets);
ProjectedPoints pca_project(const Eigen::MatrixXd& points, std::vector<std::string> labels);

// ---------------------------------------------------------------------------

/// Maps a set name to its dataset label.
using Grouping = std::function<std::string(std::string_view)>;

/// "albumentations" for names starting with `albu_`, else "a-bdd".
std::string default_dataset_label(std::string_view set_name);

struct MinDistanceReport {
  std::string metric;
  std::vector<std::string> groups;
  std::vector<std::string> triggers;
  Eigen::MatrixXd min;                          ///< groups × triggers
  std::vector<std::vector<std::string>> argmin;  ///< row name attaining each min

  /// Columns `<trigger>` then `<trigger>_argmin`, keyed by "group".
  std::string to_csv() const;
  std::string to_json() const;
};

/// Per (group, trigger) minimum over the rows of that group. Columns are
/// selected by metric name in either naming convention, `<metric>.<trigger>`
/// or `<trigger>_<metric>`. NaN entries are ignored.
/// Errors: empty-input (no rows or no matching columns).
MinDistanceReport min_distance_report(const DataTable& table, std::string_view metric,
                                      const Grouping& grouping = default_dataset_label);
MinDistanceReport min_distance_report(const DistanceMatrix& matrix, std::string_view metric,
                                      const Grouping& grouping = default_dataset_label);

// ---------------------------------------------------------------------------

/// Rows whose key does not match this pattern are the augmented subsets.
inline constexpr const char* kDefaultRowExclude = "^albu_";

struct StudyReport {
  std::string x_field;
  std::string y_field;
  std::string exclude_pattern;
  std::vector<std::string> rows_used;
  CorrelationResult result;

  std::string to_json() const;
};

/// pearson(table[x_field], table[y_field]) over rows whose key does not
/// match `exclude_pattern` (ECMAScript regex, searched). Rows with a NaN in
/// either field are dropped.
/// Errors: unknown-column, invalid-argument (bad regex), plus pearson's.
StudyReport correlate_study(const DataTable& table, std::string_view x_field,
                            std::string_view y_field,
                            std::string_view exclude_pattern = kDefaultRowExclude);

}  // namespace wxforge
