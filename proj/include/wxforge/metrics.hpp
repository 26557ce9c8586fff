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

// Embedding-set distances: Fréchet distance between Gaussian fits (FID),
// kernel MMD (CMMD), their contrastive variants and cross-set matrices.
//
// Embeddings are stored as float32; every computation here runs in double.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "wxforge/embeddings.hpp"
#include "wxforge/table.hpp"

namespace wxforge {

/// Sample mean and unbiased (n-1) covariance.
struct GaussStats {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  std::size_t n = 0;
};

/// Rows of `set` as an n × dim double matrix.
Eigen::MatrixXd to_matrix(const EmbeddingSet& set);

/// Errors: insufficient-samples (n < 2). Logs a warning when n < dim.
GaussStats gaussian_stats(const EmbeddingSet& set);
GaussStats gaussian_stats(const Eigen::MatrixXd& rows);

/// ‖μa−μb‖² + tr(Σa + Σb − 2(ΣaΣb)^½), with the trace of the square root
/// taken as Σ√λ over the eigenvalues of Σa^½ Σb Σa^½.
/// Errors: dimension-mismatch, non-psd-covariance, negative-distance.
double frechet_distance(const GaussStats& a, const GaussStats& b);

/// frechet_distance of the two sets' Gaussian fits. When either set has
/// fewer rows than dimensions the covariance product has rank below dim and
/// the trace term is computed from the centered sample matrices instead
/// (see fid_factored); `undersampled` reports that regime.
double fid(const EmbeddingSet& x, const EmbeddingSet& y, bool* undersampled = nullptr);

/// FID with tr((ΣaΣb)^½) taken as the nuclear norm of A·Bᵀ, where A and B
/// are the centered rows scaled by 1/√(n−1). Equal to frechet_distance on
/// the same data; cost is O(na·nb·dim) instead of O(dim³).
double fid_factored(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

enum class MmdEstimator { kUnbiased, kBiased };

struct MmdOptions {
  double sigma = 10.0;  ///< Gaussian kernel bandwidth
  double scale = 1000.0;
  MmdEstimator estimator = MmdEstimator::kUnbiased;
};

/// Squared MMD under k(u,v) = exp(−‖u−v‖²/(2σ²)), multiplied by `scale`.
/// Errors: dimension-mismatch, insufficient-samples, invalid-argument.
double mmd2(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const MmdOptions& options);
double mmd2(const EmbeddingSet& x, const EmbeddingSet& y, const MmdOptions& options = {});

/// Σ_{j≠target} d_j / d_target − (n − 1): zero when every trigger is as far
/// as the target, positive when the target is the closest.
/// Errors: unknown-trigger, zero-denominator, insufficient-samples (n < 2).
double contrastive(const std::map<std::string, double, std::less<>>& distances,
                   std::string_view target);

// ---------------------------------------------------------------------------

/// A named image set in the two embedding spaces; either may be absent.
struct NamedSet {
  std::string name;
  const EmbeddingSet* fid_space = nullptr;
  const EmbeddingSet* cmmd_space = nullptr;
};

enum class MetricKind { kFid, kCmmd, kBoth };

struct DistanceMatrix {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::optional<Eigen::MatrixXd> fid;
  std::optional<Eigen::MatrixXd> cmmd;
  std::string fid_space_tag;
  std::string cmmd_space_tag;
  std::vector<std::size_t> row_counts;
  std::vector<std::size_t> col_counts;

  /// Columns `<trigger>_fid` then `<trigger>_cmmd`, keyed by "set".
  DataTable to_table() const;
  /// Inverse of to_table; counts and tags are not stored in the CSV.
  /// Errors: parse-error when a column name is not `<trigger>_<metric>`.
  static DistanceMatrix from_table(const DataTable& table);
  /// Matrices plus counts, tags and MMD options as JSON.
  std::string to_json(const MmdOptions& options) const;
};

/// Every (set, trigger) distance. FID requires all fid_space sets to share
/// one space tag and CMMD likewise. Gaussian fits are computed once per
/// distinct set content. Work is spread over `workers` threads; results
/// never depend on the worker count.
/// Entries within −1e-9 of zero are clamped; unbiased CMMD estimates below
/// zero mean "indistinguishable" and are clamped to 0.
/// Errors: space-tag-mismatch, invalid-argument (missing space).
DistanceMatrix cross_matrix(std::span<const NamedSet> sets, std::span<const NamedSet> triggers,
                            MetricKind which, const MmdOptions& options = {}, int workers = 1);

/// Contrastive scores of every row for `target`, from the `<trigger>_fid`
/// and `<trigger>_cmmd` columns. Returns the `c_fid_<target>` and/or
/// `c_cmmd_<target>` columns that could be computed.
/// Errors: unknown-trigger, zero-denominator.
std::vector<std::pair<std::string, std::vector<double>>> contrastive_columns(
    const DistanceMatrix& m, std::string_view target);

}  // namespace wxforge
