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

#include "wxforge/metrics.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "wxforge/error.hpp"
#include "wxforge/parallel.hpp"

namespace wxforge {

namespace {

// Relative tolerance below which negative eigenvalues count as rounding.
constexpr double kPsdTolerance = 1e-6;
// Distances may undershoot zero by this much (relative to the magnitude of
// the terms that cancel) before being reported as an error.
constexpr double kNegativeFloor = 1e-9;

double clamp_distance(double d, double magnitude, const char* what) {
  if (d >= 0.0) {
    return d;
  }
  if (d < -kNegativeFloor * std::max(1.0, magnitude)) {
    throw Error(errc::kNegativeDistance,
                fmt::format("{} evaluated to {} (terms of magnitude {})", what, d, magnitude));
  }
  return 0.0;
}

Eigen::VectorXd checked_eigenvalues(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& es,
                                    const char* what) {
  if (es.info() != Eigen::Success) {
    throw Error(errc::kNonPsd, fmt::format("eigendecomposition of {} failed", what));
  }
  Eigen::VectorXd ev = es.eigenvalues();
  const double top = ev.size() > 0 ? std::max(ev.maxCoeff(), 0.0) : 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -kPsdTolerance * top || (top == 0.0 && ev(i) < -1e-300)) {
      throw Error(errc::kNonPsd,
                  fmt::format("{} has eigenvalue {} (largest {})", what, ev(i), top));
    }
    ev(i) = std::max(ev(i), 0.0);
  }
  return ev;
}

Eigen::MatrixXd centered_scaled(const Eigen::MatrixXd& x) {
  const Eigen::RowVectorXd mu = x.colwise().mean();
  return (x.rowwise() - mu) / std::sqrt(static_cast<double>(x.rows() - 1));
}

// Σ_i Σ_j k(x_i, y_j) over column-major point matrices (one point per
// column), optionally skipping i == j. Summation order is fixed, so equal
// inputs give bit-equal sums.
double kernel_sum(const Eigen::MatrixXd& xt, const Eigen::MatrixXd& yt, double inv_two_sigma2,
                  bool skip_diagonal) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < xt.cols(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < yt.cols(); ++j) {
      if (skip_diagonal && i == j) {
        continue;
      }
      row += std::exp(-(xt.col(i) - yt.col(j)).squaredNorm() * inv_two_sigma2);
    }
    total += row;
  }
  return total;
}

std::string estimator_name(MmdEstimator e) {
  return e == MmdEstimator::kUnbiased ? "unbiased" : "biased";
}

}  // namespace

Eigen::MatrixXd to_matrix(const EmbeddingSet& set) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(set.n), static_cast<Eigen::Index>(set.dim));
  for (std::size_t i = 0; i < set.n; ++i) {
    for (std::size_t j = 0; j < set.dim; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = set.data[i * set.dim + j];
    }
  }
  return m;
}

GaussStats gaussian_stats(const Eigen::MatrixXd& rows) {
  const auto n = static_cast<std::size_t>(rows.rows());
  if (n < 2) {
    throw Error(errc::kInsufficientSamples,
                fmt::format("Gaussian fit needs at least 2 samples, got {}", n));
  }
  if (n < static_cast<std::size_t>(rows.cols())) {
    spdlog::warn("{} samples for {} dimensions: the covariance is rank-deficient and FID is not "
                 "converged",
                 n, rows.cols());
  }
  GaussStats s;
  s.n = n;
  s.mu = rows.colwise().mean().transpose();
  const Eigen::MatrixXd c = rows.rowwise() - s.mu.transpose();
  s.sigma = (c.transpose() * c) / static_cast<double>(n - 1);
  s.sigma = 0.5 * (s.sigma + s.sigma.transpose()).eval();
  return s;
}

GaussStats gaussian_stats(const EmbeddingSet& set) { return gaussian_stats(to_matrix(set)); }

double frechet_distance(const GaussStats& a, const GaussStats& b) {
  if (a.mu.size() != b.mu.size() || a.sigma.rows() != b.sigma.rows() ||
      a.sigma.rows() != a.mu.size() || b.sigma.rows() != b.mu.size()) {
    throw Error(errc::kDimensionMismatch, fmt::format("Gaussian fits of dimension {} and {}",
                                                      a.mu.size(), b.mu.size()));
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(a.sigma);
  const Eigen::VectorXd la = checked_eigenvalues(ea, "first covariance");
  const Eigen::MatrixXd sqrt_a =
      ea.eigenvectors() * la.cwiseSqrt().asDiagonal() * ea.eigenvectors().transpose();
  Eigen::MatrixXd m = sqrt_a * b.sigma * sqrt_a;
  m = 0.5 * (m + m.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(m, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd lm = checked_eigenvalues(em, "covariance product");

  const double mean_term = (a.mu - b.mu).squaredNorm();
  const double tr_a = a.sigma.trace();
  const double tr_b = b.sigma.trace();
  const double tr_sqrt = lm.cwiseSqrt().sum();
  const double d = mean_term + tr_a + tr_b - 2.0 * tr_sqrt;
  return clamp_distance(d, mean_term + tr_a + tr_b, "Fréchet distance");
}

double fid_factored(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.cols() != y.cols()) {
    throw Error(errc::kDimensionMismatch,
                fmt::format("embeddings of dimension {} and {}", x.cols(), y.cols()));
  }
  if (x.rows() < 2 || y.rows() < 2) {
    throw Error(errc::kInsufficientSamples, "FID needs at least 2 samples per set");
  }
  const Eigen::MatrixXd a = centered_scaled(x);
  const Eigen::MatrixXd b = centered_scaled(y);
  const Eigen::MatrixXd cross = a * b.transpose();
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(cross);
  const double tr_sqrt = svd.singularValues().sum();
  const double mean_term = (x.colwise().mean() - y.colwise().mean()).squaredNorm();
  const double tr_a = a.squaredNorm();
  const double tr_b = b.squaredNorm();
  const double d = mean_term + tr_a + tr_b - 2.0 * tr_sqrt;
  return clamp_distance(d, mean_term + tr_a + tr_b, "Fréchet distance");
}

double fid(const EmbeddingSet& x, const EmbeddingSet& y, bool* undersampled) {
  if (x.dim != y.dim) {
    throw Error(errc::kDimensionMismatch,
                fmt::format("embeddings of dimension {} and {}", x.dim, y.dim));
  }
  const bool under = std::min(x.n, y.n) < x.dim;
  if (undersampled != nullptr) {
    *undersampled = under;
  }
  if (under) {
    spdlog::warn("FID on {} and {} samples in {} dimensions is not converged", x.n, y.n, x.dim);
    return fid_factored(to_matrix(x), to_matrix(y));
  }
  return frechet_distance(gaussian_stats(x), gaussian_stats(y));
}

double mmd2(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const MmdOptions& options) {
  if (x.cols() != y.cols()) {
    throw Error(errc::kDimensionMismatch,
                fmt::format("embeddings of dimension {} and {}", x.cols(), y.cols()));
  }
  if (!(options.sigma > 0.0) || !(options.scale > 0.0)) {
    throw Error(errc::kInvalidArgument, "MMD bandwidth and scale must be positive");
  }
  const bool unbiased = options.estimator == MmdEstimator::kUnbiased;
  const Eigen::Index min_n = unbiased ? 2 : 1;
  if (x.rows() < min_n || y.rows() < min_n) {
    throw Error(errc::kInsufficientSamples,
                fmt::format("{} MMD needs at least {} samples per set, got {} and {}",
                            estimator_name(options.estimator), min_n, x.rows(), y.rows()));
  }
  const Eigen::MatrixXd xt = x.transpose();
  const Eigen::MatrixXd yt = y.transpose();
  const double g = 1.0 / (2.0 * options.sigma * options.sigma);
  const auto nx = static_cast<double>(x.rows());
  const auto ny = static_cast<double>(y.rows());
  const double kxy = kernel_sum(xt, yt, g, false) / (nx * ny);
  double kxx = 0.0;
  double kyy = 0.0;
  if (unbiased) {
    kxx = kernel_sum(xt, xt, g, true) / (nx * (nx - 1.0));
    kyy = kernel_sum(yt, yt, g, true) / (ny * (ny - 1.0));
  } else {
    kxx = kernel_sum(xt, xt, g, false) / (nx * nx);
    kyy = kernel_sum(yt, yt, g, false) / (ny * ny);
  }
  return (kxx + kyy - 2.0 * kxy) * options.scale;
}

double mmd2(const EmbeddingSet& x, const EmbeddingSet& y, const MmdOptions& options) {
  return mmd2(to_matrix(x), to_matrix(y), options);
}

double contrastive(const std::map<std::string, double, std::less<>>& distances,
                   std::string_view target) {
  if (distances.size() < 2) {
    throw Error(errc::kInsufficientSamples, "contrastive score needs at least two triggers");
  }
  const auto it = distances.find(target);
  if (it == distances.end()) {
    throw Error(errc::kUnknownTrigger, fmt::format("no distance to trigger '{}'", target));
  }
  const double dt = it->second;
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(errc::kZeroDenominator,
                fmt::format("distance to target '{}' is {}, not positive", target, dt));
  }
  double sum = 0.0;
  for (const auto& [name, d] : distances) {
    if (name != target) {
      sum += d / dt;
    }
  }
  return sum - static_cast<double>(distances.size() - 1);
}

// ---------------------------------------------------------------------------

namespace {

struct Prepared {
  Eigen::MatrixXd rows;
  std::optional<GaussStats> stats;
};

std::string common_tag(std::span<const NamedSet> a, std::span<const NamedSet> b, bool fid_space) {
  std::string tag;
  bool first = true;
  for (auto span : {a, b}) {
    for (const auto& s : span) {
      const EmbeddingSet* e = fid_space ? s.fid_space : s.cmmd_space;
      if (e == nullptr) {
        throw Error(errc::kInvalidArgument,
                    fmt::format("set '{}' has no {} embeddings", s.name, fid_space ? "FID" : "CMMD"));
      }
      if (first) {
        tag = e->space_tag;
        first = false;
      } else if (e->space_tag != tag) {
        throw Error(errc::kSpaceTagMismatch,
                    fmt::format("set '{}' is in space '{}', expected '{}'", s.name, e->space_tag,
                                tag));
      }
    }
  }
  return tag;
}

}  // namespace

DistanceMatrix cross_matrix(std::span<const NamedSet> sets, std::span<const NamedSet> triggers,
                            MetricKind which, const MmdOptions& options, int workers) {
  const bool want_fid = which != MetricKind::kCmmd;
  const bool want_cmmd = which != MetricKind::kFid;
  DistanceMatrix out;
  for (const auto& s : sets) {
    out.rows.push_back(s.name);
  }
  for (const auto& t : triggers) {
    out.cols.push_back(t.name);
  }
  if (want_fid) {
    out.fid_space_tag = common_tag(sets, triggers, true);
  }
  if (want_cmmd) {
    out.cmmd_space_tag = common_tag(sets, triggers, false);
  }
  auto count_of = [&](const NamedSet& s) {
    return want_fid ? s.fid_space->n : s.cmmd_space->n;
  };
  for (const auto& s : sets) {
    out.row_counts.push_back(count_of(s));
  }
  for (const auto& t : triggers) {
    out.col_counts.push_back(count_of(t));
  }

  const auto nr = static_cast<Eigen::Index>(sets.size());
  const auto nc = static_cast<Eigen::Index>(triggers.size());

  // Distinct inputs by content; each is converted and fitted once.
  auto prepare = [&](bool fid_space) {
    std::vector<const EmbeddingSet*> unique;
    std::unordered_map<std::uint64_t, std::size_t> index;
    std::vector<std::size_t> row_ids;
    std::vector<std::size_t> col_ids;
    auto add = [&](const EmbeddingSet* e) {
      const std::uint64_t h = e->content_hash();
      const auto [it, inserted] = index.emplace(h, unique.size());
      if (inserted) {
        unique.push_back(e);
      }
      return it->second;
    };
    for (const auto& s : sets) {
      row_ids.push_back(add(fid_space ? s.fid_space : s.cmmd_space));
    }
    for (const auto& t : triggers) {
      col_ids.push_back(add(fid_space ? t.fid_space : t.cmmd_space));
    }
    std::vector<Prepared> prepared(unique.size());
    parallel_for(unique.size(), workers, [&](std::size_t i) {
      prepared[i].rows = to_matrix(*unique[i]);
      if (fid_space && unique[i]->n >= unique[i]->dim && unique[i]->n >= 2) {
        prepared[i].stats = gaussian_stats(prepared[i].rows);
      }
    });
    return std::make_tuple(std::move(prepared), std::move(row_ids), std::move(col_ids));
  };

  if (want_fid) {
    auto [prep, row_ids, col_ids] = prepare(true);
    Eigen::MatrixXd m(nr, nc);
    parallel_for(static_cast<std::size_t>(nr * nc), workers, [&](std::size_t k) {
      const auto r = static_cast<Eigen::Index>(k) / nc;
      const auto c = static_cast<Eigen::Index>(k) % nc;
      const Prepared& a = prep[row_ids[static_cast<std::size_t>(r)]];
      const Prepared& b = prep[col_ids[static_cast<std::size_t>(c)]];
      m(r, c) = (a.stats && b.stats) ? frechet_distance(*a.stats, *b.stats)
                                     : fid_factored(a.rows, b.rows);
    });
    out.fid = std::move(m);
  }
  if (want_cmmd) {
    auto [prep, row_ids, col_ids] = prepare(false);
    Eigen::MatrixXd m(nr, nc);
    parallel_for(static_cast<std::size_t>(nr * nc), workers, [&](std::size_t k) {
      const auto r = static_cast<Eigen::Index>(k) / nc;
      const auto c = static_cast<Eigen::Index>(k) % nc;
      const double v = mmd2(prep[row_ids[static_cast<std::size_t>(r)]].rows,
                            prep[col_ids[static_cast<std::size_t>(c)]].rows, options);
      m(r, c) = std::max(v, 0.0);
    });
    out.cmmd = std::move(m);
  }
  return out;
}

DataTable DistanceMatrix::to_table() const {
  DataTable t;
  t.key_column = "set";
  t.rows = rows;
  t.values.assign(rows.size(), {});
  const auto nc = static_cast<Eigen::Index>(cols.size());
  for (const auto& [suffix, mat] : {std::pair{"_fid", &fid}, std::pair{"_cmmd", &cmmd}}) {
    if (!mat->has_value()) {
      continue;
    }
    for (Eigen::Index c = 0; c < nc; ++c) {
      t.columns.push_back(cols[static_cast<std::size_t>(c)] + suffix);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        t.values[r].push_back((**mat)(static_cast<Eigen::Index>(r), c));
      }
    }
  }
  return t;
}

DistanceMatrix DistanceMatrix::from_table(const DataTable& table) {
  DistanceMatrix m;
  m.rows = table.rows;
  std::vector<std::pair<std::size_t, std::size_t>> fid_cols;   // (table col, trigger)
  std::vector<std::pair<std::size_t, std::size_t>> cmmd_cols;
  auto trigger_index = [&m](const std::string& name) {
    for (std::size_t i = 0; i < m.cols.size(); ++i) {
      if (m.cols[i] == name) {
        return i;
      }
    }
    m.cols.push_back(name);
    return m.cols.size() - 1;
  };
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    const std::string& name = table.columns[i];
    if (name.starts_with("c_fid_") || name.starts_with("c_cmmd_")) {
      continue;
    }
    if (name.size() > 4 && name.ends_with("_fid")) {
      fid_cols.emplace_back(i, trigger_index(name.substr(0, name.size() - 4)));
    } else if (name.size() > 5 && name.ends_with("_cmmd")) {
      cmmd_cols.emplace_back(i, trigger_index(name.substr(0, name.size() - 5)));
    } else {
      throw Error(errc::kParse, fmt::format("distance column '{}' is not <trigger>_fid or "
                                            "<trigger>_cmmd",
                                            name));
    }
  }
  const auto nr = static_cast<Eigen::Index>(m.rows.size());
  const auto nc = static_cast<Eigen::Index>(m.cols.size());
  auto fill = [&](const auto& cols) {
    Eigen::MatrixXd mat =
        Eigen::MatrixXd::Constant(nr, nc, std::numeric_limits<double>::quiet_NaN());
    for (const auto& [tc, trig] : cols) {
      for (Eigen::Index r = 0; r < nr; ++r) {
        mat(r, static_cast<Eigen::Index>(trig)) = table.values[static_cast<std::size_t>(r)][tc];
      }
    }
    return mat;
  };
  if (!fid_cols.empty()) {
    m.fid = fill(fid_cols);
  }
  if (!cmmd_cols.empty()) {
    m.cmmd = fill(cmmd_cols);
  }
  return m;
}

std::string DistanceMatrix::to_json(const MmdOptions& options) const {
  using ojson = nlohmann::ordered_json;
  auto mat_json = [](const Eigen::MatrixXd& m) {
    ojson rows = ojson::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      ojson row = ojson::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        row.push_back(m(r, c));
      }
      rows.push_back(std::move(row));
    }
    return rows;
  };
  ojson doc{
      {"rows", rows},
      {"cols", cols},
      {"fid", fid ? mat_json(*fid) : ojson(nullptr)},
      {"cmmd", cmmd ? mat_json(*cmmd) : ojson(nullptr)},
      {"space_tags", ojson{{"fid", fid_space_tag}, {"cmmd", cmmd_space_tag}}},
      {"counts", ojson{{"rows", row_counts}, {"cols", col_counts}}},
      {"cmmd_options",
       ojson{{"sigma", options.sigma},
             {"scale", options.scale},
             {"estimator", estimator_name(options.estimator)}}},
  };
  return doc.dump(2) + "\n";
}

std::vector<std::pair<std::string, std::vector<double>>> contrastive_columns(
    const DistanceMatrix& m, std::string_view target) {
  std::vector<std::pair<std::string, std::vector<double>>> out;
  for (const auto& [prefix, mat] : {std::pair{"c_fid_", &m.fid}, std::pair{"c_cmmd_", &m.cmmd}}) {
    if (!mat->has_value()) {
      continue;
    }
    std::vector<double> col;
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
      std::map<std::string, double, std::less<>> d;
      bool complete = true;
      for (std::size_t c = 0; c < m.cols.size(); ++c) {
        const double v = (**mat)(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        complete = complete && !std::isnan(v);
        d.emplace(m.cols[c], v);
      }
      if (!d.contains(target)) {
        throw Error(errc::kUnknownTrigger, fmt::format("no column for trigger '{}'", target));
      }
      col.push_back(complete ? contrastive(d, target) : std::numeric_limits<double>::quiet_NaN());
    }
    out.emplace_back(std::string(prefix) + std::string(target), std::move(col));
  }
  return out;
}

}  // namespace wxforge
