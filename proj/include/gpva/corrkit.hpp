#pragma once

// Rank-based and moment-based correlation estimators plus PD repair.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gpva/bvn.hpp"
#include "gpva/common.hpp"

namespace gpva {

/// Column measurement type. Ordinal columns carry the number of ordered levels.
class VariableKind {
public:
  enum class Tag { Continuous, Ordinal };

  static VariableKind continuous() { return VariableKind(Tag::Continuous, 0); }
  static VariableKind ordinal(int levels) {
    if (levels < 2) throw std::invalid_argument("ordinal variable needs at least 2 levels");
    return VariableKind(Tag::Ordinal, levels);
  }

  Tag tag() const noexcept { return tag_; }
  bool is_ordinal() const noexcept { return tag_ == Tag::Ordinal; }
  bool is_continuous() const noexcept { return tag_ == Tag::Continuous; }
  /// Level count; 0 for continuous columns.
  int levels() const noexcept { return levels_; }

  bool operator==(const VariableKind &) const = default;

private:
  VariableKind(Tag t, int levels) : tag_(t), levels_(levels) {}
  Tag tag_;
  int levels_;
};

inline void check_finite_column(const Eigen::Ref<const Vector> &column, Index j) {
  for (Index i = 0; i < column.size(); ++i)
    if (!std::isfinite(column[i]))
      throw ColumnError(j, "missing or non-finite value at row " + std::to_string(i + 1));
}

/// 1-based ranks with ties receiving the mean of the positions they occupy.
inline Vector ranks_average_ties(const Eigen::Ref<const Vector> &column) {
  const Index n = column.size();
  if (n == 0) throw std::invalid_argument("empty input");
  for (Index i = 0; i < n; ++i)
    if (!std::isfinite(column[i])) throw std::invalid_argument("missing or non-finite value in column");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return column[a] < column[b]; });

  Vector ranks(n);
  Index i = 0;
  while (i < n) {
    Index j = i + 1;
    while (j < n && column[order[j]] == column[order[i]]) ++j;
    // positions i..j-1 (0-based) share rank mean of (i+1)..j
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (Index k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

namespace detail {

// `labels` maps local column positions to the caller's column indices for errors.
inline Matrix pearson_matrix(const Matrix &data, std::span<const Index> labels = {}) {
  const Index n = data.rows();
  const Index p = data.cols();
  if (n < 2) throw std::invalid_argument("correlation needs at least 2 observations");

  Matrix centered = data.rowwise() - data.colwise().mean();
  Vector scale(p);
  for (Index j = 0; j < p; ++j) {
    const double ss = centered.col(j).squaredNorm();
    if (!(ss > 0.0)) throw ColumnError(labels.empty() ? j : labels[j], "column has zero variance");
    scale[j] = 1.0 / std::sqrt(ss);
  }
  centered = centered * scale.asDiagonal();
  Matrix r = centered.transpose() * centered;
  for (Index a = 0; a < p; ++a) {
    r(a, a) = 1.0;
    for (Index b = a + 1; b < p; ++b) {
      const double v = std::clamp(0.5 * (r(a, b) + r(b, a)), -1.0, 1.0);
      r(a, b) = v;
      r(b, a) = v;
    }
  }
  return r;
}

inline void check_complete(const Matrix &data) {
  for (Index j = 0; j < data.cols(); ++j) check_finite_column(data.col(j), j);
}

} // namespace detail

/// Sample Pearson correlation matrix of the columns of `data` (n x p).
inline CorrelationMatrix pearson_corr(const Matrix &data) {
  detail::check_complete(data);
  return CorrelationMatrix{detail::pearson_matrix(data), CorrFamily::Pearson, false, {}};
}

/// Spearman correlation: Pearson correlation of average-tie ranks.
inline CorrelationMatrix spearman_corr(const Matrix &data) {
  detail::check_complete(data);
  if (data.rows() < 2) throw std::invalid_argument("correlation needs at least 2 observations");
  Matrix ranks(data.rows(), data.cols());
  for (Index j = 0; j < data.cols(); ++j) ranks.col(j) = ranks_average_ties(data.col(j));
  return CorrelationMatrix{detail::pearson_matrix(ranks), CorrFamily::Spearman, false, {}};
}

/// Normal scores Phi^-1(rank / (n + 1)) using average-tie ranks.
inline Vector copula_scores(const Eigen::Ref<const Vector> &column) {
  const Index n = column.size();
  if (n < 2) throw std::invalid_argument("copula scores need at least 2 observations");
  Vector r = ranks_average_ties(column);
  const double denom = static_cast<double>(n) + 1.0;
  for (Index i = 0; i < n; ++i) r[i] = norm_quantile(r[i] / denom);
  return r;
}

/// Nonparametric Gaussian copula correlation: Pearson correlation of normal scores.
inline CorrelationMatrix gaussian_copula_corr(const Matrix &data) {
  detail::check_complete(data);
  if (data.rows() < 2) throw std::invalid_argument("correlation needs at least 2 observations");
  Matrix scores(data.rows(), data.cols());
  for (Index j = 0; j < data.cols(); ++j) scores.col(j) = copula_scores(data.col(j));
  return CorrelationMatrix{detail::pearson_matrix(scores), CorrFamily::GaussianCopula, false, {}};
}

inline constexpr double kDefaultPdFloor = 1e-8;

inline double min_eigenvalue(const Matrix &m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Project a symmetric unit-diagonal matrix onto the positive-definite
/// correlation matrices by eigenvalue clipping at `floor` followed by
/// rescaling to unit diagonal. The clip/rescale pair is repeated until the
/// smallest eigenvalue clears the floor.
inline CorrelationMatrix repair_pd(CorrelationMatrix input, double floor = kDefaultPdFloor) {
  Matrix &m = input.values;
  const Index p = m.rows();
  if (p != m.cols()) throw std::invalid_argument("repair_pd: matrix is not square");
  if (!(floor > 0.0)) throw std::invalid_argument("repair_pd: floor must be positive");
  if (!m.allFinite()) throw std::invalid_argument("repair_pd: non-finite entries");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("repair_pd: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.eigenvalues().minCoeff() >= floor) return input;

  constexpr int kMaxRounds = 100;
  for (int round = 0; round < kMaxRounds; ++round) {
    Vector lambda = es.eigenvalues().cwiseMax(floor);
    const Matrix &v = es.eigenvectors();
    Matrix rebuilt = v * lambda.asDiagonal() * v.transpose();
    Vector inv_sd = rebuilt.diagonal().cwiseSqrt().cwiseInverse();
    rebuilt = inv_sd.asDiagonal() * rebuilt * inv_sd.asDiagonal();
    for (Index a = 0; a < p; ++a) {
      rebuilt(a, a) = 1.0;
      for (Index b = a + 1; b < p; ++b) {
        const double s = std::clamp(0.5 * (rebuilt(a, b) + rebuilt(b, a)), -1.0, 1.0);
        rebuilt(a, b) = s;
        rebuilt(b, a) = s;
      }
    }
    m = std::move(rebuilt);
    es.compute(m);
    if (es.eigenvalues().minCoeff() >= floor * (1.0 - 1e-6)) break;
  }
  if (es.eigenvalues().minCoeff() < floor * (1.0 - 1e-6))
    throw std::runtime_error("repair_pd: failed to reach the eigenvalue floor");
  input.repaired = true;
  return input;
}

/// Convenience overload for a bare matrix; the family tag is carried through unchanged.
inline CorrelationMatrix repair_pd(const Matrix &m, double floor = kDefaultPdFloor,
                                   CorrFamily family = CorrFamily::Pearson) {
  return repair_pd(CorrelationMatrix{m, family, false, {}}, floor);
}

} // namespace gpva
