#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace gpva {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Error raised by an estimator for a specific data column. `column()` is the
/// zero-based column index so callers holding column names can relabel it.
class ColumnError : public std::invalid_argument {
public:
  ColumnError(Index column, const std::string &what)
      : std::invalid_argument(what + " (column " + std::to_string(column) + ")"),
        column_(column), reason_(what) {}

  Index column() const noexcept { return column_; }
  const std::string &reason() const noexcept { return reason_; }

private:
  Index column_;
  std::string reason_;
};

enum class CorrFamily { Pearson, Spearman, GaussianCopula, Polychoric };

inline std::string_view to_string(CorrFamily f) {
  switch (f) {
  case CorrFamily::Pearson: return "pearson";
  case CorrFamily::Spearman: return "spearman";
  case CorrFamily::GaussianCopula: return "copula";
  case CorrFamily::Polychoric: return "polychoric";
  }
  return "unknown";
}

inline CorrFamily parse_corr_family(std::string_view s) {
  if (s == "pearson") return CorrFamily::Pearson;
  if (s == "spearman") return CorrFamily::Spearman;
  if (s == "copula" || s == "gaussian_copula") return CorrFamily::GaussianCopula;
  if (s == "polychoric") return CorrFamily::Polychoric;
  throw std::invalid_argument("unknown correlation method '" + std::string(s) + "'");
}

/// Estimated correlation matrix together with provenance flags.
struct CorrelationMatrix {
  Matrix values;
  CorrFamily family = CorrFamily::Pearson;
  /// Set when PD repair changed the estimate.
  bool repaired = false;
  /// Pairs (i < j) whose latent-correlation estimate hit the +-0.999 clamp.
  std::vector<std::pair<Index, Index>> boundary_pairs;

  Index size() const { return values.rows(); }
};

inline bool is_finite(const Matrix &m) { return m.allFinite(); }

} // namespace gpva
