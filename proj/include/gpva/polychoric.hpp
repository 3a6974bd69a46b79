#pragma once

// Two-step maximum-likelihood polychoric and polyserial correlations.
//
// Thresholds are fixed at normal quantiles of the cumulative marginal
// proportions; the latent correlation is then found by 1-D maximization of
// the likelihood over [-0.999, 0.999]. Empty contingency cells contribute
// nothing (no continuity correction).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "gpva/bvn.hpp"
#include "gpva/common.hpp"
#include "gpva/corrkit.hpp"

namespace gpva {

inline constexpr double kRhoBound = 0.999;

/// Ordered level labels of an ordinal column and each observation's level index.
struct OrdinalCodes {
  std::vector<double> labels; // ascending
  std::vector<int> codes;     // 0-based index into labels, one per observation
  std::vector<std::int64_t> counts;

  int levels() const { return static_cast<int>(labels.size()); }
};

inline OrdinalCodes encode_ordinal(const Eigen::Ref<const Vector> &column) {
  OrdinalCodes out;
  std::map<double, int> index;
  for (Index i = 0; i < column.size(); ++i) {
    if (!std::isfinite(column[i])) throw std::invalid_argument("missing or non-finite ordinal value");
    index.emplace(column[i], 0);
  }
  int k = 0;
  for (auto &[label, idx] : index) {
    idx = k++;
    out.labels.push_back(label);
  }
  out.counts.assign(out.labels.size(), 0);
  out.codes.reserve(static_cast<std::size_t>(column.size()));
  for (Index i = 0; i < column.size(); ++i) {
    const int c = index.at(column[i]);
    out.codes.push_back(c);
    ++out.counts[static_cast<std::size_t>(c)];
  }
  return out;
}

/// Cross-tabulation of two ordinal columns.
struct ContingencyTable {
  std::vector<double> row_labels;
  std::vector<double> col_labels;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;

  std::int64_t total() const { return counts.sum(); }
};

inline ContingencyTable make_contingency_table(const OrdinalCodes &x, const OrdinalCodes &y) {
  if (x.codes.size() != y.codes.size()) throw std::invalid_argument("ordinal columns differ in length");
  ContingencyTable t{x.labels, y.labels, {}};
  t.counts.setZero(x.levels(), y.levels());
  for (std::size_t i = 0; i < x.codes.size(); ++i) ++t.counts(x.codes[i], y.codes[i]);
  return t;
}

/// Thresholds -inf = tau_0 < tau_1 < ... < tau_L = +inf from marginal counts.
inline std::vector<double> thresholds_from_counts(const std::vector<std::int64_t> &counts) {
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  std::vector<double> tau;
  tau.reserve(counts.size() + 1);
  tau.push_back(-INFINITY);
  std::int64_t cum = 0;
  for (std::size_t k = 0; k + 1 < counts.size(); ++k) {
    cum += counts[k];
    tau.push_back(norm_quantile(static_cast<double>(cum) / static_cast<double>(total)));
  }
  tau.push_back(INFINITY);
  return tau;
}

struct LatentCorrelation {
  double rho = 0.0;
  double loglik = 0.0;
  /// True when the estimate sits on the +-0.999 clamp.
  bool at_boundary = false;
  std::vector<double> thresholds_x; // empty for the continuous side of a polyserial pair
  std::vector<double> thresholds_y;
};

namespace detail {

inline double safe_log(double p) {
  return std::log(std::max(p, std::numeric_limits<double>::min()));
}

// Phi(a) - Phi(b) for a >= b, evaluated on the tail where it keeps precision.
inline double norm_interval(double a, double b) {
  if (b > 0.0) return norm_cdf(-b) - norm_cdf(-a);
  return norm_cdf(a) - norm_cdf(b);
}

struct Maximum {
  double x;
  double value;
};

// Maximize f on [-kRhoBound, kRhoBound]: coarse scan, Brent refinement inside the
// best bracket, and a final comparison against the bracket endpoints.
inline Maximum maximize_rho(const std::function<double(double)> &f) {
  std::vector<double> grid;
  grid.push_back(-kRhoBound);
  for (int k = -9; k <= 9; ++k) grid.push_back(0.1 * k);
  grid.push_back(kRhoBound);

  std::size_t best = 0;
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = f(grid[i]);
    if (values[i] > values[best]) best = i;
  }
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[best + 1 == grid.size() ? best : best + 1];

  Maximum result{grid[best], values[best]};
  if (hi > lo) {
    std::uintmax_t max_iter = 200;
    const auto [x, neg] = boost::math::tools::brent_find_minima([&](double r) { return -f(r); }, lo, hi, 30, max_iter);
    if (-neg >= result.value) result = {x, -neg};
  }
  return result;
}

inline double polychoric_loglik_impl(const ContingencyTable &t, const std::vector<double> &tx,
                                     const std::vector<double> &ty, double rho) {
  const Index r = t.counts.rows();
  const Index c = t.counts.cols();
  Matrix cdf(r + 1, c + 1);
  for (Index a = 0; a <= r; ++a)
    for (Index b = 0; b <= c; ++b) cdf(a, b) = bvn_cdf(tx[a], ty[b], rho);
  double ll = 0.0;
  for (Index a = 0; a < r; ++a)
    for (Index b = 0; b < c; ++b) {
      const auto n = t.counts(a, b);
      if (n == 0) continue;
      const double pi = cdf(a + 1, b + 1) - cdf(a, b + 1) - cdf(a + 1, b) + cdf(a, b);
      ll += static_cast<double>(n) * safe_log(pi);
    }
  return ll;
}

inline LatentCorrelation finish(const Maximum &m, std::vector<double> tx, std::vector<double> ty) {
  LatentCorrelation out;
  out.rho = std::clamp(m.x, -kRhoBound, kRhoBound);
  out.loglik = m.value;
  out.at_boundary = std::abs(out.rho) >= kRhoBound;
  out.thresholds_x = std::move(tx);
  out.thresholds_y = std::move(ty);
  return out;
}

} // namespace detail

/// Multinomial log-likelihood of a contingency table at latent correlation rho,
/// with thresholds taken from the table margins.
inline double polychoric_loglik(const ContingencyTable &t, double rho) {
  std::vector<std::int64_t> rows(static_cast<std::size_t>(t.counts.rows()));
  std::vector<std::int64_t> cols(static_cast<std::size_t>(t.counts.cols()));
  for (Index a = 0; a < t.counts.rows(); ++a) rows[a] = t.counts.row(a).sum();
  for (Index b = 0; b < t.counts.cols(); ++b) cols[b] = t.counts.col(b).sum();
  return detail::polychoric_loglik_impl(t, thresholds_from_counts(rows), thresholds_from_counts(cols), rho);
}

inline LatentCorrelation polychoric_from_table(const ContingencyTable &t) {
  if (t.counts.rows() < 2 || t.counts.cols() < 2) throw std::invalid_argument("degenerate ordinal column");
  std::vector<std::int64_t> rows(static_cast<std::size_t>(t.counts.rows()));
  std::vector<std::int64_t> cols(static_cast<std::size_t>(t.counts.cols()));
  for (Index a = 0; a < t.counts.rows(); ++a) rows[a] = t.counts.row(a).sum();
  for (Index b = 0; b < t.counts.cols(); ++b) cols[b] = t.counts.col(b).sum();
  for (auto n : rows)
    if (n == 0) throw std::invalid_argument("contingency table has an empty row level");
  for (auto n : cols)
    if (n == 0) throw std::invalid_argument("contingency table has an empty column level");
  auto tx = thresholds_from_counts(rows);
  auto ty = thresholds_from_counts(cols);
  const auto m = detail::maximize_rho([&](double rho) { return detail::polychoric_loglik_impl(t, tx, ty, rho); });
  return detail::finish(m, std::move(tx), std::move(ty));
}

/// Polychoric correlation of two ordinal columns (codes only matter by order).
inline LatentCorrelation polychoric_pair(const Eigen::Ref<const Vector> &x, const Eigen::Ref<const Vector> &y) {
  if (x.size() != y.size()) throw std::invalid_argument("columns differ in length");
  if (x.size() < 10) throw std::invalid_argument("polychoric correlation needs at least 10 observations");
  const auto cx = encode_ordinal(x);
  const auto cy = encode_ordinal(y);
  if (cx.levels() < 2 || cy.levels() < 2) throw std::invalid_argument("degenerate ordinal column");
  return polychoric_from_table(make_contingency_table(cx, cy));
}

/// Polyserial correlation between a continuous column x and an ordinal column y.
/// x is normalized through its copula scores before the likelihood is formed.
inline LatentCorrelation polyserial_pair(const Eigen::Ref<const Vector> &x, const Eigen::Ref<const Vector> &y) {
  if (x.size() != y.size()) throw std::invalid_argument("columns differ in length");
  if (x.size() < 10) throw std::invalid_argument("polyserial correlation needs at least 10 observations");
  for (Index i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i])) throw std::invalid_argument("missing or non-finite continuous value");
  if (x.maxCoeff() == x.minCoeff()) throw std::invalid_argument("degenerate continuous column");
  const auto cy = encode_ordinal(y);
  if (cy.levels() < 2) throw std::invalid_argument("degenerate ordinal column");

  const Vector z = copula_scores(x);
  auto tau = thresholds_from_counts(cy.counts);

  // Scores grouped by level so each evaluation streams contiguous memory.
  std::vector<std::vector<double>> by_level(static_cast<std::size_t>(cy.levels()));
  for (std::size_t i = 0; i < cy.codes.size(); ++i)
    by_level[static_cast<std::size_t>(cy.codes[i])].push_back(z[static_cast<Index>(i)]);

  const auto loglik = [&](double rho) {
    const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
    double ll = 0.0;
    for (std::size_t k = 0; k < by_level.size(); ++k) {
      const double lo = tau[k];
      const double hi = tau[k + 1];
      for (double zi : by_level[k]) {
        const double a = hi == INFINITY ? INFINITY : (hi - rho * zi) / s;
        const double b = lo == -INFINITY ? -INFINITY : (lo - rho * zi) / s;
        double pr;
        if (a == INFINITY) pr = norm_cdf(-b);
        else if (b == -INFINITY) pr = norm_cdf(a);
        else pr = detail::norm_interval(a, b);
        ll += detail::safe_log(pr);
      }
    }
    return ll;
  };
  const auto m = detail::maximize_rho(loglik);
  return detail::finish(m, {}, std::move(tau));
}

/// Log-likelihood used by polyserial_pair, exposed for optimizer checks.
inline double polyserial_loglik(const Eigen::Ref<const Vector> &x, const Eigen::Ref<const Vector> &y, double rho) {
  const Vector z = copula_scores(x);
  const auto cy = encode_ordinal(y);
  const auto tau = thresholds_from_counts(cy.counts);
  const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
  double ll = 0.0;
  for (std::size_t i = 0; i < cy.codes.size(); ++i) {
    const auto k = static_cast<std::size_t>(cy.codes[i]);
    const double zi = z[static_cast<Index>(i)];
    const double a = tau[k + 1] == INFINITY ? INFINITY : (tau[k + 1] - rho * zi) / s;
    const double b = tau[k] == -INFINITY ? -INFINITY : (tau[k] - rho * zi) / s;
    double pr;
    if (a == INFINITY) pr = norm_cdf(-b);
    else if (b == -INFINITY) pr = norm_cdf(a);
    else pr = detail::norm_interval(a, b);
    ll += detail::safe_log(pr);
  }
  return ll;
}

/// Pairwise latent-Gaussian correlation matrix for mixed continuous/ordinal
/// data: copula-score Pearson for continuous pairs, polychoric for ordinal
/// pairs, polyserial for mixed pairs. The result is PD-repaired.
inline CorrelationMatrix mixed_corr(const Matrix &data, const std::vector<VariableKind> &schema,
                                    double pd_floor = kDefaultPdFloor) {
  const Index n = data.rows();
  const Index p = data.cols();
  if (static_cast<Index>(schema.size()) != p) throw std::invalid_argument("schema length does not match data width");
  detail::check_complete(data);
  if (n < 2) throw std::invalid_argument("correlation needs at least 2 observations");

  std::vector<Index> cont;
  for (Index j = 0; j < p; ++j) {
    if (schema[j].is_ordinal()) {
      if (data.col(j).maxCoeff() == data.col(j).minCoeff()) throw ColumnError(j, "degenerate ordinal column");
    } else {
      cont.push_back(j);
    }
  }

  Matrix r = Matrix::Identity(p, p);
  if (!cont.empty()) {
    Matrix scores(n, static_cast<Index>(cont.size()));
    for (std::size_t c = 0; c < cont.size(); ++c) scores.col(static_cast<Index>(c)) = copula_scores(data.col(cont[c]));
    const Matrix rc = detail::pearson_matrix(scores, cont);
    for (std::size_t a = 0; a < cont.size(); ++a)
      for (std::size_t b = 0; b < cont.size(); ++b) r(cont[a], cont[b]) = rc(static_cast<Index>(a), static_cast<Index>(b));
  }

  CorrelationMatrix out{Matrix{}, CorrFamily::Polychoric, false, {}};
  for (Index a = 0; a < p; ++a) {
    for (Index b = a + 1; b < p; ++b) {
      const bool oa = schema[a].is_ordinal();
      const bool ob = schema[b].is_ordinal();
      if (!oa && !ob) continue;
      LatentCorrelation est;
      try {
        if (oa && ob) est = polychoric_pair(data.col(a), data.col(b));
        else if (ob) est = polyserial_pair(data.col(a), data.col(b));
        else est = polyserial_pair(data.col(b), data.col(a));
      } catch (const std::invalid_argument &e) {
        throw ColumnError(oa ? a : b, e.what());
      }
      r(a, b) = est.rho;
      r(b, a) = est.rho;
      if (est.at_boundary) out.boundary_pairs.emplace_back(a, b);
    }
  }
  out.values = std::move(r);
  auto repaired = repair_pd(std::move(out), pd_floor);
  return repaired;
}

} // namespace gpva
