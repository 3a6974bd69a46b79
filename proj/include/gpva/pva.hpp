#pragma once

// Principal variables analysis under the variance-explained criterion.
//
// Selection minimizes the trace of the conditional covariance of the omitted
// variables. For the Student-t and generalized Laplace latent families the
// conditional covariance is evaluated at the conditioning variables' mean,
// which scales the Gaussian Schur complement by a constant per conditioning
// step.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "gpva/common.hpp"
#include "gpva/corrkit.hpp"

namespace gpva {

/// Latent distribution family: Gaussian, multivariate t(nu) or generalized Laplace(r).
class LatentFamily {
public:
  enum class Tag { Gaussian, StudentT, Laplace };

  static LatentFamily gaussian() { return LatentFamily(Tag::Gaussian, 0.0); }
  static LatentFamily student_t(double nu) {
    if (!(nu > 1.0)) throw std::invalid_argument("Student-t family requires nu > 1");
    return LatentFamily(Tag::StudentT, nu);
  }
  static LatentFamily laplace(double r) {
    if (!(r > 0.5)) throw std::invalid_argument("Laplace family requires r > 0.5");
    return LatentFamily(Tag::Laplace, r);
  }

  Tag tag() const noexcept { return tag_; }
  /// nu for Student-t, r for Laplace, 0 for Gaussian.
  double parameter() const noexcept { return param_; }

  std::string name() const {
    switch (tag_) {
    case Tag::Gaussian: return "gaussian";
    case Tag::StudentT: return "student_t";
    case Tag::Laplace: return "laplace";
    }
    return "unknown";
  }

  bool operator==(const LatentFamily &) const = default;

private:
  LatentFamily(Tag t, double p) : tag_(t), param_(p) {}
  Tag tag_;
  double param_;
};

/// Parses "gaussian", "t:NU" / "student_t:NU", "laplace:R".
inline LatentFamily parse_latent_family(const std::string &s) {
  const auto colon = s.find(':');
  const std::string head = s.substr(0, colon);
  if (head == "gaussian" && colon == std::string::npos) return LatentFamily::gaussian();
  if (colon == std::string::npos) throw std::invalid_argument("family '" + s + "' needs a parameter");
  std::size_t used = 0;
  const std::string tail = s.substr(colon + 1);
  double value = 0.0;
  try {
    value = std::stod(tail, &used);
  } catch (const std::exception &) {
    throw std::invalid_argument("bad family parameter in '" + s + "'");
  }
  if (used != tail.size()) throw std::invalid_argument("bad family parameter in '" + s + "'");
  if (head == "t" || head == "student_t") return LatentFamily::student_t(value);
  if (head == "laplace") return LatentFamily::laplace(value);
  throw std::invalid_argument("unknown latent family '" + s + "'");
}

/// Scale applied to the Schur complement by one conditioning step.
inline double family_factor(const LatentFamily &f) {
  switch (f.tag()) {
  case LatentFamily::Tag::Gaussian: return 1.0;
  case LatentFamily::Tag::StudentT: return f.parameter() / (f.parameter() - 1.0);
  case LatentFamily::Tag::Laplace: return f.parameter() - 0.5;
  }
  return 1.0;
}

inline constexpr double kPivotTolerance = 1e-12;
inline constexpr double kConditionLimit = 1e12;

namespace detail {

inline void check_square(const Matrix &s) {
  if (s.rows() != s.cols()) throw std::invalid_argument("covariance matrix is not square");
  if (!s.allFinite()) throw std::invalid_argument("covariance matrix has non-finite entries");
}

inline std::vector<Index> complement(Index p, const std::vector<Index> &subset) {
  std::vector<bool> in(static_cast<std::size_t>(p), false);
  for (Index j : subset) in[static_cast<std::size_t>(j)] = true;
  std::vector<Index> out;
  for (Index j = 0; j < p; ++j)
    if (!in[static_cast<std::size_t>(j)]) out.push_back(j);
  return out;
}

inline void check_subset(Index p, const std::vector<Index> &subset) {
  std::vector<bool> seen(static_cast<std::size_t>(p), false);
  for (Index j : subset) {
    if (j < 0 || j >= p) throw std::out_of_range("subset index " + std::to_string(j) + " out of range");
    if (seen[static_cast<std::size_t>(j)]) throw std::invalid_argument("subset index " + std::to_string(j) + " repeated");
    seen[static_cast<std::size_t>(j)] = true;
  }
}

// Trace of the (unscaled) Schur complement after conditioning on j.
inline double conditioned_trace(const Matrix &s, double total_trace, Index j) {
  const double pivot = s(j, j);
  if (!(pivot > kPivotTolerance)) throw std::runtime_error("degenerate pivot");
  double off = 0.0;
  for (Index i = 0; i < s.rows(); ++i)
    if (i != j) off += s(i, j) * s(i, j);
  return total_trace - pivot - off / pivot;
}

} // namespace detail

/// Conditional covariance of all variables except j given variable j, scaled by
/// the family factor. Result is (p-1) x (p-1) in ascending original order.
inline Matrix cond_cov_single(const Matrix &sigma, Index j, const LatentFamily &family) {
  detail::check_square(sigma);
  const Index p = sigma.rows();
  if (p < 2) throw std::invalid_argument("conditioning needs p >= 2");
  if (j < 0 || j >= p) throw std::out_of_range("conditioning index out of range");
  const double pivot = sigma(j, j);
  if (!(pivot > kPivotTolerance)) throw std::runtime_error("degenerate pivot");

  const auto keep = detail::complement(p, {j});
  const Index m = p - 1;
  Matrix out(m, m);
  const double c = family_factor(family);
  for (Index a = 0; a < m; ++a)
    for (Index b = a; b < m; ++b) {
      const Index ia = keep[a], ib = keep[b];
      const double v = c * (sigma(ia, ib) - sigma(ia, j) * sigma(ib, j) / pivot);
      out(a, b) = v;
      out(b, a) = v;
    }
  return out;
}

/// Conditional covariance of the complement of `subset` given `subset`,
/// scaled by family_factor^|subset|. Rows/columns follow the ascending order of
/// the complement.
inline Matrix cond_cov_subset(const Matrix &sigma, const std::vector<Index> &subset, const LatentFamily &family) {
  detail::check_square(sigma);
  const Index p = sigma.rows();
  if (subset.empty()) throw std::invalid_argument("conditioning set is empty");
  if (static_cast<Index>(subset.size()) >= p) throw std::invalid_argument("conditioning set must leave at least one variable");
  detail::check_subset(p, subset);

  const auto rest = detail::complement(p, subset);
  const Index q = static_cast<Index>(subset.size());
  const Index m = static_cast<Index>(rest.size());
  Matrix s11(q, q), s21(m, q), s22(m, m);
  for (Index a = 0; a < q; ++a)
    for (Index b = 0; b < q; ++b) s11(a, b) = sigma(subset[a], subset[b]);
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < q; ++b) s21(a, b) = sigma(rest[a], subset[b]);
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b) s22(a, b) = sigma(rest[a], rest[b]);

  Eigen::LLT<Matrix> llt(s11);
  if (llt.info() != Eigen::Success) throw std::runtime_error("conditioning block is not positive definite");
  if (llt.rcond() < 1.0 / kConditionLimit) throw std::runtime_error("conditioning block is numerically singular");

  const Matrix half = llt.matrixL().solve(s21.transpose()); // L^-1 S12
  Matrix out = s22 - half.transpose() * half;
  out = 0.5 * (out + out.transpose()).eval();
  out *= std::pow(family_factor(family), static_cast<double>(q));
  return out;
}

/// Ordered picks of a principal-variable selection.
struct SelectionResult {
  std::vector<Index> chosen;
  /// Trace before any pick, then after each pick (length chosen.size() + 1).
  std::vector<double> residual_trace;
  std::optional<CorrFamily> method;
  LatentFamily family = LatentFamily::gaussian();
  /// The input was not PD and went through repair_pd first.
  bool repaired_input = false;
};

namespace detail {

// Greedy conditioning restricted to `candidates` (original indices).
inline SelectionResult greedy_over(const Matrix &sigma, Index q, const LatentFamily &family,
                                   const std::vector<Index> &candidates) {
  const double c = family_factor(family);
  Matrix s = sigma;
  std::vector<Index> remaining(static_cast<std::size_t>(sigma.rows()));
  std::iota(remaining.begin(), remaining.end(), Index{0});

  SelectionResult out;
  out.family = family;
  out.residual_trace.push_back(s.trace());
  std::vector<bool> allowed(static_cast<std::size_t>(sigma.rows()), false);
  for (Index j : candidates) allowed[static_cast<std::size_t>(j)] = true;

  for (Index step = 0; step < q; ++step) {
    const double total = s.trace();
    Index best = -1;
    double best_trace = std::numeric_limits<double>::infinity();
    // remaining[] is ascending, so strict < keeps the lowest original index on ties.
    for (Index i = 0; i < s.rows(); ++i) {
      if (!allowed[static_cast<std::size_t>(remaining[i])]) continue;
      const double tr = c * conditioned_trace(s, total, i);
      if (tr < best_trace) {
        best_trace = tr;
        best = i;
      }
    }
    if (best < 0) throw std::logic_error("no admissible candidate left");
    out.chosen.push_back(remaining[best]);
    s = cond_cov_single(s, best, family);
    remaining.erase(remaining.begin() + best);
    out.residual_trace.push_back(s.trace());
  }
  return out;
}

inline bool is_positive_definite(const Matrix &s) {
  Eigen::LLT<Matrix> llt(s);
  return llt.info() == Eigen::Success;
}

} // namespace detail

/// Greedy principal variables: repeatedly condition on the variable whose
/// conditioning leaves the smallest residual trace. Ties go to the lowest
/// original index. A non-PD input is repaired first.
inline SelectionResult greedy_select(const Matrix &sigma, Index q, const LatentFamily &family,
                                     double pd_floor = kDefaultPdFloor) {
  detail::check_square(sigma);
  const Index p = sigma.rows();
  if (q < 1 || q >= p) throw std::invalid_argument("q must satisfy 1 <= q < p (got q=" + std::to_string(q) + ", p=" + std::to_string(p) + ")");
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-9) throw std::invalid_argument("covariance matrix is not symmetric");

  std::vector<Index> all(static_cast<std::size_t>(p));
  std::iota(all.begin(), all.end(), Index{0});
  if (detail::is_positive_definite(sigma)) return detail::greedy_over(sigma, q, family, all);

  const auto fixed = repair_pd(sigma, pd_floor);
  auto out = detail::greedy_over(fixed.values, q, family, all);
  out.repaired_input = true;
  return out;
}

inline SelectionResult greedy_select(const CorrelationMatrix &sigma, Index q, const LatentFamily &family,
                                     double pd_floor = kDefaultPdFloor) {
  auto out = greedy_select(sigma.values, q, family, pd_floor);
  out.method = sigma.family;
  out.repaired_input = out.repaired_input || sigma.repaired;
  return out;
}

inline constexpr std::uint64_t kExhaustiveLimit = 1'000'000;

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > (std::uint64_t{1} << 62)) return std::numeric_limits<std::uint64_t>::max();
  }
  return r;
}

/// Exact minimizer of the residual trace over all subsets of size q.
/// Ties keep the lexicographically first subset. `chosen` lists the subset in
/// the order greedy conditioning restricted to it would pick its members.
inline SelectionResult exhaustive_select(const Matrix &sigma, Index q, const LatentFamily &family) {
  detail::check_square(sigma);
  const Index p = sigma.rows();
  if (q < 1 || q >= p) throw std::invalid_argument("q must satisfy 1 <= q < p");
  if (binomial(static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(q)) > kExhaustiveLimit)
    throw std::invalid_argument("too many subsets for exhaustive search; use greedy_select");

  std::vector<Index> subset(static_cast<std::size_t>(q));
  std::iota(subset.begin(), subset.end(), Index{0});
  std::vector<Index> best;
  double best_trace = std::numeric_limits<double>::infinity();
  while (true) {
    const double tr = cond_cov_subset(sigma, subset, family).trace();
    if (tr < best_trace) {
      best_trace = tr;
      best = subset;
    }
    // next combination in lexicographic order
    Index i = q - 1;
    while (i >= 0 && subset[i] == p - q + i) --i;
    if (i < 0) break;
    ++subset[i];
    for (Index k = i + 1; k < q; ++k) subset[k] = subset[k - 1] + 1;
  }
  return detail::greedy_over(sigma, q, family, best);
}

/// Residual trace tr(Cov(X | X_S)); conditioned coordinates contribute zero.
inline double residual_trace(const Matrix &sigma, std::vector<Index> subset, const LatentFamily &family) {
  std::sort(subset.begin(), subset.end());
  return cond_cov_subset(sigma, subset, family).trace();
}

/// Relative explanatory efficiency of `subset` against `reference`:
/// tr(Cov(X | X_reference)) / tr(Cov(X | X_subset)).
/// Both traces carry the same factor family_factor^q, so the ratio is formed
/// from the unscaled traces and is exactly family-independent.
inline double ree(const Matrix &sigma, const std::vector<Index> &subset, const std::vector<Index> &reference,
                  const LatentFamily &family) {
  if (subset.size() != reference.size()) throw std::invalid_argument("REE subsets differ in size");
  (void)family_factor(family);
  const auto gaussian = LatentFamily::gaussian();
  return residual_trace(sigma, reference, gaussian) / residual_trace(sigma, subset, gaussian);
}

} // namespace gpva
