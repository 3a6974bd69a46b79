#pragma once

// Simulation scenarios: random correlation matrices, latent samplers,
// monotone transformation suites, selection metrics and the replicate runner.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/chi_squared_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <Eigen/Cholesky>

#include "gpva/common.hpp"
#include "gpva/corrkit.hpp"
#include "gpva/polychoric.hpp"
#include "gpva/pva.hpp"

namespace gpva {

using Rng = std::mt19937_64;

/// Purpose of a random stream inside one replicate.
enum class StreamRole : std::uint64_t { Sigma = 1, Latent = 2, Aux = 3 };

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the (master, replicate, role) stream. Streams never depend on
/// execution order, so replicates may run on any thread.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replicate, StreamRole role) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ replicate);
  h = splitmix64(h ^ static_cast<std::uint64_t>(role));
  return h;
}

inline Rng make_stream(std::uint64_t master, std::uint64_t replicate, StreamRole role) {
  return Rng(derive_seed(master, replicate, role));
}

/// Correlation matrix from a Wishart(df = p, scale = I) draw rescaled to unit diagonal.
inline CorrelationMatrix sample_wishart_corr(Index p, Rng &rng) {
  if (p < 2) throw std::invalid_argument("sample_wishart_corr: p must be >= 2");
  boost::random::normal_distribution<double> normal;
  constexpr int kMaxAttempts = 10;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Matrix w = Matrix::Zero(p, p);
    Vector g(p);
    for (Index k = 0; k < p; ++k) {
      for (Index i = 0; i < p; ++i) g[i] = normal(rng);
      w.selfadjointView<Eigen::Lower>().rankUpdate(g);
    }
    w = w.selfadjointView<Eigen::Lower>();
    const Vector inv_sd = w.diagonal().cwiseSqrt().cwiseInverse();
    Matrix r = inv_sd.asDiagonal() * w * inv_sd.asDiagonal();
    for (Index a = 0; a < p; ++a) {
      r(a, a) = 1.0;
      for (Index b = a + 1; b < p; ++b) r(b, a) = r(a, b);
    }
    if (min_eigenvalue(r) >= 1e-10) return CorrelationMatrix{r, CorrFamily::Pearson, false, {}};
  }
  throw std::runtime_error("sample_wishart_corr: singular draws on every attempt");
}

/// n independent rows from the latent family with correlation matrix sigma.
inline Matrix sample_latent(Index n, const Matrix &sigma, const LatentFamily &family, Rng &rng) {
  const Index p = sigma.rows();
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw std::runtime_error("sample_latent: Cholesky factorization failed");
  const Matrix l = llt.matrixL();

  boost::random::normal_distribution<double> normal;
  boost::random::chi_squared_distribution<double> chi2(family.tag() == LatentFamily::Tag::StudentT ? family.parameter() : 1.0);
  boost::random::gamma_distribution<double> gamma(family.tag() == LatentFamily::Tag::Laplace ? family.parameter() : 1.0, 1.0);

  Matrix x(n, p);
  Vector z(p);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < p; ++k) z[k] = normal(rng);
    Vector row = l * z;
    switch (family.tag()) {
    case LatentFamily::Tag::Gaussian: break;
    case LatentFamily::Tag::StudentT: row /= std::sqrt(chi2(rng) / family.parameter()); break;
    case LatentFamily::Tag::Laplace: row *= std::sqrt(gamma(rng)); break;
    }
    x.row(i) = row.transpose();
  }
  return x;
}

/// Average-tie ranks divided by n + 1; values lie strictly inside (0, 1).
inline Vector ecdf_scaled(const Eigen::Ref<const Vector> &column) {
  Vector r = ranks_average_ties(column);
  return r / (static_cast<double>(column.size()) + 1.0);
}

/// The five monotone continuous maps applied to a scaled ECDF value (map in 1..5).
inline double continuous_map(int map, double u) {
  switch (map) {
  case 1: return std::min(u * u, 0.6 * 0.6);
  case 2: return std::min(std::pow(u, 6), std::pow(0.6, 6));
  case 3: return boost::math::gamma_p_inv(0.5, u); // Gamma(shape 0.5, scale 1) quantile
  case 4: return 1.0 / std::sqrt(1.0 - u);          // Pareto(shape 2, scale 1) quantile
  case 5: return std::exp(u) * (u > 0.9 ? 2.0 : 1.0);
  default: throw std::invalid_argument("continuous map index must be in 1..5");
  }
}

inline const std::vector<std::vector<double>> &ordinal_cut_points() {
  static const std::vector<std::vector<double>> cuts{
      {0.2}, {0.4, 0.6}, {0.2, 0.3}, {0.3, 0.5, 0.7}, {0.1, 0.2, 0.3}};
  return cuts;
}

/// Ordinal level (starting at 1) of a scaled ECDF value under map 1..5.
inline int ordinal_map(int map, double u) {
  if (map < 1 || map > 5) throw std::invalid_argument("ordinal map index must be in 1..5");
  int level = 1;
  for (double cut : ordinal_cut_points()[static_cast<std::size_t>(map - 1)])
    if (u > cut) ++level;
  return level;
}

/// Number of levels produced by ordinal map 1..5.
inline int ordinal_map_levels(int map) { return static_cast<int>(ordinal_cut_points().at(static_cast<std::size_t>(map - 1)).size()) + 1; }

/// Map assigned to the t-th target (0-based): maps cycle 1..5.
inline int map_for_target(std::size_t position) { return static_cast<int>(position % 5) + 1; }

namespace detail {

inline void check_targets(const Matrix &data, const std::vector<Index> &targets) {
  std::set<Index> seen;
  for (Index t : targets) {
    if (t < 0 || t >= data.cols()) throw std::out_of_range("transform target out of range");
    if (!seen.insert(t).second) throw std::invalid_argument("transform target repeated");
  }
}

} // namespace detail

/// Applies continuous map (position mod 5) + 1 to each target column, in target order.
inline Matrix transform_continuous(const Matrix &data, const std::vector<Index> &targets) {
  detail::check_targets(data, targets);
  Matrix out = data;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const Index j = targets[t];
    const Vector u = ecdf_scaled(data.col(j));
    const int map = map_for_target(t);
    for (Index i = 0; i < data.rows(); ++i) out(i, j) = continuous_map(map, u[i]);
  }
  return out;
}

/// Applies ordinal map (position mod 5) + 1 to each target column, in target order.
inline Matrix transform_ordinal(const Matrix &data, const std::vector<Index> &targets) {
  detail::check_targets(data, targets);
  Matrix out = data;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const Index j = targets[t];
    const Vector u = ecdf_scaled(data.col(j));
    const int map = map_for_target(t);
    for (Index i = 0; i < data.rows(); ++i) out(i, j) = ordinal_map(map, u[i]);
  }
  return out;
}

/// |selected intersect ideal| / |ideal|.
inline double proportion_ideal(const std::vector<Index> &selected, const std::vector<Index> &ideal) {
  if (selected.size() != ideal.size()) throw std::invalid_argument("proportion_ideal: sets differ in size");
  if (ideal.empty()) throw std::invalid_argument("proportion_ideal: empty set");
  const std::set<Index> want(ideal.begin(), ideal.end());
  std::size_t hits = 0;
  for (Index j : std::set<Index>(selected.begin(), selected.end())) hits += want.count(j);
  return static_cast<double>(hits) / static_cast<double>(ideal.size());
}

enum class Transform { None, Continuous, Ordinal };
enum class TransformTargets { IdealOnly, All };

inline std::string to_string(Transform t) {
  switch (t) {
  case Transform::None: return "none";
  case Transform::Continuous: return "continuous";
  case Transform::Ordinal: return "ordinal";
  }
  return "unknown";
}

inline std::string to_string(TransformTargets t) { return t == TransformTargets::IdealOnly ? "ideal" : "all"; }

inline Transform parse_transform(const std::string &s) {
  if (s == "none") return Transform::None;
  if (s == "continuous") return Transform::Continuous;
  if (s == "ordinal") return Transform::Ordinal;
  throw std::invalid_argument("unknown transform '" + s + "'");
}

inline TransformTargets parse_targets(const std::string &s) {
  if (s == "ideal") return TransformTargets::IdealOnly;
  if (s == "all") return TransformTargets::All;
  throw std::invalid_argument("unknown transform targets '" + s + "'");
}

struct Scenario {
  Index p = 10;
  Index q = 5;
  Index n = 500;
  LatentFamily latent = LatentFamily::gaussian();
  Transform transform = Transform::None;
  TransformTargets targets = TransformTargets::IdealOnly;
  std::vector<CorrFamily> methods{CorrFamily::Pearson, CorrFamily::Spearman, CorrFamily::GaussianCopula};
  int replicates = 200;
  std::uint64_t seed = 0;

  void validate() const {
    if (p < 2) throw std::invalid_argument("scenario: p must be >= 2");
    if (q < 1 || q >= p) throw std::invalid_argument("scenario: q must satisfy 1 <= q < p");
    if (n < 10) throw std::invalid_argument("scenario: n must be >= 10");
    if (replicates < 1) throw std::invalid_argument("scenario: replicates must be >= 1");
    if (methods.empty()) throw std::invalid_argument("scenario: no methods requested");
    for (auto m : methods)
      if (m == CorrFamily::Polychoric && transform != Transform::Ordinal)
        throw std::invalid_argument("scenario: polychoric requires the ordinal transform");
  }
};

/// Methods compared under a transform: polychoric only applies to ordinal data.
inline std::vector<CorrFamily> default_methods(Transform t) {
  std::vector<CorrFamily> m{CorrFamily::Pearson, CorrFamily::Spearman, CorrFamily::GaussianCopula};
  if (t == Transform::Ordinal) m.push_back(CorrFamily::Polychoric);
  return m;
}

struct MethodSummary {
  CorrFamily method;
  double mean_proportion = 0.0;
  double se_proportion = 0.0;
  double mean_ree = 0.0;
  double se_ree = 0.0;
};

struct ScenarioResult {
  Scenario scenario;
  std::vector<MethodSummary> methods;
  int replicates_used = 0;
  int excluded = 0;
  std::vector<std::string> exclusion_reasons; // one per excluded replicate, replicate order

  const MethodSummary &summary(CorrFamily m) const {
    for (const auto &s : methods)
      if (s.method == m) return s;
    throw std::out_of_range("method not part of this scenario");
  }
};

/// More than 5% of replicates failed.
class ExclusionCeilingError : public std::runtime_error {
public:
  ExclusionCeilingError(int excluded, int total)
      : std::runtime_error("too many failed replicates: " + std::to_string(excluded) + " of " + std::to_string(total) +
                           " excluded (ceiling 5%)"),
        excluded_(excluded), total_(total) {}
  int excluded() const noexcept { return excluded_; }
  int total() const noexcept { return total_; }

private:
  int excluded_;
  int total_;
};

/// Per-replicate outcome; metrics are indexed like Scenario::methods.
struct ReplicateOutcome {
  bool ok = false;
  std::string error;
  std::vector<Index> ideal;
  std::vector<double> proportion;
  std::vector<double> ree;
};

inline CorrelationMatrix estimate_correlation(CorrFamily method, const Matrix &data,
                                              const std::vector<VariableKind> &schema,
                                              double pd_floor = kDefaultPdFloor) {
  switch (method) {
  case CorrFamily::Pearson: return pearson_corr(data);
  case CorrFamily::Spearman: return spearman_corr(data);
  case CorrFamily::GaussianCopula: return gaussian_copula_corr(data);
  case CorrFamily::Polychoric: return mixed_corr(data, schema, pd_floor);
  }
  throw std::invalid_argument("unknown correlation method");
}

inline ReplicateOutcome run_replicate(const Scenario &s, int replicate) {
  ReplicateOutcome out;
  try {
    auto sigma_rng = make_stream(s.seed, static_cast<std::uint64_t>(replicate), StreamRole::Sigma);
    const Matrix sigma = sample_wishart_corr(s.p, sigma_rng).values;
    out.ideal = greedy_select(sigma, s.q, s.latent).chosen;

    auto latent_rng = make_stream(s.seed, static_cast<std::uint64_t>(replicate), StreamRole::Latent);
    const Matrix x = sample_latent(s.n, sigma, s.latent, latent_rng);

    std::vector<Index> targets;
    if (s.transform != Transform::None) {
      if (s.targets == TransformTargets::IdealOnly) {
        // Maps 1..5 go to the ideal variables in ascending column order.
        targets = out.ideal;
        std::sort(targets.begin(), targets.end());
      } else {
        for (Index j = 0; j < s.p; ++j) targets.push_back(j);
      }
    }
    Matrix y;
    std::vector<VariableKind> schema(static_cast<std::size_t>(s.p), VariableKind::continuous());
    switch (s.transform) {
    case Transform::None: y = x; break;
    case Transform::Continuous: y = transform_continuous(x, targets); break;
    case Transform::Ordinal:
      y = transform_ordinal(x, targets);
      for (std::size_t t = 0; t < targets.size(); ++t)
        schema[static_cast<std::size_t>(targets[t])] = VariableKind::ordinal(ordinal_map_levels(map_for_target(t)));
      break;
    }

    for (auto method : s.methods) {
      const auto est = estimate_correlation(method, y, schema);
      const auto sel = greedy_select(est, s.q, s.latent);
      out.proportion.push_back(proportion_ideal(sel.chosen, out.ideal));
      out.ree.push_back(ree(sigma, sel.chosen, out.ideal, s.latent));
    }
    out.ok = true;
  } catch (const std::exception &e) {
    out = ReplicateOutcome{};
    out.error = "replicate " + std::to_string(replicate) + ": " + e.what();
  }
  return out;
}

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs every replicate of a scenario and aggregates means and standard
/// errors (sample sd / sqrt(replicates); 0 for a single replicate). Output does
/// not depend on `threads`.
inline ScenarioResult run_scenario(const Scenario &s, unsigned threads = 0) {
  s.validate();
  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(s.replicates));
  const unsigned workers = std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(s.replicates));

  std::atomic<int> next{0};
  auto work = [&] {
    for (int r = next++; r < s.replicates; r = next++) outcomes[static_cast<std::size_t>(r)] = run_replicate(s, r);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  }

  ScenarioResult result;
  result.scenario = s;
  for (const auto &o : outcomes) {
    if (o.ok) ++result.replicates_used;
    else {
      ++result.excluded;
      result.exclusion_reasons.push_back(o.error);
    }
  }
  if (result.excluded * 20 > s.replicates) throw ExclusionCeilingError(result.excluded, s.replicates);

  const double m = static_cast<double>(result.replicates_used);
  for (std::size_t k = 0; k < s.methods.size(); ++k) {
    MethodSummary sum{s.methods[k]};
    double sp = 0.0, sr = 0.0;
    for (const auto &o : outcomes)
      if (o.ok) {
        sp += o.proportion[k];
        sr += o.ree[k];
      }
    sum.mean_proportion = sp / m;
    sum.mean_ree = sr / m;
    if (result.replicates_used > 1) {
      double vp = 0.0, vr = 0.0;
      for (const auto &o : outcomes)
        if (o.ok) {
          vp += (o.proportion[k] - sum.mean_proportion) * (o.proportion[k] - sum.mean_proportion);
          vr += (o.ree[k] - sum.mean_ree) * (o.ree[k] - sum.mean_ree);
        }
      sum.se_proportion = std::sqrt(vp / (m - 1.0)) / std::sqrt(m);
      sum.se_ree = std::sqrt(vr / (m - 1.0)) / std::sqrt(m);
    }
    result.methods.push_back(sum);
  }
  return result;
}

enum class Metric { ProportionIdeal, Ree };

inline std::string to_string(Metric m) { return m == Metric::ProportionIdeal ? "proportion_ideal" : "ree"; }

/// One row of the tidy result layout: a single (scenario, method, metric) cell.
struct TidyRecord {
  std::string figure;
  std::string latent;
  double latent_param = 0.0;
  std::string transform;
  std::string targets;
  Index n = 0;
  Index p = 0;
  Index q = 0;
  std::string method;
  std::string metric;
  double mean = 0.0;
  double stderr_value = 0.0;
  int replicates = 0;
  int excluded = 0;

  bool operator==(const TidyRecord &) const = default;
};

inline std::vector<TidyRecord> to_tidy(const ScenarioResult &r, const std::vector<Metric> &metrics,
                                       const std::string &figure = "") {
  std::vector<TidyRecord> rows;
  for (const auto &m : r.methods)
    for (auto metric : metrics) {
      TidyRecord t;
      t.figure = figure;
      t.latent = r.scenario.latent.name();
      t.latent_param = r.scenario.latent.parameter();
      t.transform = to_string(r.scenario.transform);
      t.targets = to_string(r.scenario.targets);
      t.n = r.scenario.n;
      t.p = r.scenario.p;
      t.q = r.scenario.q;
      t.method = std::string(to_string(m.method));
      t.metric = to_string(metric);
      t.mean = metric == Metric::ProportionIdeal ? m.mean_proportion : m.mean_ree;
      t.stderr_value = metric == Metric::ProportionIdeal ? m.se_proportion : m.se_ree;
      t.replicates = r.replicates_used;
      t.excluded = r.excluded;
      rows.push_back(std::move(t));
    }
  return rows;
}

/// A named grid of scenarios plus the metrics it reports.
struct FigurePreset {
  std::string id;
  std::vector<Scenario> scenarios;
  std::vector<Metric> metrics;
};

inline const std::vector<Index> &figure_n_grid() {
  static const std::vector<Index> grid{50, 150, 400, 1200, 3500, 10000};
  return grid;
}

/// Named scenario grids: "1"/"2" (n grid, q = 5, Gaussian, ideal
/// variables transformed), "3" (q = 2..6, n = 500, three latent families, all
/// variables transformed), "A1"/"A2" (grids 1/2 with t(2.5) and Laplace(3.1)
/// latents). Every scenario shares the master seed.
inline FigurePreset figure_preset(const std::string &id, int replicates, std::uint64_t seed) {
  FigurePreset preset{id, {}, {}};
  const std::vector<Transform> transforms{Transform::None, Transform::Continuous, Transform::Ordinal};
  auto grid_over_n = [&](const std::vector<LatentFamily> &families) {
    for (const auto &family : families)
      for (auto t : transforms)
        for (Index n : figure_n_grid()) {
          Scenario s;
          s.p = 10;
          s.q = 5;
          s.n = n;
          s.latent = family;
          s.transform = t;
          s.targets = TransformTargets::IdealOnly;
          s.methods = default_methods(t);
          s.replicates = replicates;
          s.seed = seed;
          preset.scenarios.push_back(s);
        }
  };
  const std::vector<LatentFamily> heavy{LatentFamily::student_t(2.5), LatentFamily::laplace(3.1)};
  if (id == "1") {
    grid_over_n({LatentFamily::gaussian()});
    preset.metrics = {Metric::ProportionIdeal};
  } else if (id == "2") {
    grid_over_n({LatentFamily::gaussian()});
    preset.metrics = {Metric::Ree};
  } else if (id == "A1") {
    grid_over_n(heavy);
    preset.metrics = {Metric::ProportionIdeal};
  } else if (id == "A2") {
    grid_over_n(heavy);
    preset.metrics = {Metric::Ree};
  } else if (id == "3") {
    const std::vector<LatentFamily> families{LatentFamily::gaussian(), LatentFamily::student_t(2.5),
                                             LatentFamily::laplace(3.1)};
    for (const auto &family : families)
      for (auto t : transforms)
        for (Index q = 2; q <= 6; ++q) {
          Scenario s;
          s.p = 10;
          s.q = q;
          s.n = 500;
          s.latent = family;
          s.transform = t;
          s.targets = TransformTargets::All;
          s.methods = default_methods(t);
          s.replicates = replicates;
          s.seed = seed;
          preset.scenarios.push_back(s);
        }
    preset.metrics = {Metric::Ree};
  } else {
    throw std::invalid_argument("unknown figure preset '" + id + "' (expected 1, 2, 3, A1 or A2)");
  }
  return preset;
}

} // namespace gpva
