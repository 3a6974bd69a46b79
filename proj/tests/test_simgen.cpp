#include <cmath>

#include <gtest/gtest.h>

#include "gpva/simgen.hpp"

namespace {

using namespace gpva;

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TEST(RngTest, StreamsAreDistinctAndReproducible) {
  EXPECT_NE(derive_seed(7, 0, StreamRole::Sigma), derive_seed(7, 0, StreamRole::Latent));
  EXPECT_NE(derive_seed(7, 0, StreamRole::Sigma), derive_seed(7, 1, StreamRole::Sigma));
  EXPECT_NE(derive_seed(7, 0, StreamRole::Sigma), derive_seed(8, 0, StreamRole::Sigma));
  auto a = make_stream(7, 3, StreamRole::Latent);
  auto b = make_stream(7, 3, StreamRole::Latent);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a(), b());
}

TEST(WishartTest, UnitDiagonalSymmetricPd) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto c = sample_wishart_corr(10, rng);
    EXPECT_EQ(c.values, c.values.transpose());
    for (Index j = 0; j < 10; ++j) EXPECT_EQ(c.values(j, j), 1.0);
    EXPECT_GT(min_eigenvalue(c.values), 0.0);
  }
  EXPECT_THROW(sample_wishart_corr(1, rng), std::invalid_argument);
}

TEST(WishartTest, OffDiagonalSymmetricAboutZero) {
  Rng rng(2);
  double sum = 0.0;
  for (int t = 0; t < 10000; ++t) sum += sample_wishart_corr(2, rng).values(0, 1);
  EXPECT_LT(std::abs(sum / 10000.0), 0.03);
}

TEST(WishartTest, Deterministic) {
  Rng a(3), b(3);
  EXPECT_EQ(sample_wishart_corr(6, a).values, sample_wishart_corr(6, b).values);
}

TEST(LatentTest, GaussianRecoversSigma) {
  Rng r0(4);
  const Matrix s = sample_wishart_corr(5, r0).values;
  Rng rng(5);
  const Matrix x = sample_latent(20000, s, LatentFamily::gaussian(), rng);
  EXPECT_LE((pearson_corr(x).values - s).cwiseAbs().maxCoeff(), 0.05);
}

double excess_kurtosis(const Eigen::Ref<const Vector> &v) {
  const double m = v.mean();
  const Eigen::ArrayXd d = v.array() - m;
  const double m2 = d.square().mean();
  return d.pow(4).mean() / (m2 * m2) - 3.0;
}

TEST(LatentTest, HeavyTailedFamiliesHavePositiveExcessKurtosis) {
  Rng r0(6);
  const Matrix s = sample_wishart_corr(4, r0).values;
  for (const auto &f : {LatentFamily::student_t(2.5), LatentFamily::laplace(3.1)}) {
    Rng rng(7);
    const Matrix x = sample_latent(20000, s, f, rng);
    for (Index j = 0; j < 4; ++j) EXPECT_GT(excess_kurtosis(x.col(j)), 0.0) << f.name();
  }
}

TEST(LatentTest, DeterministicAndRejectsNonPd) {
  Matrix s(2, 2);
  s << 1, 0.3, 0.3, 1;
  Rng a(8), b(8);
  EXPECT_EQ(sample_latent(50, s, LatentFamily::student_t(3), a), sample_latent(50, s, LatentFamily::student_t(3), b));
  s(0, 1) = s(1, 0) = 1.5;
  EXPECT_THROW(sample_latent(50, s, LatentFamily::gaussian(), a), std::exception);
}

TEST(EcdfTest, Examples) {
  EXPECT_TRUE(ecdf_scaled(vec({4, 1, 3, 2})).isApprox(vec({0.8, 0.2, 0.6, 0.4})));
  EXPECT_EQ(ecdf_scaled(vec({7, 7, 7})), vec({0.5, 0.5, 0.5}));
  const Vector x = vec({0.3, -2, 5, 1});
  EXPECT_EQ(ecdf_scaled(x), ecdf_scaled(x.array().exp().matrix()));
}

TEST(ContinuousMapTest, Examples) {
  EXPECT_DOUBLE_EQ(continuous_map(1, 0.5), 0.25);
  EXPECT_DOUBLE_EQ(continuous_map(1, 0.7), 0.36);
  EXPECT_DOUBLE_EQ(continuous_map(2, 0.9), std::pow(0.6, 6));
  EXPECT_NEAR(continuous_map(3, 0.3), 0.07423593091627269, 1e-12);
  EXPECT_DOUBLE_EQ(continuous_map(4, 0.75), 2.0);
  EXPECT_DOUBLE_EQ(continuous_map(5, 0.5), std::exp(0.5));
  EXPECT_DOUBLE_EQ(continuous_map(5, 0.95), 2.0 * std::exp(0.95));
  EXPECT_THROW(continuous_map(6, 0.5), std::invalid_argument);
}

TEST(ContinuousMapTest, MonotoneNondecreasing) {
  for (int m = 1; m <= 5; ++m)
    for (int i = 1; i < 999; ++i) EXPECT_LE(continuous_map(m, i / 1000.0), continuous_map(m, (i + 1) / 1000.0)) << m;
}

TEST(OrdinalMapTest, Examples) {
  EXPECT_EQ(ordinal_map(1, 0.19), 1);
  EXPECT_EQ(ordinal_map(1, 0.21), 2);
  EXPECT_EQ(ordinal_map(4, 0.65), 3);
  EXPECT_EQ(ordinal_map(5, 0.05), 1);
  EXPECT_EQ(ordinal_map(5, 0.95), 4);
  EXPECT_EQ(ordinal_map_levels(1), 2);
  EXPECT_EQ(ordinal_map_levels(2), 3);
  EXPECT_EQ(ordinal_map_levels(4), 4);
  EXPECT_EQ(map_for_target(0), 1);
  EXPECT_EQ(map_for_target(7), 3);
}

TEST(TransformTest, TargetsAndPassThrough) {
  Rng rng(9);
  const Matrix x = sample_latent(200, Matrix::Identity(4, 4), LatentFamily::gaussian(), rng);
  const Matrix y = transform_continuous(x, {2, 0});
  EXPECT_EQ(y.col(1), x.col(1));
  EXPECT_EQ(y.col(3), x.col(3));
  // column 2 got map 1, column 0 got map 2
  EXPECT_LE(y.col(2).maxCoeff(), 0.36);
  EXPECT_LE(y.col(0).maxCoeff(), std::pow(0.6, 6));
  const Matrix z = transform_ordinal(x, {1});
  EXPECT_EQ(z.col(1).minCoeff(), 1.0);
  EXPECT_EQ(z.col(1).maxCoeff(), 2.0);
  EXPECT_THROW(transform_ordinal(x, {4}), std::out_of_range);
  EXPECT_THROW(transform_ordinal(x, {1, 1}), std::invalid_argument);
}

TEST(TransformTest, UncappedMapsPreserveRanks) {
  Rng rng(10);
  const Matrix x = sample_latent(300, Matrix::Identity(5, 5), LatentFamily::gaussian(), rng);
  // maps 3 and 4 never cap, so rank estimators are unchanged exactly
  const Matrix y = transform_continuous(x, {4, 1, 0, 2});
  std::vector<Index> keep{0, 2, 3};
  Matrix xs(300, 3), ys(300, 3);
  for (Index k = 0; k < 3; ++k) {
    xs.col(k) = x.col(keep[k]);
    ys.col(k) = y.col(keep[k]);
  }
  EXPECT_EQ(spearman_corr(xs).values, spearman_corr(ys).values);
}

TEST(ProportionIdealTest, Examples) {
  EXPECT_EQ(proportion_ideal({1, 2, 3}, {3, 2, 1}), 1.0);
  EXPECT_EQ(proportion_ideal({1, 2}, {3, 4}), 0.0);
  EXPECT_DOUBLE_EQ(proportion_ideal({1, 2, 3, 4, 5}, {1, 2, 3, 8, 9}), 0.6);
  EXPECT_THROW(proportion_ideal({1}, {1, 2}), std::invalid_argument);
}

TEST(ScenarioTest, Validation) {
  Scenario s;
  s.q = 10;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = Scenario{};
  s.methods = {CorrFamily::Polychoric};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.transform = Transform::Ordinal;
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(parse_transform("ordinal"), Transform::Ordinal);
  EXPECT_EQ(parse_targets("all"), TransformTargets::All);
  EXPECT_THROW(parse_transform("log"), std::invalid_argument);
}

TEST(ScenarioTest, IdealSetHasUnitRee) {
  Scenario s;
  s.n = 200;
  s.replicates = 5;
  s.seed = 11;
  for (int r = 0; r < 5; ++r) {
    const auto o = run_replicate(s, r);
    ASSERT_TRUE(o.ok) << o.error;
    auto rng = make_stream(s.seed, static_cast<std::uint64_t>(r), StreamRole::Sigma);
    const Matrix sigma = sample_wishart_corr(s.p, rng).values;
    EXPECT_EQ(ree(sigma, o.ideal, o.ideal, s.latent), 1.0);
    for (double v : o.ree) EXPECT_GT(v, 0.0);
  }
}

bool same(const ScenarioResult &a, const ScenarioResult &b) {
  if (a.methods.size() != b.methods.size() || a.excluded != b.excluded) return false;
  for (std::size_t k = 0; k < a.methods.size(); ++k) {
    const auto &x = a.methods[k];
    const auto &y = b.methods[k];
    if (x.mean_proportion != y.mean_proportion || x.se_proportion != y.se_proportion || x.mean_ree != y.mean_ree ||
        x.se_ree != y.se_ree)
      return false;
  }
  return true;
}

TEST(ScenarioTest, DeterministicAcrossRunsAndThreadCounts) {
  Scenario s;
  s.n = 300;
  s.replicates = 12;
  s.seed = 12;
  s.transform = Transform::Ordinal;
  s.methods = default_methods(Transform::Ordinal);
  const auto one = run_scenario(s, 1);
  EXPECT_TRUE(same(one, run_scenario(s, 1)));
  EXPECT_TRUE(same(one, run_scenario(s, 4)));
  EXPECT_TRUE(same(one, run_scenario(s, 13)));
  for (const auto &m : one.methods) {
    EXPECT_GE(m.mean_proportion, 0.0);
    EXPECT_LE(m.mean_proportion, 1.0);
    EXPECT_GE(m.se_proportion, 0.0);
    EXPECT_GT(m.mean_ree, 0.0);
  }
}

TEST(ScenarioTest, SingleReplicateHasZeroStderr) {
  Scenario s;
  s.n = 100;
  s.replicates = 1;
  s.seed = 13;
  for (const auto &m : run_scenario(s).methods) {
    EXPECT_EQ(m.se_proportion, 0.0);
    EXPECT_EQ(m.se_ree, 0.0);
  }
}

TEST(ScenarioTest, RankEstimatorsConvergeWithoutTransform) {
  Rng r0(14);
  const Matrix sigma = sample_wishart_corr(6, r0).values;
  Rng rng(15);
  const Matrix x = sample_latent(10000, sigma, LatentFamily::gaussian(), rng);
  EXPECT_LT((spearman_corr(x).values - sigma).cwiseAbs().maxCoeff(), 0.05);
  EXPECT_LT((gaussian_copula_corr(x).values - sigma).cwiseAbs().maxCoeff(), 0.05);
}

TEST(TidyTest, OneRowPerMethodAndMetric) {
  Scenario s;
  s.n = 100;
  s.replicates = 3;
  s.seed = 16;
  s.methods = {CorrFamily::Pearson, CorrFamily::Spearman};
  const auto rows = to_tidy(run_scenario(s), {Metric::ProportionIdeal, Metric::Ree}, "x");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].method, "pearson");
  EXPECT_EQ(rows[1].metric, "ree");
  EXPECT_EQ(rows[3].figure, "x");
}

TEST(FigurePresetTest, Grids) {
  const auto f1 = figure_preset("1", 200, 7);
  EXPECT_EQ(f1.scenarios.size(), 18u);
  EXPECT_EQ(f1.scenarios.back().methods.size(), 4u);
  const auto f3 = figure_preset("3", 200, 7);
  EXPECT_EQ(f3.scenarios.size(), 45u);
  EXPECT_EQ(f3.scenarios[20].latent, LatentFamily::student_t(2.5));
  EXPECT_EQ(f3.scenarios.back().latent, LatentFamily::laplace(3.1));
  EXPECT_EQ(figure_preset("A1", 10, 1).scenarios.size(), 36u);
  EXPECT_THROW(figure_preset("9", 10, 1), std::invalid_argument);
}

} // namespace
