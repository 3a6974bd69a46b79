#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gpva/polychoric.hpp"
#include "gpva/simgen.hpp"

namespace {

using namespace gpva;

Matrix bivariate(Index n, double rho, std::uint64_t seed) {
  Matrix s(2, 2);
  s << 1, rho, rho, 1;
  Rng rng(seed);
  return sample_latent(n, s, LatentFamily::gaussian(), rng);
}

Vector cut(const Eigen::Ref<const Vector> &x, const std::vector<double> &cuts) {
  Vector out(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    int level = 1;
    for (double c : cuts)
      if (x[i] > c) ++level;
    out[i] = level;
  }
  return out;
}

double median(Vector v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

TEST(ThresholdsTest, FromMarginalCounts) {
  const auto tau = thresholds_from_counts({25, 50, 25});
  ASSERT_EQ(tau.size(), 4u);
  EXPECT_EQ(tau.front(), -INFINITY);
  EXPECT_NEAR(tau[1], -0.6744897501960817, 1e-12);
  EXPECT_NEAR(tau[2], 0.6744897501960817, 1e-12);
  EXPECT_EQ(tau.back(), INFINITY);
}

TEST(PolychoricTest, IdenticalColumnsHitBoundary) {
  Vector x(40);
  for (Index i = 0; i < 40; ++i) x[i] = static_cast<double>(i % 3);
  const auto r = polychoric_pair(x, x);
  EXPECT_GE(r.rho, 0.999 - 1e-9);
  EXPECT_TRUE(r.at_boundary);
}

TEST(PolychoricTest, MedianDichotomizationRecoversRho) {
  const Matrix z = bivariate(20000, 0.5, 101);
  const auto r = polychoric_pair(cut(z.col(0), {median(z.col(0))}), cut(z.col(1), {median(z.col(1))}));
  EXPECT_NEAR(r.rho, 0.5, 0.05);
  EXPECT_FALSE(r.at_boundary);
}

TEST(PolychoricTest, IndependentColumnsNearZero) {
  const Matrix z = bivariate(20000, 0.0, 102);
  const auto r = polychoric_pair(cut(z.col(0), {-0.5, 0.3}), cut(z.col(1), {-1.0, 0.0, 0.8}));
  EXPECT_LT(std::abs(r.rho), 0.05);
}

TEST(PolychoricTest, ReturnedRhoBeatsFineGrid) {
  for (double rho : {-0.7, 0.2, 0.85}) {
    const Matrix z = bivariate(3000, rho, 103);
    const auto t = make_contingency_table(encode_ordinal(cut(z.col(0), {-0.4, 0.5})), encode_ordinal(cut(z.col(1), {0.0, 1.1})));
    const auto best = polychoric_from_table(t);
    for (int k = -99; k <= 99; ++k) EXPECT_GE(best.loglik, polychoric_loglik(t, k / 100.0) - 1e-6);
    EXPECT_NEAR(best.loglik, polychoric_loglik(t, best.rho), 1e-9);
  }
}

TEST(PolychoricTest, InvariantUnderOrderPreservingRelabeling) {
  const Matrix z = bivariate(2000, 0.4, 104);
  const Vector x = cut(z.col(0), {-0.5, 0.5});
  const Vector y = cut(z.col(1), {0.0});
  Vector x2 = x;
  for (auto &v : x2) v = v == 1 ? -7.0 : (v == 2 ? 0.5 : 100.0);
  const Vector y2 = (y.array() * 10.0 + 3.0).matrix();
  EXPECT_EQ(polychoric_pair(x, y).rho, polychoric_pair(x2, y2).rho);
}

TEST(PolychoricTest, ZeroCellsContributeNothing) {
  ContingencyTable t{{1, 2}, {1, 2}, {}};
  t.counts.resize(2, 2);
  t.counts << 30, 0, 10, 40;
  const auto r = polychoric_from_table(t);
  EXPECT_TRUE(std::isfinite(r.loglik));
  EXPECT_GT(r.rho, 0.8);
}

TEST(PolychoricTest, Errors) {
  Vector x(20), y(20);
  x.setConstant(1.0);
  for (Index i = 0; i < 20; ++i) y[i] = static_cast<double>(i % 2);
  EXPECT_THROW(polychoric_pair(x, y), std::invalid_argument);
  EXPECT_THROW(polychoric_pair(y.head(5), y.head(5)), std::invalid_argument);
  EXPECT_THROW(polychoric_pair(y, y.head(10)), std::invalid_argument);
}

TEST(PolyserialTest, MedianDichotomizationOfSelf) {
  const Matrix z = bivariate(5000, 0.0, 105);
  const auto r = polyserial_pair(z.col(0), cut(z.col(0), {median(z.col(0))}));
  EXPECT_GE(r.rho, 0.95);
}

TEST(PolyserialTest, IndependentNearZero) {
  const Matrix z = bivariate(20000, 0.0, 106);
  EXPECT_LT(std::abs(polyserial_pair(z.col(0), cut(z.col(1), {-0.3, 0.6})).rho), 0.05);
}

TEST(PolyserialTest, RecoversLatentRho) {
  const Matrix z = bivariate(20000, 0.6, 107);
  const auto r = polyserial_pair(z.col(0), cut(z.col(1), {-0.5, 0.4}));
  EXPECT_NEAR(r.rho, 0.6, 0.05);
  EXPECT_TRUE(r.thresholds_x.empty());
  EXPECT_EQ(r.thresholds_y.size(), 4u);
}

TEST(PolyserialTest, ReturnedRhoBeatsFineGrid) {
  const Matrix z = bivariate(2000, -0.45, 108);
  const Vector y = cut(z.col(1), {-0.2, 0.9});
  const auto r = polyserial_pair(z.col(0), y);
  for (int k = -99; k <= 99; ++k) EXPECT_GE(r.loglik, polyserial_loglik(z.col(0), y, k / 100.0) - 1e-6);
}

TEST(MixedCorrTest, AllContinuousMatchesCopula) {
  Matrix s(3, 3);
  s << 1, 0.3, 0.5, 0.3, 1, -0.2, 0.5, -0.2, 1;
  Rng rng(109);
  const Matrix x = sample_latent(500, s, LatentFamily::gaussian(), rng);
  const auto m = mixed_corr(x, std::vector<VariableKind>(3, VariableKind::continuous()));
  EXPECT_LE((m.values - gaussian_copula_corr(x).values).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(m.family, CorrFamily::Polychoric);
}

TEST(MixedCorrTest, TwoOrdinalsMatchPair) {
  const Matrix z = bivariate(1500, 0.35, 110);
  Matrix y(1500, 2);
  y.col(0) = cut(z.col(0), {0.0});
  y.col(1) = cut(z.col(1), {-0.6, 0.6});
  const auto m = mixed_corr(y, {VariableKind::ordinal(2), VariableKind::ordinal(3)});
  EXPECT_NEAR(m.values(0, 1), polychoric_pair(y.col(0), y.col(1)).rho, 1e-12);
}

TEST(MixedCorrTest, RecoversLatentSigma) {
  Matrix s(3, 3);
  s << 1, 0.5, 0.3, 0.5, 1, -0.4, 0.3, -0.4, 1;
  Rng rng(111);
  Matrix x = sample_latent(20000, s, LatentFamily::gaussian(), rng);
  x.col(0) = x.col(0).array().exp();
  x.col(2) = cut(x.col(2), {-0.3, 0.7});
  const auto m = mixed_corr(x, {VariableKind::continuous(), VariableKind::continuous(), VariableKind::ordinal(3)});
  EXPECT_LE((m.values - s).cwiseAbs().maxCoeff(), 0.05);
  EXPECT_FALSE(m.repaired);
  EXPECT_TRUE(m.boundary_pairs.empty());
}

TEST(MixedCorrTest, ReportsBoundaryPairsAndConstantColumns) {
  Matrix y(30, 3);
  for (Index i = 0; i < 30; ++i) {
    y(i, 0) = static_cast<double>(i % 3);
    y(i, 1) = y(i, 0);
    y(i, 2) = static_cast<double>((i * 7) % 5);
  }
  const std::vector<VariableKind> schema(3, VariableKind::ordinal(5));
  const auto m = mixed_corr(y, schema);
  ASSERT_EQ(m.boundary_pairs.size(), 1u);
  EXPECT_EQ(m.boundary_pairs[0], std::make_pair(Index{0}, Index{1}));

  y.col(2).setConstant(2.0);
  try {
    mixed_corr(y, schema);
    FAIL();
  } catch (const ColumnError &e) {
    EXPECT_EQ(e.column(), 2);
  }
}

} // namespace
