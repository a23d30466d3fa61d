#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "orderspec/errors.hpp"
#include "orderspec/operators.hpp"
#include "orderspec/spectral.hpp"

using namespace orderspec;
using orderspec::testing::ar1_matrix;
using orderspec::testing::gaussian;
using orderspec::testing::random_orthogonal;
using orderspec::testing::random_psd;
using orderspec::testing::random_symmetric;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST(Lss, IdentityTrace) {
  EXPECT_DOUBLE_EQ(lss(sym_eig(SymMatrix::identity(5)), SpectralSummary::trace()), 1.0);
}

TEST(Lss, FrobeniusArithmetic) {
  EXPECT_DOUBLE_EQ(lss(vec({3, 1}), SpectralSummary::frobenius()), 5.0);
}

TEST(Lss, LogDetAndLargest) {
  EXPECT_NEAR(lss(vec({1, 1}), SpectralSummary::log_det()), std::log(1.0 + 1e-8), 1e-15);
  EXPECT_DOUBLE_EQ(lss(vec({0.5, 4, 2}), SpectralSummary::largest_eigenvalue()), 4.0);
  EXPECT_THROW(SpectralSummary::log_det(0.0), ConfigError);
  EXPECT_THROW(SpectralSummary::log_det(-1.0), ConfigError);
  EXPECT_THROW(SpectralSummary::power(0.5), ConfigError);
}

TEST(Lss, PowerApproachesLargestEigenvalue) {
  const Vector ev = vec({4, 1, 1, 0, 0, 0});
  double prev = std::numeric_limits<double>::infinity();
  for (double q : {2.0, 4.0, 8.0, 16.0}) {
    const double root = std::pow(6.0 * lss(ev, SpectralSummary::power(q)), 1.0 / q);
    EXPECT_GE(root, 4.0);
    EXPECT_LT(root, prev);
    prev = root;
  }
  EXPECT_NEAR(prev, 4.0, 1e-3);
}

TEST(Lss, ClipsRoundoffRejectsLargeNegatives) {
  EXPECT_DOUBLE_EQ(lss(vec({1.0, -1e-13}), SpectralSummary::trace()), 0.5);
  EXPECT_THROW(lss(vec({1.0, -0.1}), SpectralSummary::trace()), NumericalError);
  EXPECT_THROW(lss(vec({1.0, std::nan("")}), SpectralSummary::trace()), InputError);
}

TEST(Summary, Parse) {
  EXPECT_EQ(SpectralSummary::parse("trace"), SpectralSummary::trace());
  EXPECT_EQ(SpectralSummary::parse("frobenius"), SpectralSummary::frobenius());
  EXPECT_EQ(SpectralSummary::parse("logdet"), SpectralSummary::log_det());
  EXPECT_EQ(SpectralSummary::parse("logdet:0.01").parameter(), 0.01);
  EXPECT_EQ(SpectralSummary::parse("power:3"), SpectralSummary::power(3));
  EXPECT_EQ(SpectralSummary::parse("lambda1"), SpectralSummary::largest_eigenvalue());
  EXPECT_THROW(SpectralSummary::parse("power"), ConfigError);
  EXPECT_THROW(SpectralSummary::parse("entropy"), ConfigError);
  EXPECT_THROW(SpectralSummary::parse("logdet:abc"), ConfigError);
  EXPECT_TRUE(DispersionStatistic::parse("wasserstein").is_measure());
  EXPECT_FALSE(DispersionStatistic::parse("trace").is_measure());
}

TEST(Dispersion, SingleLagIsZero) {
  const auto r = dispersion_scalar({1}, {vec({0.3, 0.1})}, SpectralSummary::trace());
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(dispersion_measure({1}, {vec({0.3, 0.1})}).statistic, 0.0);
}

TEST(Dispersion, IdenticalOperatorsAreZero) {
  const Vector s = vec({0.5, 0.2, 0.0});
  EXPECT_EQ(dispersion_scalar({1, 2}, {s, s}, SpectralSummary::frobenius()).statistic, 0.0);
}

TEST(Dispersion, ArithmeticAndArgExtremes) {
  const auto r = dispersion_from_values({1, 2, 3}, {0.2, 0.7, 0.4});
  EXPECT_NEAR(r.statistic, 0.5, 1e-15);
  EXPECT_EQ(r.sup_lag, 2);
  EXPECT_EQ(r.inf_lag, 1);
  EXPECT_THROW(dispersion_from_values({1, 2}, {0.1}), DimensionError);
}

TEST(MeasureDistance, Examples) {
  EXPECT_EQ(spectral_measure_distance(SpectralMeasure(vec({1, 2})), SpectralMeasure(vec({1, 2}))),
            0.0);
  EXPECT_EQ(spectral_measure_distance(SpectralMeasure(vec({1, 0})), SpectralMeasure(vec({0, 1}))),
            0.0);
  // sorted atoms (0, 2) vs (1, 1): (|0 - 1| + |2 - 1|) / 2
  EXPECT_DOUBLE_EQ(
      spectral_measure_distance(SpectralMeasure(vec({2, 0})), SpectralMeasure(vec({1, 1}))), 1.0);
  EXPECT_DOUBLE_EQ(
      spectral_measure_distance(SpectralMeasure(vec({2, 0})), SpectralMeasure(vec({1, 0}))), 0.5);
  EXPECT_THROW(
      spectral_measure_distance(SpectralMeasure(vec({1})), SpectralMeasure(vec({1, 1}))),
      DimensionError);
}

TEST(MeasureDispersion, MaxPairwise) {
  // Single-atom measures at 0, 0.1, 0.4: pairwise distances 0.1, 0.4, 0.3.
  const auto r = dispersion_measure({1, 2, 3}, {vec({0.0}), vec({0.1}), vec({0.4})});
  EXPECT_NEAR(r.statistic, 0.4, 1e-15);
  EXPECT_EQ(r.sup_lag, 1);
  EXPECT_EQ(r.inf_lag, 3);
}

TEST(MeasureDispersion, OrthogonallyConjugateOperators) {
  std::mt19937_64 rng(3);
  const Matrix m = random_psd(5, 5, rng);
  std::vector<Vector> spectra;
  for (int k = 0; k < 3; ++k) {
    const Matrix q = random_orthogonal(5, rng);
    spectra.push_back(sym_eigenvalues(SymMatrix(q * m * q.transpose())));
  }
  EXPECT_LE(dispersion_measure({1, 2, 3}, spectra).statistic, 1e-8);
  // Equal measures imply equal linear spectral statistics.
  for (const auto& f : {SpectralSummary::trace(), SpectralSummary::frobenius(),
                        SpectralSummary::log_det(), SpectralSummary::power(3)}) {
    EXPECT_LE(dispersion_scalar({1, 2, 3}, spectra, f).statistic, 1e-8);
  }
}

TEST(MeasureDistance, MetricAxiomsOnRandomAtoms) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Index d = 1 + trial % 8;
    Vector a(d), b(d), c(d);
    for (Index i = 0; i < d; ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
      c[i] = u(rng);
    }
    const SpectralMeasure ma(a), mb(b), mc(c);
    const double ab = spectral_measure_distance(ma, mb);
    EXPECT_DOUBLE_EQ(ab, spectral_measure_distance(mb, ma));
    EXPECT_LE(spectral_measure_distance(ma, mc), ab + spectral_measure_distance(mb, mc) + 1e-14);
    EXPECT_GE(ab, 0.0);
  }
}

TEST(EffectiveRank, Examples) {
  EXPECT_NEAR(effective_rank(Vector::Constant(7, 0.3)), 7.0, 1e-12);
  EXPECT_NEAR(effective_rank(vec({2.5, 0, 0, 0})), 1.0, 1e-15);
  EXPECT_NEAR(effective_rank(vec({2, 1})), 1.8, 1e-15);
  EXPECT_EQ(effective_rank(Vector::Zero(3)), 0.0);
}

TEST(EffectiveRank, Bounds) {
  std::mt19937_64 rng(20);
  for (int trial = 0; trial < 30; ++trial) {
    const Index d = 2 + trial % 6;
    const Vector ev = sym_eigenvalues(SymMatrix(random_psd(d, 1 + trial % d, rng)));
    const double r = effective_rank(ev);
    EXPECT_GE(r, 1.0 - 1e-12);
    EXPECT_LE(r, static_cast<double>(d) + 1e-12);
  }
}

TEST(SpectralProperties, MonotoneEnlargement) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix v = ar1_matrix(200, 4, 0.3, rng);
    for (Index t = 2; t < 200; ++t) v(t, 2) += 0.5 * v(t - 2, 0);
    const auto p = TimeSeriesPanel::from_matrix(v);
    EmbeddingSpec spec;
    spec.source_indices = {0, 1};
    spec.target_indices = {2, 3};
    spec.source_depth = 2;
    // Shared alignment: evaluate both sets on the larger set's sample.
    OperatorEngine big(p, spec, DeformationSet::range(1, 5), OperatorKind::DirectedCoherenceGram);
    const auto spectra = big.spectra();
    const std::vector<int> lags{1, 2, 3, 4, 5};
    const std::vector<Vector> sub_spectra{spectra[1], spectra[3]};
    for (const auto& stat : {DispersionStatistic::parse("trace"),
                             DispersionStatistic::parse("frobenius"),
                             DispersionStatistic::parse("logdet"), DispersionStatistic::measure()}) {
      const double small = stat.evaluate({2, 4}, sub_spectra).statistic;
      const double large = stat.evaluate(lags, spectra).statistic;
      EXPECT_GE(large, small);
    }
  }
}

TEST(SpectralProperties, LssLipschitz) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const Index d = 3 + trial % 5;
    const Matrix m = random_psd(d, d, rng) + Matrix::Identity(d, d);  // spectrum >= 1
    Matrix e = random_symmetric(d, rng);
    const double norm = sym_eigenvalues(SymMatrix(e)).cwiseAbs().maxCoeff();
    e *= 0.1 / norm;  // ||E||_2 = 0.1, so the perturbed spectrum stays >= 0.9
    const Vector a = sym_eigenvalues(SymMatrix(m));
    const Vector b = sym_eigenvalues(SymMatrix(m + e));
    EXPECT_LE(std::abs(lss(a, SpectralSummary::trace()) - lss(b, SpectralSummary::trace())),
              0.1 + 1e-12);
    EXPECT_LE(std::abs(lss(a, SpectralSummary::log_det()) - lss(b, SpectralSummary::log_det())),
              0.1 / 0.9 + 1e-12);
  }
}

TEST(SpectralProperties, NonnegativeStatistic) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vector> spectra;
    for (int k = 0; k < 4; ++k) spectra.push_back(sym_eigenvalues(SymMatrix(random_psd(4, 2, rng))));
    EXPECT_GE(dispersion_scalar({1, 2, 3, 4}, spectra, SpectralSummary::log_det()).statistic, 0.0);
    EXPECT_GE(dispersion_measure({1, 2, 3, 4}, spectra).statistic, 0.0);
  }
}
