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

namespace {

EmbeddingSpec split_spec(Index sources, Index targets, int depth = 1) {
  EmbeddingSpec s;
  for (Index i = 0; i < sources; ++i) s.source_indices.push_back(i);
  for (Index j = 0; j < targets; ++j) s.target_indices.push_back(sources + j);
  s.source_depth = depth;
  s.target_depth = 1;
  return s;
}

/// Source block in the first columns, targets driven by the source at lag 2.
Matrix coupled_panel(Index t, Index sources, Index targets, double beta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix x = ar1_matrix(t, sources + targets, 0.3, rng);
  for (Index i = 2; i < t; ++i)
    for (Index j = 0; j < targets; ++j)
      x(i, sources + j) += beta * x(i - 2, j % sources);
  return x;
}

double pearson(const Vector& a, const Vector& b) {
  const Vector ac = a.array() - a.mean();
  const Vector bc = b.array() - b.mean();
  return ac.dot(bc) / std::sqrt(ac.squaredNorm() * bc.squaredNorm());
}

}  // namespace

TEST(BuildStacked, IndependentWhiteNoiseCrossBlockSmall) {
  std::mt19937_64 rng(2024);
  const Index t = 20000;
  const auto p = TimeSeriesPanel::from_matrix(gaussian(t, 4, rng));
  const auto spec = split_spec(2, 2);
  const Matrix c = build_stacked(p, spec, 1).matrix();
  const Index d = c.rows();
  EXPECT_EQ(d, 4);
  const double cross = c.topRightCorner(2, 2).norm();
  EXPECT_LT(cross, 3.0 * static_cast<double>(d) / std::sqrt(static_cast<double>(t)));
}

TEST(BuildStacked, DuplicatedSeriesBlocksMatch) {
  std::mt19937_64 rng(1);
  const auto p = TimeSeriesPanel::from_matrix(gaussian(50, 2, rng));
  EmbeddingSpec spec;
  spec.source_indices = {0};
  spec.target_indices = {0};
  spec.allow_overlap = true;
  const Matrix c = build_stacked(p, spec, 0, 0.0).matrix();
  EXPECT_NEAR(c(0, 0), c(1, 1), 1e-14);
  EXPECT_NEAR(c(0, 0), c(0, 1), 1e-14);
}

TEST(BuildStacked, ConstantSeriesGivesRidgeIdentity) {
  Matrix v = Matrix::Constant(30, 2, 3.0);
  const auto p = TimeSeriesPanel::from_matrix(v);
  const Matrix c = build_stacked(p, split_spec(1, 1), 1, 1e-6).matrix();
  EXPECT_LE((c - 1e-6 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BuildCoherence, IndependentSeriesNearZero) {
  std::mt19937_64 rng(77);
  const auto p = TimeSeriesPanel::from_matrix(ar1_matrix(20000, 2, 0.3, rng));
  const auto dc = build_coherence(p, split_spec(1, 1), 1);
  EXPECT_LT(dc.spectral_norm(), 3.0 / std::sqrt(20000.0));
}

TEST(BuildCoherence, PerfectLaggedCopyHasUnitSingularValue) {
  std::mt19937_64 rng(5);
  const Index t = 200, lag = 3;
  Matrix v = gaussian(t, 2, rng);
  for (Index i = lag; i < t; ++i) v(i, 1) = v(i - lag, 0);
  const auto dc = build_coherence(TimeSeriesPanel::from_matrix(v), split_spec(1, 1), lag);
  EXPECT_NEAR(dc.spectral_norm(), 1.0, 1e-6);
}

TEST(BuildCoherence, ScalarCaseIsAbsoluteCorrelation) {
  const Matrix v = coupled_panel(300, 1, 1, 0.4, 9);
  const auto p = TimeSeriesPanel::from_matrix(v);
  const auto rows = embed(p, split_spec(1, 1), 2);
  const double r = pearson(rows.source.col(0), rows.target.col(0));
  const auto dc = build_coherence(p, split_spec(1, 1), 2, 0.0);
  EXPECT_NEAR(dc.spectral_norm(), std::abs(r), 1e-8);
}

TEST(BuildCoherence, SingularValuesBounded) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = TimeSeriesPanel::from_matrix(coupled_panel(120, 3, 4, 0.9, seed));
    const auto dc = build_coherence(p, split_spec(3, 4, 2), 2);
    EXPECT_LE(dc.singular_values.maxCoeff(), 1.0 + 1e-6);
    EXPECT_GE(dc.singular_values.minCoeff(), 0.0);
  }
}

TEST(BuildFamily, SingletonAggregate) {
  const auto p = TimeSeriesPanel::from_matrix(coupled_panel(200, 2, 3, 0.5, 3));
  const auto fam = build_family(p, split_spec(2, 3), DeformationSet({2}, {1.5}),
                                OperatorKind::DirectedCoherenceGram);
  ASSERT_EQ(fam.per_lag.size(), 1u);
  ASSERT_TRUE(fam.aggregate.has_value());
  EXPECT_LE((fam.aggregate->matrix() - 1.5 * fam.per_lag[0].op.matrix()).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(BuildFamily, IdenticalAlignmentDoublesAggregate) {
  // A period-2 source makes lags 1 and 3 see identical source rows.
  const Index t = 100;
  std::mt19937_64 rng(8);
  Matrix v = gaussian(t, 3, rng);
  for (Index i = 0; i < t; ++i) v(i, 0) = (i % 2 == 0) ? 1.0 : -1.0;
  const auto fam = build_family(TimeSeriesPanel::from_matrix(v), split_spec(1, 2),
                                DeformationSet({1, 3}), OperatorKind::DirectedCoherenceGram);
  const Matrix& g = fam.per_lag[0].op.matrix();
  EXPECT_LE((fam.per_lag[1].op.matrix() - g).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((fam.aggregate->matrix() - 2.0 * g).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BuildFamily, AggregateIsWeightedSum) {
  const auto p = TimeSeriesPanel::from_matrix(coupled_panel(300, 2, 4, 0.5, 4));
  const DeformationSet def({1, 2, 4}, {0.5, 2.0, 1.0});
  const auto fam = build_family(p, split_spec(2, 4, 2), def, OperatorKind::DirectedCoherenceGram);
  Matrix sum = Matrix::Zero(fam.dim(), fam.dim());
  for (const auto& op : fam.per_lag) {
    EXPECT_EQ(op.op.dim(), fam.dim());
    sum += op.weight * op.op.matrix();
  }
  EXPECT_LE((fam.aggregate->matrix() - sum).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(BuildFamily, DirectionalEnergy) {
  const auto p = TimeSeriesPanel::from_matrix(coupled_panel(300, 2, 4, 0.5, 5));
  const DeformationSet def({1, 2, 3}, {1.0, 0.5, 2.0});
  const auto fam = build_family(p, split_spec(2, 4), def, OperatorKind::DirectedCoherenceGram);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    Vector w = gaussian(fam.dim(), 1, rng).col(0);
    w.normalize();
    double energy = 0.0;
    for (const auto& op : fam.per_lag) {
      energy += op.weight * (op.coherence->matrix.transpose() * w).squaredNorm();
    }
    EXPECT_NEAR(w.dot(fam.aggregate->matrix() * w), energy, 1e-10);
  }
}

TEST(BuildFamily, StackedDimension) {
  const auto p = TimeSeriesPanel::from_matrix(coupled_panel(100, 2, 3, 0.5, 6));
  const auto fam = build_family(p, split_spec(2, 3, 2), DeformationSet::range(1, 3),
                                OperatorKind::StackedCovariance);
  EXPECT_EQ(fam.dim(), 3 + 4);
  EXPECT_FALSE(fam.aggregate.has_value());
}

TEST(BuildFamily, EngineSpectraMatchFamily) {
  const auto p = TimeSeriesPanel::from_matrix(coupled_panel(150, 3, 2, 0.5, 7));
  for (auto kind : {OperatorKind::DirectedCoherenceGram, OperatorKind::StackedCovariance}) {
    OperatorEngine engine(p, split_spec(3, 2, 2), DeformationSet::range(1, 4), kind);
    const auto fam = engine.build(17);
    const auto spectra = engine.spectra(17);
    for (std::size_t i = 0; i < spectra.size(); ++i) {
      const Vector direct = clip_psd_spectrum(sym_eigenvalues(fam.per_lag[i].op));
      EXPECT_LE((spectra[i] - direct).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_EQ(spectra[i].size(), engine.dim());
    }
  }
}

TEST(BuildFamily, ShiftMatchesShiftedPanel) {
  const Matrix v = coupled_panel(90, 2, 2, 0.5, 8);
  const auto p = TimeSeriesPanel::from_matrix(v);
  const auto spec = split_spec(2, 2, 2);
  const auto def = DeformationSet::range(1, 3);
  OperatorEngine engine(p, spec, def, OperatorKind::DirectedCoherenceGram);
  const auto shifted = build_family(circular_shift(p, {0, 1}, 11), spec, def,
                                    OperatorKind::DirectedCoherenceGram);
  const auto via_engine = engine.build(11);
  for (std::size_t i = 0; i < def.size(); ++i) {
    EXPECT_LE((via_engine.per_lag[i].op.matrix() - shifted.per_lag[i].op.matrix())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
  }
}

TEST(OperatorProperties, OrthogonalFeatureInvariance) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Index ns = 3, nt = 3;
    Matrix v = coupled_panel(200, ns, nt, 0.6, 100 + seed);
    std::mt19937_64 rng(seed);
    const Matrix qu = random_orthogonal(ns, rng);
    const Matrix qv = random_orthogonal(nt, rng);
    Matrix rotated = v;
    rotated.leftCols(ns) = v.leftCols(ns) * qu;
    rotated.rightCols(nt) = v.rightCols(nt) * qv;
    const auto spec = split_spec(ns, nt, 2);
    const auto def = DeformationSet::range(1, 3);
    for (auto kind : {OperatorKind::DirectedCoherenceGram, OperatorKind::StackedCovariance}) {
      const auto a = OperatorEngine(TimeSeriesPanel::from_matrix(v), spec, def, kind).spectra();
      const auto b =
          OperatorEngine(TimeSeriesPanel::from_matrix(rotated), spec, def, kind).spectra();
      for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_LE((a[i] - b[i]).cwiseAbs().maxCoeff(), 1e-8);
      }
    }
    const auto ca = build_coherence(TimeSeriesPanel::from_matrix(v), spec, 2);
    const auto cb = build_coherence(TimeSeriesPanel::from_matrix(rotated), spec, 2);
    EXPECT_LE((ca.singular_values - cb.singular_values).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(OperatorProperties, RayleighRitz) {
  const auto p = TimeSeriesPanel::from_matrix(coupled_panel(250, 2, 5, 0.5, 11));
  const auto fam = build_family(p, split_spec(2, 5), DeformationSet::range(1, 4),
                                OperatorKind::DirectedCoherenceGram);
  const SymMatrix& c = *fam.aggregate;
  const auto es = sym_eig(c);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    Vector w = gaussian(c.dim(), 1, rng).col(0);
    w.normalize();
    EXPECT_LE(w.dot(c.matrix() * w), es.values[0] + 1e-10);
  }
  const Vector top = es.vectors.col(0);
  EXPECT_NEAR(top.dot(c.matrix() * top), es.values[0], 1e-10);
}

TEST(OperatorProperties, KyFan) {
  const auto p = TimeSeriesPanel::from_matrix(coupled_panel(250, 3, 6, 0.5, 12));
  const auto fam = build_family(p, split_spec(3, 6), DeformationSet::range(1, 4),
                                OperatorKind::DirectedCoherenceGram);
  const Matrix& c = fam.aggregate->matrix();
  const auto es = sym_eig(*fam.aggregate);
  std::mt19937_64 rng(4);
  for (Index m = 1; m <= 3; ++m) {
    const Matrix top = es.vectors.leftCols(m);
    const double captured = (top.transpose() * c * top).trace();
    EXPECT_NEAR(captured, es.values.head(m).sum(), 1e-8);
    for (int k = 0; k < 100; ++k) {
      Eigen::HouseholderQR<Matrix> qr(gaussian(c.rows(), m, rng));
      const Matrix q = qr.householderQ() * Matrix::Identity(c.rows(), m);
      EXPECT_LE((q.transpose() * c * q).trace(), captured + 1e-10);
    }
  }
}

TEST(OperatorProperties, ScalarGrangerReduction) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto p = TimeSeriesPanel::from_matrix(coupled_panel(400, 1, 1, 0.3, 200 + seed));
    const int lag = 2;
    const auto fam = build_family(p, split_spec(1, 1), DeformationSet({lag}),
                                  OperatorKind::DirectedCoherenceGram, 0.0);
    ASSERT_EQ(fam.dim(), 1);
    // R^2 of y_t on (1, x_{t-lag}) by least squares.
    const auto rows = embed(p, split_spec(1, 1), lag);
    const Index n = rows.effective_length;
    Matrix design(n, 2);
    design.col(0).setOnes();
    design.col(1) = rows.source.col(0);
    const Vector y = rows.target.col(0);
    const Vector beta = design.colPivHouseholderQr().solve(y);
    const double ssr = (y - design * beta).squaredNorm();
    const double sst = (y.array() - y.mean()).matrix().squaredNorm();
    EXPECT_NEAR((*fam.aggregate)(0, 0), 1.0 - ssr / sst, 1e-8);
  }
}

TEST(OperatorProperties, GramSpectrumSmallSideAgrees) {
  std::mt19937_64 rng(31);
  for (Index cols : {2, 5, 9}) {
    const Matrix a = gaussian(6, cols, rng);
    const Vector direct = clip_psd_spectrum(sym_eigenvalues(SymMatrix(a * a.transpose())));
    EXPECT_LE((gram_spectrum(a) - direct).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(OperatorErrors, ShortSeriesAndBadRidge) {
  const auto p = TimeSeriesPanel::from_matrix(coupled_panel(10, 1, 1, 0.3, 1));
  EXPECT_THROW(build_family(p, split_spec(1, 1), DeformationSet({9}),
                            OperatorKind::DirectedCoherenceGram),
               InsufficientDataError);
  EXPECT_THROW(build_family(p, split_spec(1, 1), DeformationSet({1}),
                            OperatorKind::DirectedCoherenceGram, -1.0),
               ConfigError);
}

TEST(OperatorErrors, CoherencesNeedGramEngine) {
  const auto p = TimeSeriesPanel::from_matrix(coupled_panel(40, 1, 1, 0.3, 1));
  OperatorEngine e(p, split_spec(1, 1), DeformationSet({1}), OperatorKind::StackedCovariance);
  EXPECT_THROW((void)e.coherences(), ConfigError);
}
