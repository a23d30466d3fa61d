#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "orderspec/embedding.hpp"
#include "orderspec/errors.hpp"

using namespace orderspec;
using orderspec::testing::ar1_matrix;
using orderspec::testing::gaussian;

namespace {

TimeSeriesPanel ramp_panel(Index t, Index k) {
  Matrix v(t, k);
  for (Index i = 0; i < t; ++i)
    for (Index c = 0; c < k; ++c) v(i, c) = 100.0 * static_cast<double>(c) + static_cast<double>(i);
  return TimeSeriesPanel::from_matrix(v);
}

EmbeddingSpec simple_spec() {
  EmbeddingSpec s;
  s.source_indices = {0};
  s.target_indices = {1};
  return s;
}

}  // namespace

TEST(Panel, RejectsBadShapes) {
  EXPECT_THROW(TimeSeriesPanel::from_matrix(Matrix::Zero(5, 1)), InputError);
  EXPECT_THROW(TimeSeriesPanel::from_matrix(Matrix::Zero(1, 3)), InsufficientDataError);
  Matrix bad = Matrix::Zero(4, 2);
  bad(2, 1) = std::nan("");
  EXPECT_THROW(TimeSeriesPanel::from_matrix(bad), InputError);
}

TEST(Panel, ColumnLookup) {
  const auto p = ramp_panel(4, 3);
  EXPECT_EQ(p.column("x2"), 2);
  EXPECT_THROW((void)p.column("nope"), ConfigError);
}

TEST(Embed, LagTwoIndexArithmetic) {
  const auto p = ramp_panel(10, 2);
  const auto rows = embed(p, simple_spec(), 2);
  EXPECT_EQ(rows.effective_length, 8);
  ASSERT_EQ(rows.source.rows(), 8);
  ASSERT_EQ(rows.target.rows(), 8);
  for (Index r = 0; r < 8; ++r) {
    const Index t = rows.first_time + r;
    EXPECT_DOUBLE_EQ(rows.source(r, 0), p.values()(t - 2, 0));
    EXPECT_DOUBLE_EQ(rows.target(r, 0), p.values()(t, 1));
  }
}

TEST(Embed, LagZeroIsContemporaneous) {
  const auto p = ramp_panel(6, 2);
  const auto rows = embed(p, simple_spec(), 0);
  EXPECT_EQ(rows.effective_length, 6);
  EXPECT_EQ(rows.source.col(0), p.values().col(0));
  EXPECT_EQ(rows.target.col(0), p.values().col(1));
}

TEST(Embed, QuadraticMonomialsOnScalarSource) {
  Matrix v(5, 2);
  v << 1, 0, 2, 0, -3, 0, 0.5, 0, 4, 0;
  auto spec = simple_spec();
  spec.source_map = FeatureMap::monomials(2);
  const auto rows = embed(TimeSeriesPanel::from_matrix(v), spec, 0);
  ASSERT_EQ(rows.source.cols(), 2);
  for (Index t = 0; t < 5; ++t) {
    EXPECT_DOUBLE_EQ(rows.source(t, 0), v(t, 0));
    EXPECT_DOUBLE_EQ(rows.source(t, 1), v(t, 0) * v(t, 0));
  }
}

TEST(Embed, MonomialOrderingAndDimension) {
  Matrix block(1, 2);
  block << 2.0, 3.0;
  const auto f = FeatureMap::monomials(2);
  EXPECT_EQ(f.output_dim(2), 5);
  EXPECT_EQ(f.output_dim(3), 9);
  const Matrix out = f.apply(block);
  ASSERT_EQ(out.cols(), 5);
  EXPECT_DOUBLE_EQ(out(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(out(0, 1), 3.0);
  EXPECT_DOUBLE_EQ(out(0, 2), 4.0);
  EXPECT_DOUBLE_EQ(out(0, 3), 6.0);
  EXPECT_DOUBLE_EQ(out(0, 4), 9.0);
}

TEST(Embed, CustomMapLayout) {
  Matrix block(1, 2);
  block << 2.0, -1.0;
  const auto f = FeatureMap::custom({[](double x) { return x; }, [](double x) { return x * x * x; }},
                                    true);
  EXPECT_EQ(f.output_dim(2), 5);
  const Matrix out = f.apply(block);
  EXPECT_DOUBLE_EQ(out(0, 2), 8.0);
  EXPECT_DOUBLE_EQ(out(0, 3), -1.0);
  EXPECT_DOUBLE_EQ(out(0, 4), -2.0);
}

TEST(Embed, FeatureMapsAreDeterministic) {
  std::mt19937_64 rng(4);
  const Matrix block = gaussian(20, 3, rng);
  const auto f = FeatureMap::monomials(3);
  EXPECT_EQ(f.apply(block), f.apply(block));
}

TEST(Embed, LagMajorDepthLayout) {
  const auto p = ramp_panel(12, 3);
  EmbeddingSpec spec;
  spec.source_indices = {0, 2};
  spec.target_indices = {1};
  spec.source_depth = 3;
  spec.target_depth = 2;
  const auto rows = embed(p, spec, 1);
  // history = lag + p_u - 1 = 3
  EXPECT_EQ(rows.first_time, 3);
  EXPECT_EQ(rows.effective_length, 9);
  ASSERT_EQ(rows.source.cols(), 6);
  ASSERT_EQ(rows.target.cols(), 2);
  const Index t = rows.first_time;
  EXPECT_DOUBLE_EQ(rows.source(0, 0), p.values()(t - 1, 0));
  EXPECT_DOUBLE_EQ(rows.source(0, 1), p.values()(t - 1, 2));
  EXPECT_DOUBLE_EQ(rows.source(0, 4), p.values()(t - 3, 0));
  EXPECT_DOUBLE_EQ(rows.target(0, 1), p.values()(t - 1, 1));
}

TEST(Embed, TargetDepthZeroMeansContemporaneous) {
  auto spec = simple_spec();
  spec.target_depth = 0;
  const auto rows = embed(ramp_panel(8, 2), spec, 1);
  EXPECT_EQ(rows.target.cols(), 1);
  EXPECT_EQ(spec.target_dim(), 1);
}

TEST(Embed, InsufficientLength) {
  EXPECT_THROW(embed(ramp_panel(5, 2), simple_spec(), 4), InsufficientDataError);
  EXPECT_THROW(embed(ramp_panel(5, 2), simple_spec(), 7), InsufficientDataError);
}

TEST(Embed, OverlapGuard) {
  EmbeddingSpec spec;
  spec.source_indices = {0, 1};
  spec.target_indices = {1};
  EXPECT_THROW(embed(ramp_panel(8, 2), spec, 1), ConfigError);
  spec.allow_overlap = true;
  EXPECT_NO_THROW(embed(ramp_panel(8, 2), spec, 1));
}

TEST(Embed, AlignedSampleSharedAcrossLags) {
  const auto p = ramp_panel(20, 2);
  const auto a = embed_aligned(p, simple_spec(), 1, 5);
  const auto b = embed_aligned(p, simple_spec(), 5, 5);
  EXPECT_EQ(a.effective_length, b.effective_length);
  EXPECT_EQ(a.target, b.target);
}

TEST(Embed, TranslationConsistent) {
  std::mt19937_64 rng(8);
  const Matrix x = gaussian(40, 3, rng);
  const auto full = TimeSeriesPanel::from_matrix(x);
  const Index shift = 7;
  const auto later = full.rows(shift, 40 - shift);
  EmbeddingSpec spec;
  spec.source_indices = {0, 2};
  spec.target_indices = {1};
  spec.source_depth = 2;
  const auto a = embed(full, spec, 3);
  const auto b = embed(later, spec, 3);
  // Row r of b corresponds to row r + shift of a.
  ASSERT_EQ(a.effective_length, b.effective_length + shift);
  EXPECT_EQ(a.source.bottomRows(b.effective_length), b.source);
  EXPECT_EQ(a.target.bottomRows(b.effective_length), b.target);
}

TEST(Deformation, ValidationAndSorting) {
  const DeformationSet d({3, 1, 2}, {0.5, 1.0, 2.0});
  EXPECT_EQ(d.lags(), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(d.weights(), (std::vector<double>{1.0, 2.0, 0.5}));
  EXPECT_THROW(DeformationSet(std::vector<int>{}), ConfigError);
  EXPECT_THROW(DeformationSet({1, 1}), ConfigError);
  EXPECT_THROW(DeformationSet({-1}), ConfigError);
  EXPECT_THROW(DeformationSet({1}, {0.0}), ConfigError);
  EXPECT_EQ(DeformationSet::range(1, 5).size(), 5u);
}

TEST(CircularShift, Examples) {
  Matrix v(4, 2);
  v << 1, 10, 2, 20, 3, 30, 4, 40;
  const auto p = TimeSeriesPanel::from_matrix(v);
  EXPECT_EQ(circular_shift(p, {0}, 0), p);
  EXPECT_EQ(circular_shift(p, {0}, 4), p);
  const auto s = circular_shift(p, {0}, 1);
  EXPECT_EQ(s.values().col(0), (Vector(4) << 4, 1, 2, 3).finished());
  EXPECT_EQ(s.values().col(1), v.col(1));
  EXPECT_EQ(s.times(), p.times());
}

TEST(CircularShift, GroupLaw) {
  std::mt19937_64 rng(17);
  const auto p = TimeSeriesPanel::from_matrix(gaussian(23, 4, rng));
  const std::vector<Index> cols{0, 2};
  for (Index a = 0; a < 23; a += 5) {
    for (Index b = 0; b < 23; b += 3) {
      const auto twice = circular_shift(circular_shift(p, cols, a), cols, b);
      EXPECT_EQ(twice, circular_shift(p, cols, (a + b) % 23));
    }
  }
}

TEST(Residualize, SelfProjectionVanishes) {
  std::mt19937_64 rng(2);
  const Matrix rows = gaussian(50, 3, rng);
  EXPECT_LE(residualize(rows, rows).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Residualize, OrthogonalConditioningLeavesRows) {
  std::mt19937_64 rng(6);
  // Orthonormal columns with the first equal to a constant, so the rest are
  // mean-zero and orthogonal to one another.
  Matrix g = gaussian(40, 4, rng);
  g.col(0).setOnes();
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ() * Matrix::Identity(40, 4);
  const Matrix rows = q.col(1) * 3.0;
  const Matrix cond = q.rightCols(2);
  EXPECT_LE((residualize(rows, cond) - rows).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Residualize, Idempotent) {
  std::mt19937_64 rng(12);
  const Matrix rows = gaussian(60, 3, rng);
  const Matrix cond = gaussian(60, 2, rng);
  const Matrix once = residualize(rows, cond);
  EXPECT_LE((residualize(once, cond) - once).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Residualize, OrthogonalToConditioningColumns) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix rows = gaussian(80, 3, rng) * 5.0 + Matrix::Constant(80, 3, 2.0);
    Matrix cond = gaussian(80, 3, rng);
    cond.col(2) = cond.col(0) + cond.col(1);  // rank deficient
    const Matrix out = residualize(rows, cond);
    const Matrix cross = cond.transpose() * out;
    EXPECT_LE(cross.cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(out.colwise().sum().cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Residualize, ConditioningRowsCoverReach) {
  std::mt19937_64 rng(14);
  const auto p = TimeSeriesPanel::from_matrix(ar1_matrix(30, 3, 0.3, rng));
  EmbeddingSpec spec;
  spec.source_indices = {0};
  spec.target_indices = {1};
  spec.source_depth = 2;
  spec.conditioning_indices = {2};
  const Index h = required_history(spec, 3);
  // auto depth reaches max(max_lag + p_u, p_v) = 5 lags back
  EXPECT_EQ(h, 4);
  const Matrix w = conditioning_rows(p, spec, 3, h);
  EXPECT_EQ(w.rows(), 30 - h);
  EXPECT_EQ(w.cols(), 5);
  EXPECT_DOUBLE_EQ(w(0, 4), p.values()(0, 2));
}
