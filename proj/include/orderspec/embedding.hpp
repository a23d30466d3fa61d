#pragma once

#include <functional>
#include <vector>

#include "orderspec/linalg.hpp"
#include "orderspec/panel.hpp"

namespace orderspec {

/// Deterministic map from a stacked lag block (one row) to a feature row.
/// The output dimension depends only on the input dimension, never on the
/// sample.
class FeatureMap {
 public:
  enum class Kind { Identity, Monomials, Custom };
  using ScalarTransform = std::function<double(double)>;

  FeatureMap() = default;

  static FeatureMap identity();
  /// All monomials of total degree 1..max_degree in the input coordinates,
  /// ordered by degree then lexicographically (x_i, then x_i x_j with
  /// i <= j, ...).
  static FeatureMap monomials(int max_degree);
  /// Each transform applied coordinate-wise (transform-major), followed by
  /// the products x_i x_j for i < j when `pairwise_products` is set.
  static FeatureMap custom(std::vector<ScalarTransform> transforms, bool pairwise_products);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] int max_degree() const { return max_degree_; }
  [[nodiscard]] bool is_identity() const { return kind_ == Kind::Identity; }
  [[nodiscard]] Index output_dim(Index input_dim) const;

  /// Applies the map to every row of `block`.
  [[nodiscard]] Matrix apply(const Matrix& block) const;

 private:
  Kind kind_ = Kind::Identity;
  int max_degree_ = 1;
  std::vector<ScalarTransform> transforms_;
  bool pairwise_ = false;
};

/// Finite admissible lag set with per-lag aggregation weights.
class DeformationSet {
 public:
  DeformationSet() = default;
  /// Lags are sorted on construction; weights default to 1.
  explicit DeformationSet(std::vector<int> lags, std::vector<double> weights = {});

  /// Lags lo, lo+1, ..., hi with unit weights.
  static DeformationSet range(int lo, int hi);

  [[nodiscard]] const std::vector<int>& lags() const { return lags_; }
  [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
  [[nodiscard]] std::size_t size() const { return lags_.size(); }
  [[nodiscard]] int max_lag() const { return lags_.back(); }
  [[nodiscard]] int min_lag() const { return lags_.front(); }

 private:
  std::vector<int> lags_;
  std::vector<double> weights_;
};

struct EmbeddingSpec {
  std::vector<Index> source_indices;
  std::vector<Index> target_indices;
  int source_depth = 1;
  /// 0 and 1 both mean contemporaneous targets only.
  int target_depth = 1;
  FeatureMap source_map = FeatureMap::identity();
  FeatureMap target_map = FeatureMap::identity();
  /// Columns whose lag embedding is projected out of both feature blocks.
  std::vector<Index> conditioning_indices;
  /// Number of conditioning lags (0, 1, ...). Zero selects enough lags to
  /// cover every time point touched by the source and target blocks.
  int conditioning_depth = 0;
  /// Permit source and target sets to share components.
  bool allow_overlap = false;

  void validate(Index width) const;
  [[nodiscard]] int effective_target_depth() const { return target_depth < 1 ? 1 : target_depth; }
  [[nodiscard]] Index source_dim() const;
  [[nodiscard]] Index target_dim() const;
};

/// Number of leading observations consumed before the first complete row
/// for lags up to `max_lag`.
Index required_history(const EmbeddingSpec& spec, int max_lag);

struct EmbeddedRows {
  Matrix target;  // rows V_t
  Matrix source;  // rows U_t(lag)
  Index effective_length = 0;
  Index first_time = 0;  // panel row of the first aligned observation
};

/// Embeds with the smallest history that the single lag requires.
EmbeddedRows embed(const TimeSeriesPanel& panel, const EmbeddingSpec& spec, int lag);

/// Embeds on the common sample starting at panel row `history`, so that
/// every lag in a deformation set shares identical rows.
EmbeddedRows embed_aligned(const TimeSeriesPanel& panel, const EmbeddingSpec& spec, int lag,
                           Index history);

/// Stacked lag block (lag-major: all indices at lag `lag`, then lag+1, ...)
/// for rows first_time .. T-1.
Matrix lag_block(const Matrix& values, const std::vector<Index>& indices, int lag, int depth,
                 Index first_time);

/// Lag embedding of the conditioning columns on the common sample, or an
/// empty matrix when the spec has none.
Matrix conditioning_rows(const TimeSeriesPanel& panel, const EmbeddingSpec& spec, int max_lag,
                         Index history);

/// (S_k X)_t = X_{t-k mod T} applied to the listed columns.
TimeSeriesPanel circular_shift(const TimeSeriesPanel& panel, const std::vector<Index>& indices,
                               Index k);

/// Rotates columns of a raw matrix in place of a panel copy.
void circular_shift_columns(const Matrix& values, const std::vector<Index>& indices, Index k,
                            Matrix& out);

/// Least-squares projector onto span{1, conditioning columns}. Rank
/// deficiency is handled through an orthonormal basis from the SVD.
class Residualizer {
 public:
  Residualizer() = default;
  explicit Residualizer(const Matrix& conditioning_rows);

  [[nodiscard]] bool empty() const { return basis_.size() == 0; }
  [[nodiscard]] Index rows() const { return basis_.rows(); }
  [[nodiscard]] Matrix apply(const Matrix& rows) const;

 private:
  Matrix basis_;
};

/// rows minus their projection onto span{1, conditioning columns}.
Matrix residualize(const Matrix& rows, const Matrix& conditioning_rows);

}  // namespace orderspec
