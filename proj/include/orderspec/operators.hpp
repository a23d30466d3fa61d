#pragma once

#include <optional>
#include <vector>

#include "orderspec/embedding.hpp"
#include "orderspec/linalg.hpp"
#include "orderspec/panel.hpp"

namespace orderspec {

inline constexpr double kDefaultRidge = 1e-8;

enum class OperatorKind {
  /// Covariance of the stacked feature vector Z_t = (V_t, U_t(lag)).
  StackedCovariance,
  /// A A^T for the whitened cross-covariance A = S_VV^{-1/2} S_VU S_UU^{-1/2}.
  DirectedCoherenceGram,
};

/// Whitened cross-covariance between target and lagged-source features. Its
/// singular values are sample canonical correlations.
struct DirectedCoherence {
  Matrix matrix;           // d_v x d_u
  Vector singular_values;  // descending, min(d_v, d_u) entries

  [[nodiscard]] double spectral_norm() const {
    return singular_values.size() ? singular_values[0] : 0.0;
  }
};

struct LagOperator {
  int lag = 0;
  double weight = 1.0;
  SymMatrix op;
  Vector eigenvalues;  // descending, clipped at zero
  std::optional<DirectedCoherence> coherence;
};

struct OperatorFamily {
  OperatorKind kind = OperatorKind::DirectedCoherenceGram;
  std::vector<LagOperator> per_lag;
  /// sum_lag w_lag * A A^T; present for DirectedCoherenceGram families.
  std::optional<SymMatrix> aggregate;
  Index sample_size = 0;

  [[nodiscard]] Index dim() const { return per_lag.empty() ? 0 : per_lag.front().op.dim(); }
};

/// Builds the order-indexed operator family for one panel and keeps the
/// target-side quantities (features, whitening, residualization basis) so
/// that circularly shifted copies of the source block can be evaluated
/// without redoing that work.
class OperatorEngine {
 public:
  OperatorEngine(const TimeSeriesPanel& panel, EmbeddingSpec spec, DeformationSet deformation,
                 OperatorKind kind, double ridge = kDefaultRidge);

  /// Full family with matrices, with the source block rotated by `shift`.
  [[nodiscard]] OperatorFamily build(Index shift = 0) const;

  /// Per-lag spectra only (descending, dimension dim()), source rotated by
  /// `shift`. Gram spectra are computed on the smaller side of A.
  [[nodiscard]] std::vector<Vector> spectra(Index shift = 0) const;

  /// Per-lag directed coherence matrices with the source rotated by `shift`.
  [[nodiscard]] std::vector<DirectedCoherence> coherences(Index shift = 0) const;

  [[nodiscard]] const EmbeddingSpec& spec() const { return spec_; }
  [[nodiscard]] const DeformationSet& deformation() const { return deformation_; }
  [[nodiscard]] OperatorKind kind() const { return kind_; }
  [[nodiscard]] Index panel_length() const { return length_; }
  [[nodiscard]] Index history() const { return history_; }
  [[nodiscard]] Index sample_size() const { return n_; }
  [[nodiscard]] Index dim() const;

 private:
  struct SourceBlock {
    Matrix centered;  // n x d_u, residualized and centered
  };

  [[nodiscard]] Matrix shifted_sources(Index shift) const;
  [[nodiscard]] SourceBlock source_block(const Matrix& sources, int lag) const;
  [[nodiscard]] DirectedCoherence coherence(const SourceBlock& u) const;
  [[nodiscard]] SymMatrix stacked(const SourceBlock& u) const;
  [[nodiscard]] std::optional<Vector> cholesky_gram_spectrum(const SourceBlock& u) const;

  EmbeddingSpec spec_;
  DeformationSet deformation_;
  OperatorKind kind_;
  double ridge_;
  Index length_ = 0;
  Index history_ = 0;
  Index n_ = 0;
  Matrix source_values_;    // T x |I|, raw source columns
  Residualizer residualizer_;
  Matrix target_;           // n x d_v, residualized and centered
  Matrix target_cov_;       // V^T V / n without ridge
  Matrix target_whitener_;  // (S_VV + ridge I)^{-1/2}
};

/// Centered, ridge-stabilized covariance of Z_t(lag) = (V_t, U_t(lag)).
SymMatrix build_stacked(const TimeSeriesPanel& panel, const EmbeddingSpec& spec, int lag,
                        double ridge = kDefaultRidge);

DirectedCoherence build_coherence(const TimeSeriesPanel& panel, const EmbeddingSpec& spec,
                                  int lag, double ridge = kDefaultRidge);

OperatorFamily build_family(const TimeSeriesPanel& panel, const EmbeddingSpec& spec,
                            const DeformationSet& deformation, OperatorKind kind,
                            double ridge = kDefaultRidge);

/// Eigenvalues of A A^T (dimension rows(A)) computed from whichever of
/// A A^T, A^T A is smaller, padded with zeros.
Vector gram_spectrum(const Matrix& a);

}  // namespace orderspec
