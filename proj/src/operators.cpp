#include "orderspec/operators.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "orderspec/errors.hpp"

namespace orderspec {

namespace {

void center_columns(Matrix& m) {
  if (m.rows() > 0) m.rowwise() -= m.colwise().mean();
}

Matrix with_ridge(Matrix m, double ridge) {
  m.diagonal().array() += ridge;
  return m;
}

}  // namespace

Vector gram_spectrum(const Matrix& a) {
  const Index rows = a.rows();
  Vector values = Vector::Zero(rows);
  if (rows == 0 || a.cols() == 0) return values;
  if (a.cols() < rows) {
    Matrix small = a.transpose() * a;
    values.head(a.cols()) = clip_psd_spectrum(sym_eigenvalues(SymMatrix(small)));
  } else {
    Matrix big = a * a.transpose();
    values = clip_psd_spectrum(sym_eigenvalues(SymMatrix(big)));
  }
  return values;
}

OperatorEngine::OperatorEngine(const TimeSeriesPanel& panel, EmbeddingSpec spec,
                               DeformationSet deformation, OperatorKind kind, double ridge)
    : spec_(std::move(spec)), deformation_(std::move(deformation)), kind_(kind), ridge_(ridge) {
  if (!(ridge_ >= 0.0)) throw ConfigError("ridge must be nonnegative");
  if (deformation_.size() == 0) throw ConfigError("deformation set is empty");
  spec_.validate(panel.width());
  length_ = panel.length();
  history_ = required_history(spec_, deformation_.max_lag());
  n_ = length_ - history_;
  if (n_ < 2) {
    throw InsufficientDataError("series of length " + std::to_string(length_) +
                                " too short for max lag " + std::to_string(deformation_.max_lag()) +
                                " with source depth " + std::to_string(spec_.source_depth));
  }

  source_values_.resize(length_, static_cast<Index>(spec_.source_indices.size()));
  for (std::size_t c = 0; c < spec_.source_indices.size(); ++c) {
    source_values_.col(static_cast<Index>(c)) = panel.values().col(spec_.source_indices[c]);
  }

  if (!spec_.conditioning_indices.empty()) {
    residualizer_ = Residualizer(conditioning_rows(panel, spec_, deformation_.max_lag(), history_));
  }

  target_ = spec_.target_map.apply(lag_block(panel.values(), spec_.target_indices, 0,
                                             spec_.effective_target_depth(), history_));
  if (!residualizer_.empty()) target_ = residualizer_.apply(target_);
  center_columns(target_);
  target_cov_.noalias() = target_.transpose() * target_;
  target_cov_ /= static_cast<double>(n_);
  if (kind_ == OperatorKind::DirectedCoherenceGram) {
    target_whitener_ = inv_sqrt_psd(SymMatrix(with_ridge(target_cov_, ridge_))).matrix();
  }
}

Index OperatorEngine::dim() const {
  if (kind_ == OperatorKind::DirectedCoherenceGram) return target_.cols();
  return target_.cols() + spec_.source_dim();
}

Matrix OperatorEngine::shifted_sources(Index shift) const {
  if (shift % length_ == 0) return source_values_;
  std::vector<Index> all(static_cast<std::size_t>(source_values_.cols()));
  std::iota(all.begin(), all.end(), Index{0});
  Matrix out;
  circular_shift_columns(source_values_, all, shift, out);
  return out;
}

OperatorEngine::SourceBlock OperatorEngine::source_block(const Matrix& sources, int lag) const {
  std::vector<Index> all(static_cast<std::size_t>(sources.cols()));
  std::iota(all.begin(), all.end(), Index{0});
  SourceBlock block;
  block.centered = spec_.source_map.apply(lag_block(sources, all, lag, spec_.source_depth, history_));
  if (!residualizer_.empty()) block.centered = residualizer_.apply(block.centered);
  center_columns(block.centered);
  return block;
}

DirectedCoherence OperatorEngine::coherence(const SourceBlock& u) const {
  const double inv_n = 1.0 / static_cast<double>(n_);
  Matrix suu = u.centered.transpose() * u.centered;
  suu *= inv_n;
  const Matrix u_whitener = inv_sqrt_psd(SymMatrix(with_ridge(std::move(suu), ridge_))).matrix();
  Matrix svu = target_.transpose() * u.centered;
  svu *= inv_n;
  DirectedCoherence dc;
  dc.matrix = target_whitener_ * svu * u_whitener;
  const Vector gram = gram_spectrum(dc.matrix);
  const Index r = std::min(dc.matrix.rows(), dc.matrix.cols());
  dc.singular_values = gram.head(r).cwiseSqrt();
  return dc;
}

SymMatrix OperatorEngine::stacked(const SourceBlock& u) const {
  const double inv_n = 1.0 / static_cast<double>(n_);
  const Index dv = target_.cols();
  const Index du = u.centered.cols();
  Matrix c(dv + du, dv + du);
  c.topLeftCorner(dv, dv) = target_cov_;
  c.bottomRightCorner(du, du).noalias() = u.centered.transpose() * u.centered * inv_n;
  c.topRightCorner(dv, du).noalias() = target_.transpose() * u.centered * inv_n;
  c.bottomLeftCorner(du, dv) = c.topRightCorner(dv, du).transpose();
  c.diagonal().array() += ridge_;
  return SymMatrix(c);
}

std::optional<Vector> OperatorEngine::cholesky_gram_spectrum(const SourceBlock& u) const {
  // Whitening U by a Cholesky factor instead of the symmetric inverse root
  // rotates A by an orthogonal matrix, so the spectrum of A A^T is unchanged.
  // Only valid when the ridge keeps inv_sqrt_psd from truncating anything.
  const double inv_n = 1.0 / static_cast<double>(n_);
  Matrix suu = u.centered.transpose() * u.centered;
  suu *= inv_n;
  const double tr = suu.trace();
  if (!(ridge_ > 0.0) || ridge_ < kDefaultRankTol * (tr + ridge_ * suu.rows())) return std::nullopt;
  suu.diagonal().array() += ridge_;
  Eigen::LLT<Matrix> llt(suu);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Matrix b = target_whitener_ * (target_.transpose() * u.centered);
  b *= inv_n;
  const Matrix at = llt.matrixL().solve(b.transpose());
  return gram_spectrum(at.transpose());
}

std::vector<Vector> OperatorEngine::spectra(Index shift) const {
  const Matrix sources = shifted_sources(shift);
  std::vector<Vector> out;
  out.reserve(deformation_.size());
  for (int lag : deformation_.lags()) {
    const SourceBlock u = source_block(sources, lag);
    if (kind_ == OperatorKind::DirectedCoherenceGram) {
      auto fast = cholesky_gram_spectrum(u);
      out.push_back(fast ? std::move(*fast) : gram_spectrum(coherence(u).matrix));
    } else {
      out.push_back(clip_psd_spectrum(sym_eigenvalues(stacked(u))));
    }
  }
  return out;
}

std::vector<DirectedCoherence> OperatorEngine::coherences(Index shift) const {
  if (kind_ != OperatorKind::DirectedCoherenceGram) {
    throw ConfigError("coherences requested from a stacked-covariance engine");
  }
  const Matrix sources = shifted_sources(shift);
  std::vector<DirectedCoherence> out;
  out.reserve(deformation_.size());
  for (int lag : deformation_.lags()) out.push_back(coherence(source_block(sources, lag)));
  return out;
}

OperatorFamily OperatorEngine::build(Index shift) const {
  const Matrix sources = shifted_sources(shift);
  OperatorFamily family;
  family.kind = kind_;
  family.sample_size = n_;
  Matrix aggregate;
  for (std::size_t i = 0; i < deformation_.size(); ++i) {
    const SourceBlock u = source_block(sources, deformation_.lags()[i]);
    LagOperator op;
    op.lag = deformation_.lags()[i];
    op.weight = deformation_.weights()[i];
    if (kind_ == OperatorKind::DirectedCoherenceGram) {
      DirectedCoherence dc = coherence(u);
      const Matrix gram = dc.matrix * dc.matrix.transpose();
      op.op = SymMatrix(gram);
      op.eigenvalues = gram_spectrum(dc.matrix);
      if (aggregate.size() == 0) aggregate = Matrix::Zero(gram.rows(), gram.cols());
      aggregate += op.weight * op.op.matrix();
      op.coherence = std::move(dc);
    } else {
      op.op = stacked(u);
      op.eigenvalues = clip_psd_spectrum(sym_eigenvalues(op.op));
    }
    family.per_lag.push_back(std::move(op));
  }
  if (kind_ == OperatorKind::DirectedCoherenceGram) family.aggregate = SymMatrix(aggregate);
  return family;
}

SymMatrix build_stacked(const TimeSeriesPanel& panel, const EmbeddingSpec& spec, int lag,
                        double ridge) {
  OperatorEngine engine(panel, spec, DeformationSet({lag}), OperatorKind::StackedCovariance, ridge);
  return engine.build().per_lag.front().op;
}

DirectedCoherence build_coherence(const TimeSeriesPanel& panel, const EmbeddingSpec& spec,
                                  int lag, double ridge) {
  OperatorEngine engine(panel, spec, DeformationSet({lag}), OperatorKind::DirectedCoherenceGram,
                        ridge);
  return std::move(engine.coherences().front());
}

OperatorFamily build_family(const TimeSeriesPanel& panel, const EmbeddingSpec& spec,
                            const DeformationSet& deformation, OperatorKind kind, double ridge) {
  return OperatorEngine(panel, spec, deformation, kind, ridge).build();
}

}  // namespace orderspec
