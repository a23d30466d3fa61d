#include "orderspec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "orderspec/errors.hpp"

namespace orderspec {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InputError(std::string(what) + ": non-finite entries");
  }
}

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("SymMatrix: matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected square");
  }
  require_finite(m, "SymMatrix");
  entries_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::zero(Index dim) { return SymMatrix(Matrix::Zero(dim, dim)); }

SymMatrix SymMatrix::identity(Index dim) { return SymMatrix(Matrix::Identity(dim, dim)); }

namespace {

void fix_signs(Matrix& vectors) {
  for (Index j = 0; j < vectors.cols(); ++j) {
    Index arg = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

}  // namespace

EigenSystem sym_eig(const SymMatrix& m) {
  if (m.dim() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericalError("sym_eig: eigensolver failed");
  EigenSystem es;
  es.values = solver.eigenvalues().reverse();
  es.vectors = solver.eigenvectors().rowwise().reverse();
  fix_signs(es.vectors);
  return es;
}

Vector sym_eigenvalues(const SymMatrix& m) {
  if (m.dim() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("sym_eigenvalues: eigensolver failed");
  return solver.eigenvalues().reverse();
}

Vector clip_psd_spectrum(const Vector& values) {
  if (values.size() == 0) return values;
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  Vector out = values;
  for (Index i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0) {
      if (out[i] < -kNegativeEigenTol * scale) {
        throw NumericalError("matrix is not positive semidefinite (eigenvalue " +
                             std::to_string(out[i]) + ")");
      }
      out[i] = 0.0;
    }
  }
  return out;
}

SymMatrix inv_sqrt_psd(const SymMatrix& m, double rank_tol) {
  const EigenSystem es = sym_eig(m);
  const Vector lambda = clip_psd_spectrum(es.values);
  const Index d = m.dim();
  if (d == 0) return m;
  const double lmax = lambda.size() ? lambda[0] : 0.0;
  if (lmax <= 0.0) return SymMatrix::zero(d);
  Vector g(d);
  for (Index i = 0; i < d; ++i) {
    g[i] = lambda[i] > rank_tol * lmax ? 1.0 / std::sqrt(lambda[i]) : 0.0;
  }
  return SymMatrix(es.vectors * g.asDiagonal() * es.vectors.transpose());
}

SymMatrix sample_covariance(const Matrix& rows, bool center, double ridge) {
  const Index t = rows.rows();
  if (t < 2) {
    throw InsufficientDataError("sample_covariance: need at least 2 rows, got " +
                                std::to_string(t));
  }
  require_finite(rows, "sample_covariance");
  Matrix cov(rows.cols(), rows.cols());
  if (center) {
    const Matrix centered = rows.rowwise() - rows.colwise().mean();
    cov.noalias() = centered.transpose() * centered;
  } else {
    cov.noalias() = rows.transpose() * rows;
  }
  cov /= static_cast<double>(t);
  cov.diagonal().array() += ridge;
  return SymMatrix(cov);
}

}  // namespace orderspec
