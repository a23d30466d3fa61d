#pragma once

#include <Eigen/Dense>

namespace orderspec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative threshold below which eigenvalues are treated as zero when
/// forming pseudo-inverse roots.
inline constexpr double kDefaultRankTol = 1e-10;

/// Eigenvalues more negative than this (scaled by max(1, |lambda|_max)) mark
/// a matrix as genuinely indefinite rather than PSD up to round-off.
inline constexpr double kNegativeEigenTol = 1e-10;

/// Dense symmetric matrix with finite entries. The input is symmetrized as
/// (M + M^T) / 2 on construction so that entries(i, j) == entries(j, i)
/// holds bit-for-bit.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix zero(Index dim);
  static SymMatrix identity(Index dim);

  [[nodiscard]] Index dim() const { return entries_.rows(); }
  [[nodiscard]] const Matrix& matrix() const { return entries_; }
  [[nodiscard]] double operator()(Index i, Index j) const { return entries_(i, j); }

 private:
  Matrix entries_;
};

/// Eigenvalues in descending order with matching orthonormal eigenvectors
/// (column j pairs with eigenvalue j). Each eigenvector's sign is fixed so
/// that its largest-magnitude entry is positive.
struct EigenSystem {
  Vector values;
  Matrix vectors;
};

EigenSystem sym_eig(const SymMatrix& m);

/// Eigenvalues only, descending. Cheaper than sym_eig when vectors are not
/// needed.
Vector sym_eigenvalues(const SymMatrix& m);

/// Clips eigenvalues in (-tol, 0) to zero; throws NumericalError if any
/// eigenvalue is more negative than the tolerance allows.
Vector clip_psd_spectrum(const Vector& values);

/// Moore-Penrose inverse square root of a PSD matrix: V g(L) V^T with
/// g(l) = l^{-1/2} for l > rank_tol * l_max and 0 otherwise.
SymMatrix inv_sqrt_psd(const SymMatrix& m, double rank_tol = kDefaultRankTol);

/// (1/T) sum_t z_t z_t^T over the rows of `rows`, optionally after column
/// centering, plus ridge * I.
SymMatrix sample_covariance(const Matrix& rows, bool center, double ridge);

/// Throws InputError when any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

}  // namespace orderspec
