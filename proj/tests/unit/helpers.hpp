#pragma once

#include <random>

#include "orderspec/linalg.hpp"
#include "orderspec/panel.hpp"

namespace orderspec::testing {

inline Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = n01(rng);
  return m;
}

inline Matrix random_orthogonal(Index d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(d, d, rng));
  return qr.householderQ() * Matrix::Identity(d, d);
}

inline Matrix random_symmetric(Index d, std::mt19937_64& rng) {
  const Matrix g = gaussian(d, d, rng);
  return 0.5 * (g + g.transpose());
}

/// PSD matrix of the given rank (rank <= d).
inline Matrix random_psd(Index d, Index rank, std::mt19937_64& rng) {
  const Matrix g = gaussian(d, rank, rng);
  return g * g.transpose();
}

/// Independent AR(1) columns with standard normal innovations.
inline Matrix ar1_matrix(Index t, Index k, double rho, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Matrix x(t, k);
  for (Index c = 0; c < k; ++c) {
    double prev = 0.0;
    for (int burn = 0; burn < 100; ++burn) prev = rho * prev + n01(rng);
    for (Index i = 0; i < t; ++i) {
      prev = rho * prev + n01(rng);
      x(i, c) = prev;
    }
  }
  return x;
}

}  // namespace orderspec::testing
