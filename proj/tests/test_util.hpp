#pragma once

#include <random>

#include "mekt/spd.hpp"

namespace mekt::test {

inline Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = gauss(rng);
  }
  return m;
}

inline SpdMatrix random_spd(int dim, std::mt19937_64& rng) {
  Matrix a = random_matrix(dim, dim, rng);
  return SpdMatrix(a * a.transpose() + 0.1 * Matrix::Identity(dim, dim));
}

/// Random symmetric invertible matrix (not necessarily definite).
inline Matrix random_symmetric_invertible(int dim, std::mt19937_64& rng) {
  Matrix a = random_matrix(dim, dim, rng);
  Matrix s = 0.5 * (a + a.transpose());
  // pushing eigenvalues away from zero keeps it invertible
  return s + 3.0 * Matrix::Identity(dim, dim);
}

}  // namespace mekt::test
