#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "mekt/errors.hpp"

namespace mekt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetric positive definite matrix. Validated at construction:
/// symmetric, finite, all eigenvalues strictly positive.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix m);

  static SpdMatrix identity(int dim) { return SpdMatrix(Matrix::Identity(dim, dim)); }

  const Matrix& mat() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

 private:
  Matrix m_;
};

enum class MeanKind { Riemannian, Euclidean, LogEuclidean };

struct MeanSolverConfig {
  int max_iterations = 50;
  double convergence_tol = 1e-6;  // Frobenius norm of the tangent-space update
  double eigen_floor = 1e-10;     // relative clamp used by regularize()
};

/// Exception carrying the last Karcher iterate when the fixed-point
/// loop fails to converge.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, Matrix last)
      : Error(msg), last_iterate(std::move(last)) {}
  Matrix last_iterate;
};

/// Principal matrix logarithm via symmetric eigendecomposition.
Matrix matrix_log(const SpdMatrix& p);

/// exp of a symmetric matrix; always lands back on the SPD cone.
SpdMatrix matrix_exp(const Matrix& sym);

SpdMatrix matrix_sqrt(const SpdMatrix& p);

/// Inverse square root. Throws IllConditioned if an eigenvalue falls
/// below eigen_floor.
SpdMatrix matrix_inv_sqrt(const SpdMatrix& p, double eigen_floor = 1e-10);

/// Affine-invariant distance ||log(P1^-1 P2)||_F, computed from the
/// generalized eigenvalues of the pencil (P2, P1).
double riemannian_distance(const SpdMatrix& p1, const SpdMatrix& p2);

/// Mean of a set of SPD matrices. The Riemannian mean is a Karcher
/// fixed-point iteration initialized at the Euclidean mean.
SpdMatrix mean(std::span<const SpdMatrix> matrices, MeanKind kind,
               const MeanSolverConfig& cfg = {});

/// G^T P G, re-symmetrized. G must be numerically invertible.
SpdMatrix congruence(const SpdMatrix& p, const Matrix& g);

/// Clamp eigenvalues of a symmetric matrix to at least eigen_floor
/// times the largest one, producing a valid SpdMatrix.
SpdMatrix regularize(const Matrix& sym, double eigen_floor = 1e-10);

}  // namespace mekt
