#include "mekt/spd.hpp"

#include <cmath>

namespace mekt {

namespace {

void check_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": matrix is not square");
  }
  if (!m.allFinite()) {
    throw DegenerateMatrix(std::string(what) + ": non-finite entries");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale) {
    throw DegenerateMatrix(std::string(what) + ": matrix is not symmetric");
  }
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Eigen::SelfAdjointEigenSolver<Matrix> decompose(const Matrix& sym, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success || !es.eigenvalues().allFinite()) {
    throw DegenerateMatrix(std::string(what) + ": eigendecomposition failed");
  }
  return es;
}

}  // namespace

SpdMatrix::SpdMatrix(Matrix m) {
  check_symmetric(m, "SpdMatrix");
  m_ = symmetrize(m);
  auto es = decompose(m_, "SpdMatrix");
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw DegenerateMatrix("SpdMatrix: matrix is not positive definite");
  }
}

Matrix matrix_log(const SpdMatrix& p) {
  auto es = decompose(p.mat(), "matrix_log");
  Vector logs = es.eigenvalues().array().log();
  if (!logs.allFinite()) {
    throw DegenerateMatrix("matrix_log: non-finite eigenvalue");
  }
  Matrix out = es.eigenvectors() * logs.asDiagonal() * es.eigenvectors().transpose();
  return symmetrize(out);
}

SpdMatrix matrix_exp(const Matrix& sym) {
  check_symmetric(sym, "matrix_exp");
  auto es = decompose(symmetrize(sym), "matrix_exp");
  Vector exps = es.eigenvalues().array().exp();
  if (!exps.allFinite()) {
    throw DegenerateMatrix("matrix_exp: eigenvalue overflow");
  }
  Matrix out = es.eigenvectors() * exps.asDiagonal() * es.eigenvectors().transpose();
  return SpdMatrix(symmetrize(out));
}

SpdMatrix matrix_sqrt(const SpdMatrix& p) {
  auto es = decompose(p.mat(), "matrix_sqrt");
  Vector roots = es.eigenvalues().array().sqrt();
  Matrix out = es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
  return SpdMatrix(symmetrize(out));
}

SpdMatrix matrix_inv_sqrt(const SpdMatrix& p, double eigen_floor) {
  auto es = decompose(p.mat(), "matrix_inv_sqrt");
  if (es.eigenvalues().minCoeff() < eigen_floor) {
    throw IllConditioned("matrix_inv_sqrt: eigenvalue below floor");
  }
  Vector inv_roots = es.eigenvalues().array().rsqrt();
  Matrix out = es.eigenvectors() * inv_roots.asDiagonal() * es.eigenvectors().transpose();
  return SpdMatrix(symmetrize(out));
}

double riemannian_distance(const SpdMatrix& p1, const SpdMatrix& p2) {
  if (p1.dim() != p2.dim()) {
    throw DimensionError("riemannian_distance: dimension mismatch");
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(p2.mat(), p1.mat());
  if (es.info() != Eigen::Success) {
    throw DegenerateMatrix("riemannian_distance: generalized eigensolve failed");
  }
  return es.eigenvalues().array().log().matrix().norm();
}

SpdMatrix mean(std::span<const SpdMatrix> matrices, MeanKind kind,
               const MeanSolverConfig& cfg) {
  if (matrices.empty()) {
    throw EmptyInput("mean: empty list");
  }
  const int dim = matrices[0].dim();
  for (const auto& p : matrices) {
    if (p.dim() != dim) {
      throw DimensionError("mean: dimension mismatch");
    }
  }
  const double w = 1.0 / static_cast<double>(matrices.size());

  if (kind == MeanKind::Euclidean) {
    Matrix acc = Matrix::Zero(dim, dim);
    for (const auto& p : matrices) acc += p.mat();
    return SpdMatrix(acc * w);
  }
  if (kind == MeanKind::LogEuclidean) {
    Matrix acc = Matrix::Zero(dim, dim);
    for (const auto& p : matrices) acc += matrix_log(p);
    return matrix_exp(acc * w);
  }

  // Karcher fixed point, step size 1, initialized at the Euclidean mean.
  SpdMatrix m = mean(matrices, MeanKind::Euclidean, cfg);
  for (int it = 0; it < cfg.max_iterations; ++it) {
    SpdMatrix m_half = matrix_sqrt(m);
    SpdMatrix m_inv_half = matrix_inv_sqrt(m, cfg.eigen_floor);
    Matrix tangent = Matrix::Zero(dim, dim);
    for (const auto& p : matrices) {
      tangent += matrix_log(congruence(p, m_inv_half.mat()));
    }
    tangent *= w;
    if (tangent.norm() < cfg.convergence_tol) {
      return m;
    }
    m = congruence(matrix_exp(tangent), m_half.mat());
  }
  throw ConvergenceError("mean: Karcher iteration did not converge", m.mat());
}

SpdMatrix congruence(const SpdMatrix& p, const Matrix& g) {
  if (g.rows() != g.cols() || g.rows() != p.dim()) {
    throw DimensionError("congruence: transform shape mismatch");
  }
  Eigen::JacobiSVD<Matrix> svd(g);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0 || smax / smin >= 1e12) {
    throw SingularTransform("congruence: transform is numerically singular");
  }
  Matrix q = g.transpose() * p.mat() * g;
  return SpdMatrix(symmetrize(q));
}

SpdMatrix regularize(const Matrix& sym, double eigen_floor) {
  check_symmetric(sym, "regularize");
  auto es = decompose(symmetrize(sym), "regularize");
  const double lmax = es.eigenvalues().maxCoeff();
  if (lmax <= 0.0) {
    throw DegenerateMatrix("regularize: matrix has no positive eigenvalue");
  }
  Vector clamped = es.eigenvalues().cwiseMax(eigen_floor * lmax);
  Matrix out = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
  return SpdMatrix(symmetrize(out));
}

}  // namespace mekt
