#include "mekt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace mekt {

std::pair<Matrix, Matrix> scatter_matrices(const FeatureMatrix& source) {
  if (!source.labels) {
    throw LabelsRequired("scatter_matrices: labels required");
  }
  const int d = source.dim();
  const int n = source.count();
  std::map<int, std::vector<int>> by_class;
  for (int i = 0; i < n; ++i) {
    by_class[(*source.labels)[i]].push_back(i);
  }
  if (by_class.size() < 2) {
    throw InsufficientClasses("scatter_matrices: need at least 2 classes");
  }

  Vector grand = source.columns.rowwise().mean();
  Matrix s_w = Matrix::Zero(d, d);
  Matrix s_b = Matrix::Zero(d, d);
  for (const auto& [cls, idx] : by_class) {
    Vector cm = Vector::Zero(d);
    for (int i : idx) cm += source.columns.col(i);
    cm /= static_cast<double>(idx.size());
    for (int i : idx) {
      Vector dev = source.columns.col(i) - cm;
      s_w.noalias() += dev * dev.transpose();
    }
    Vector shift = cm - grand;
    s_b.noalias() += static_cast<double>(idx.size()) * shift * shift.transpose();
  }
  return {s_w, s_b};
}

std::pair<Matrix, Matrix> graph_laplacian(const FeatureMatrix& target,
                                          int p_nn, double sigma) {
  const int n = target.count();
  if (n <= p_nn) {
    throw ConfigError("graph_laplacian: need more samples than neighbors");
  }
  if (sigma <= 0.0) {
    throw ConfigError("graph_laplacian: sigma must be positive");
  }

  Matrix dist2(n, n);
  for (int i = 0; i < n; ++i) {
    dist2(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double d2 = (target.columns.col(i) - target.columns.col(j)).squaredNorm();
      dist2(i, j) = d2;
      dist2(j, i) = d2;
    }
  }

  // p_nn nearest neighbors per node, symmetric OR rule
  Matrix s = Matrix::Zero(n, n);
  const double denom = 2.0 * sigma * sigma;
  for (int j = 0; j < n; ++j) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return dist2(a, j) < dist2(b, j);
    });
    int taken = 0;
    for (int i : order) {
      if (i == j) continue;
      s(i, j) = s(j, i) = std::exp(-dist2(i, j) / denom);
      if (++taken == p_nn) break;
    }
  }

  Vector degree = s.rowwise().sum();
  Vector d_isqrt(n);
  for (int i = 0; i < n; ++i) {
    // isolated vertices keep an identity row in L
    d_isqrt[i] = degree[i] > 0.0 ? 1.0 / std::sqrt(degree[i]) : 0.0;
  }
  Matrix laplacian = Matrix::Identity(n, n) -
                     d_isqrt.asDiagonal() * s * d_isqrt.asDiagonal();
  laplacian = 0.5 * (laplacian + laplacian.transpose());

  Matrix centering = Matrix::Identity(n, n) -
                     Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  return {laplacian, centering};
}

Matrix one_hot(const std::vector<int>& labels, int num_classes) {
  Matrix y = Matrix::Zero(static_cast<int>(labels.size()), num_classes);
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 1 || labels[i] > num_classes) {
      throw DimensionError("one_hot: label out of range");
    }
    y(static_cast<int>(i), labels[i] - 1) = 1.0;
  }
  return y;
}

namespace {

/// Accumulate the block quadratic form of one MMD term
/// || A^T X_S u - B^T X_T v ||_F^2 into R.
void add_mmd_term(Matrix& r, const Matrix& x_s, const Vector& u,
                  const Matrix& x_t, const Vector& v) {
  const int d = static_cast<int>(x_s.rows());
  Vector a = x_s * u;
  Vector b = x_t * v;
  r.topLeftCorner(d, d).noalias() += a * a.transpose();
  r.topRightCorner(d, d).noalias() -= a * b.transpose();
  r.bottomLeftCorner(d, d).noalias() -= b * a.transpose();
  r.bottomRightCorner(d, d).noalias() += b * b.transpose();
}

void check_mmd_shapes(const Matrix& x_s, const Matrix& y_s, const Matrix& x_t,
                      const Matrix& y_t) {
  if (y_s.cols() != y_t.cols()) {
    throw DimensionError("mmd blocks: class-count mismatch");
  }
  if (x_s.cols() != y_s.rows() || x_t.cols() != y_t.rows()) {
    throw DimensionError("mmd blocks: sample-count mismatch");
  }
}

}  // namespace

Matrix joint_mmd_blocks(const Matrix& x_s, const Matrix& y_s_onehot,
                        const Matrix& x_t, const Matrix& y_t_onehot) {
  check_mmd_shapes(x_s, y_s_onehot, x_t, y_t_onehot);
  const int d = static_cast<int>(x_s.rows());
  const int l = static_cast<int>(y_s_onehot.cols());
  Matrix n_s = y_s_onehot / static_cast<double>(x_s.cols());
  Matrix n_t = y_t_onehot / static_cast<double>(x_t.cols());
  Matrix r = Matrix::Zero(2 * d, 2 * d);
  for (int k = 0; k < l; ++k) {
    add_mmd_term(r, x_s, n_s.col(k), x_t, n_t.col(k));
  }
  return 0.5 * (r + r.transpose());
}

Matrix marginal_conditional_mmd_blocks(const Matrix& x_s,
                                       const Matrix& y_s_onehot,
                                       const Matrix& x_t,
                                       const Matrix& y_t_onehot) {
  check_mmd_shapes(x_s, y_s_onehot, x_t, y_t_onehot);
  const int d = static_cast<int>(x_s.rows());
  const int l = static_cast<int>(y_s_onehot.cols());
  const int n_s = static_cast<int>(x_s.cols());
  const int n_t = static_cast<int>(x_t.cols());
  Matrix r = Matrix::Zero(2 * d, 2 * d);

  add_mmd_term(r, x_s, Vector::Constant(n_s, 1.0 / n_s), x_t,
               Vector::Constant(n_t, 1.0 / n_t));
  for (int k = 0; k < l; ++k) {
    const double cs = y_s_onehot.col(k).sum();
    const double ct = y_t_onehot.col(k).sum();
    if (cs == 0.0 || ct == 0.0) continue;  // empty class: term skipped
    add_mmd_term(r, x_s, y_s_onehot.col(k) / cs, x_t, y_t_onehot.col(k) / ct);
  }
  return 0.5 * (r + r.transpose());
}

ProjectionPair solve_generalized_eig(const Matrix& lhs, const Matrix& v_blk,
                                     int p, double v_ridge, int d) {
  const int n2 = static_cast<int>(lhs.rows());
  if (v_blk.rows() != n2 || 2 * d != n2) {
    throw DimensionError("solve_generalized_eig: block shape mismatch");
  }
  if (p < 1 || p > n2) {
    throw DimensionError("solve_generalized_eig: subspace dim out of range");
  }

  Matrix v = v_blk + v_ridge * Matrix::Identity(n2, n2);
  Eigen::SelfAdjointEigenSolver<Matrix> ves(0.5 * (v + v.transpose()));
  if (ves.info() != Eigen::Success) {
    throw SolverError("solve_generalized_eig: V decomposition failed");
  }
  if (ves.eigenvalues().minCoeff() <= 0.0) {
    throw SolverError("solve_generalized_eig: V is not positive definite");
  }
  Vector inv_roots = ves.eigenvalues().array().rsqrt();
  Matrix v_isqrt =
      ves.eigenvectors() * inv_roots.asDiagonal() * ves.eigenvectors().transpose();

  Matrix whitened = v_isqrt * (0.5 * (lhs + lhs.transpose())) * v_isqrt;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (whitened + whitened.transpose()));
  if (es.info() != Eigen::Success || !es.eigenvalues().allFinite()) {
    throw SolverError("solve_generalized_eig: pencil decomposition failed");
  }

  // Eigen returns eigenvalues ascending; trailing eigenvectors of the
  // loss are the p smallest here.
  Matrix w = v_isqrt * es.eigenvectors().leftCols(p);
  ProjectionPair pair;
  pair.A = w.topRows(d);
  pair.B = w.bottomRows(d);
  pair.eigenvalues = es.eigenvalues().head(p);
  return pair;
}

namespace {

int num_classes_of(const std::vector<int>& labels) {
  int l = 0;
  for (int y : labels) l = std::max(l, y);
  if (l < 1) throw DimensionError("labels must be 1-based class ids");
  return l;
}

struct StaticBlocks {
  Matrix P_blk, L_blk, U_blk, V_blk;
};

/// Shared refinement loop over effective feature matrices (the raw
/// tangent features in the primal case, Gram columns when kernelized).
MektResult run_refinement(const Matrix& xs_eff, const std::vector<int>& y_s,
                          const Matrix& xt_eff, const StaticBlocks& blocks,
                          const MektConfig& cfg, Classifier& classifier,
                          MmdKind mmd, std::vector<int> pseudo) {
  const int d_eff = static_cast<int>(xs_eff.rows());
  const int l = num_classes_of(y_s);
  Matrix y_s_onehot = one_hot(y_s, l);

  MektResult result;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    Matrix y_t_onehot = one_hot(pseudo, l);
    Matrix r = mmd == MmdKind::Joint
                   ? joint_mmd_blocks(xs_eff, y_s_onehot, xt_eff, y_t_onehot)
                   : marginal_conditional_mmd_blocks(xs_eff, y_s_onehot,
                                                     xt_eff, y_t_onehot);
    Matrix lhs = cfg.alpha * blocks.P_blk + cfg.beta * blocks.L_blk +
                 cfg.rho * blocks.U_blk + r;
    ProjectionPair proj = solve_generalized_eig(lhs, blocks.V_blk,
                                                cfg.subspace_dim, cfg.v_ridge,
                                                d_eff);

    classifier.fit(proj.A.transpose() * xs_eff, y_s);
    std::vector<int> updated = classifier.predict(proj.B.transpose() * xt_eff);

    IterationDiag diag;
    Matrix n_s = y_s_onehot / static_cast<double>(xs_eff.cols());
    Matrix n_t = y_t_onehot / static_cast<double>(xt_eff.cols());
    diag.joint_mmd = (n_s.transpose() * xs_eff.transpose() * proj.A -
                      n_t.transpose() * xt_eff.transpose() * proj.B)
                         .squaredNorm();
    Matrix w(2 * d_eff, cfg.subspace_dim);
    w << proj.A, proj.B;
    diag.objective = (w.transpose() * lhs * w).trace();
    if (!std::isfinite(diag.objective)) {
      throw SolverError("mekt_fit: non-finite objective");
    }
    diag.label_changes = 0;
    for (size_t i = 0; i < pseudo.size(); ++i) {
      if (updated[i] != pseudo[i]) ++diag.label_changes;
    }
    result.diagnostics.push_back(diag);

    pseudo = std::move(updated);
    result.projections = std::move(proj);
  }
  result.predicted_labels = std::move(pseudo);
  return result;
}

void validate_fit_inputs(const FeatureMatrix& source,
                         const FeatureMatrix& target, const MektConfig& cfg) {
  if (!source.labels) {
    throw LabelsRequired("mekt_fit: source labels required");
  }
  if (source.dim() != target.dim()) {
    throw DimensionError("mekt_fit: feature dimensionality mismatch");
  }
  if (cfg.iterations < 1 || cfg.subspace_dim < 1) {
    throw ConfigError("mekt_fit: iterations and subspace_dim must be >= 1");
  }
  if (cfg.subspace_dim > source.dim()) {
    throw ConfigError("mekt_fit: subspace_dim exceeds feature dimensionality");
  }
}

std::vector<int> initial_pseudo_labels(const FeatureMatrix& source,
                                       const FeatureMatrix& target,
                                       Classifier& classifier) {
  // Algorithm needs target labels before the first R build; train on
  // the unprojected tangent features.
  classifier.fit(source.columns, *source.labels);
  return classifier.predict(target.columns);
}

}  // namespace

MektResult mekt_fit(const FeatureMatrix& source, const FeatureMatrix& target,
                    const MektConfig& cfg, Classifier& classifier,
                    MmdKind mmd) {
  validate_fit_inputs(source, target, cfg);
  const int d = source.dim();

  auto [s_w, s_b] = scatter_matrices(source);
  auto [laplacian, centering] = graph_laplacian(target, cfg.knn, cfg.sigma);
  const Matrix& x_t = target.columns;

  StaticBlocks blocks;
  blocks.P_blk = Matrix::Zero(2 * d, 2 * d);
  blocks.P_blk.topLeftCorner(d, d) = s_w;
  blocks.L_blk = Matrix::Zero(2 * d, 2 * d);
  blocks.L_blk.bottomRightCorner(d, d) = x_t * laplacian * x_t.transpose();
  blocks.U_blk = Matrix::Zero(2 * d, 2 * d);
  blocks.U_blk.topLeftCorner(d, d) = Matrix::Identity(d, d);
  blocks.U_blk.topRightCorner(d, d) = -Matrix::Identity(d, d);
  blocks.U_blk.bottomLeftCorner(d, d) = -Matrix::Identity(d, d);
  blocks.U_blk.bottomRightCorner(d, d) = 2.0 * Matrix::Identity(d, d);
  blocks.V_blk = Matrix::Zero(2 * d, 2 * d);
  blocks.V_blk.topLeftCorner(d, d) = s_b;
  blocks.V_blk.bottomRightCorner(d, d) = x_t * centering * x_t.transpose();

  auto pseudo = initial_pseudo_labels(source, target, classifier);
  return run_refinement(source.columns, *source.labels, x_t, blocks, cfg,
                        classifier, mmd, std::move(pseudo));
}

namespace {

Matrix gram_matrix(const Matrix& x, const KernelConfig& kernel) {
  if (kernel.kind == KernelKind::Linear) {
    return x.transpose() * x;
  }
  if (kernel.width <= 0.0) {
    throw ConfigError("mekt_fit_kernel: RBF width must be positive");
  }
  const int n = static_cast<int>(x.cols());
  Matrix g(n, n);
  const double denom = 2.0 * kernel.width * kernel.width;
  for (int i = 0; i < n; ++i) {
    g(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double v = std::exp(-(x.col(i) - x.col(j)).squaredNorm() / denom);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

}  // namespace

MektResult mekt_fit_kernel(const FeatureMatrix& source,
                           const FeatureMatrix& target, const MektConfig& cfg,
                           const KernelConfig& kernel, Classifier& classifier,
                           MmdKind mmd) {
  validate_fit_inputs(source, target, cfg);
  const int n_s = source.count();
  const int n_t = target.count();
  const int n = n_s + n_t;

  Matrix pooled(source.dim(), n);
  pooled << source.columns, target.columns;
  Matrix gram = gram_matrix(pooled, kernel);

  // Empirical kernel map: factor the Gram as Z^T Z with Z spanning only
  // the data range. The coefficient-space pencil shares the Gram's null
  // space across every block, so solving there would be 0/0; restricting
  // to the range reproduces the Gram-matrix formulation exactly (and a
  // linear kernel reduces to the primal solver up to rotation).
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  if (es.info() != Eigen::Success) {
    throw SolverError("mekt_fit_kernel: Gram decomposition failed");
  }
  const double lambda_max = es.eigenvalues().maxCoeff();
  if (!(lambda_max > 0.0)) {
    throw DegenerateMatrix("mekt_fit_kernel: Gram matrix has no range");
  }
  const double floor = 1e-10 * lambda_max;
  int rank = 0;
  for (int i = 0; i < n; ++i) {
    if (es.eigenvalues()(i) > floor) ++rank;
  }
  Matrix z(rank, n);
  for (int i = 0, at = 0; i < n; ++i) {
    if (es.eigenvalues()(i) > floor) {
      z.row(at++) = std::sqrt(es.eigenvalues()(i)) *
                    es.eigenvectors().col(i).transpose();
    }
  }
  if (cfg.subspace_dim > rank) {
    throw ConfigError("mekt_fit_kernel: subspace_dim exceeds the Gram rank");
  }

  FeatureMatrix mapped_source{z.leftCols(n_s), source.labels,
                              source.domain_id};
  const Matrix z_t = z.rightCols(n_t);

  auto [s_w, s_b] = scatter_matrices(mapped_source);
  // the neighborhood graph lives in the original data space
  auto [laplacian, centering] = graph_laplacian(target, cfg.knn, cfg.sigma);

  StaticBlocks blocks;
  blocks.P_blk = Matrix::Zero(2 * rank, 2 * rank);
  blocks.P_blk.topLeftCorner(rank, rank) = s_w;
  blocks.L_blk = Matrix::Zero(2 * rank, 2 * rank);
  blocks.L_blk.bottomRightCorner(rank, rank) = z_t * laplacian * z_t.transpose();
  blocks.U_blk = Matrix::Zero(2 * rank, 2 * rank);
  blocks.U_blk.topLeftCorner(rank, rank) = Matrix::Identity(rank, rank);
  blocks.U_blk.topRightCorner(rank, rank) = -Matrix::Identity(rank, rank);
  blocks.U_blk.bottomLeftCorner(rank, rank) = -Matrix::Identity(rank, rank);
  blocks.U_blk.bottomRightCorner(rank, rank) = 2.0 * Matrix::Identity(rank, rank);
  blocks.V_blk = Matrix::Zero(2 * rank, 2 * rank);
  blocks.V_blk.topLeftCorner(rank, rank) = s_b;
  blocks.V_blk.bottomRightCorner(rank, rank) = z_t * centering * z_t.transpose();

  auto pseudo = initial_pseudo_labels(source, target, classifier);
  return run_refinement(mapped_source.columns, *source.labels, z_t, blocks,
                        cfg, classifier, mmd, std::move(pseudo));
}

}  // namespace mekt
