#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "mekt/classify.hpp"
#include "mekt/features.hpp"

namespace mekt {

struct MektConfig {
  double alpha = 0.01;    // source discriminability weight
  double beta = 0.1;      // target locality weight
  double rho = 20.0;      // parameter-transfer weight
  int subspace_dim = 10;  // p
  int iterations = 5;     // refinement loop length N
  int knn = 5;            // graph neighbors
  double sigma = 1.0;     // graph kernel width
  double v_ridge = 1e-6;  // added to V's diagonal to keep the pencil definite
};

/// Block matrices of the generalized eigenproblem, all 2d x 2d.
struct SolverMatrices {
  Matrix P_blk, L_blk, U_blk, V_blk, R_blk;
  Matrix S_w, S_b;      // d x d source scatters
  Matrix laplacian;     // n_T x n_T
  Matrix centering;     // n_T x n_T
};

/// Source and target subspace maps with their eigenvalues.
struct ProjectionPair {
  Matrix A;           // d x p
  Matrix B;           // d x p
  Vector eigenvalues; // ascending
};

struct IterationDiag {
  double joint_mmd = 0.0;
  double objective = 0.0;
  int label_changes = 0;
};

struct MektResult {
  ProjectionPair projections;
  std::vector<int> predicted_labels;
  std::vector<IterationDiag> diagnostics;
};

/// Classifier handle used inside the refinement loop.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual void fit(const Matrix& x, const std::vector<int>& labels) = 0;
  virtual std::vector<int> predict(const Matrix& x) const = 0;
};

/// Shrinkage LDA as the default refinement classifier.
class LdaClassifier : public Classifier {
 public:
  explicit LdaClassifier(std::optional<double> gamma = std::nullopt)
      : gamma_(gamma) {}
  void fit(const Matrix& x, const std::vector<int>& labels) override {
    model_ = lda_fit(x, labels, gamma_);
  }
  std::vector<int> predict(const Matrix& x) const override {
    return lda_predict(model_, x);
  }

 private:
  std::optional<double> gamma_;
  LdaModel model_;
};

/// Within- and between-class scatter of a labeled feature matrix.
std::pair<Matrix, Matrix> scatter_matrices(const FeatureMatrix& source);

/// kNN similarity graph (symmetric OR rule, Gaussian weights),
/// normalized Laplacian L = I - D^-1/2 S D^-1/2 and centering matrix H.
std::pair<Matrix, Matrix> graph_laplacian(const FeatureMatrix& target,
                                          int p_nn, double sigma);

/// One-hot encoding, n x l, classes 1..l by column.
Matrix one_hot(const std::vector<int>& labels, int num_classes);

/// Joint-probability MMD block matrix R.
Matrix joint_mmd_blocks(const Matrix& x_s, const Matrix& y_s_onehot,
                        const Matrix& x_t, const Matrix& y_t_onehot);

/// Traditional marginal + per-class conditional MMD block matrix
/// (the ablation variant). Empty predicted classes are skipped.
Matrix marginal_conditional_mmd_blocks(const Matrix& x_s,
                                       const Matrix& y_s_onehot,
                                       const Matrix& x_t,
                                       const Matrix& y_t_onehot);

enum class MmdKind { Joint, MarginalConditional };

/// Solve (alpha P + beta L + rho U + R) w = eta V w for the p
/// eigenvectors with smallest eta, normalized to w^T V w = 1.
ProjectionPair solve_generalized_eig(const Matrix& lhs, const Matrix& v_blk,
                                     int p, double v_ridge, int d);

/// The refinement loop: build static blocks once, then alternate
/// between solving the eigenproblem and re-predicting target labels.
MektResult mekt_fit(const FeatureMatrix& source, const FeatureMatrix& target,
                    const MektConfig& cfg, Classifier& classifier,
                    MmdKind mmd = MmdKind::Joint);

enum class KernelKind { Linear, Rbf };

struct KernelConfig {
  KernelKind kind = KernelKind::Linear;
  double width = 1.0;  // RBF only
};

/// Kernelized variant over Gram matrices of the pooled data.
MektResult mekt_fit_kernel(const FeatureMatrix& source,
                           const FeatureMatrix& target, const MektConfig& cfg,
                           const KernelConfig& kernel, Classifier& classifier,
                           MmdKind mmd = MmdKind::Joint);

}  // namespace mekt
