#include <doctest.h>

#include "mekt/alignment.hpp"
#include "test_util.hpp"

using namespace mekt;
using mekt::test::random_matrix;

namespace {

DomainTrials random_domain(int n, int c, int t, std::mt19937_64& rng) {
  DomainTrials d;
  for (int i = 0; i < n; ++i) d.trials.push_back(random_matrix(c, t, rng));
  d.subject_id = "rand";
  return d;
}

}  // namespace

TEST_CASE("trial_covariance matches the brute-force outer product") {
  std::mt19937_64 rng(41);
  Matrix x = random_matrix(4, 64, rng);
  Matrix oracle = x * x.transpose();
  CHECK((trial_covariance(x).mat() - oracle).norm() < 1e-9 * oracle.norm());
}

TEST_CASE("trial_covariance of a one-hot trial is regularized to SPD") {
  Matrix x = Matrix::Zero(3, 10);
  x(0, 0) = 2.0;
  SpdMatrix p = trial_covariance(x);
  CHECK(p.mat()(0, 0) == doctest::Approx(4.0).epsilon(1e-6));
  Eigen::SelfAdjointEigenSolver<Matrix> es(p.mat());
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("trial_covariance rejects an all-zero trial") {
  CHECK_THROWS_AS(trial_covariance(Matrix::Zero(3, 10)), DegenerateMatrix);
}

TEST_CASE("center_align whitens the chosen mean to the identity") {
  // exact for the Euclidean mean and for the geometric mean (both are
  // equivariant under congruence); the log-Euclidean mean is not, so
  // whitening only pulls it closer to the identity rather than onto it
  std::mt19937_64 rng(43);
  DomainTrials d = random_domain(12, 5, 80, rng);
  for (MeanKind kind : {MeanKind::Euclidean, MeanKind::Riemannian}) {
    AlignedDomain a = center_align(d, kind);
    REQUIRE(a.covariances.size() == d.trials.size());
    SpdMatrix m = mean(a.covariances, kind);
    CHECK((m.mat() - Matrix::Identity(5, 5)).norm() < 1e-6);
  }
  AlignedDomain le = center_align(d, MeanKind::LogEuclidean);
  REQUIRE(le.covariances.size() == d.trials.size());
  std::vector<SpdMatrix> covs;
  for (const auto& x : d.trials) covs.push_back(trial_covariance(x));
  SpdMatrix before = mean(covs, MeanKind::LogEuclidean);
  SpdMatrix after = mean(le.covariances, MeanKind::LogEuclidean);
  const Matrix eye = Matrix::Identity(5, 5);
  CHECK((after.mat() - eye).norm() < 0.1 * (before.mat() - eye).norm());
}

TEST_CASE("center_align matches manual congruence by the mean inverse sqrt") {
  std::mt19937_64 rng(47);
  DomainTrials d = random_domain(8, 4, 50, rng);
  std::vector<SpdMatrix> covs;
  for (const auto& x : d.trials) covs.push_back(trial_covariance(x));
  SpdMatrix m = mean(covs, MeanKind::Euclidean);
  Matrix w = matrix_inv_sqrt(m).mat();
  AlignedDomain a = center_align(d, MeanKind::Euclidean);
  for (size_t i = 0; i < covs.size(); ++i) {
    Matrix oracle = w * covs[i].mat() * w;
    CHECK((a.covariances[i].mat() - oracle).norm() < 1e-9 * oracle.norm());
  }
  CHECK((a.reference.mat() - w).norm() < 1e-9 * w.norm());
}

TEST_CASE("center_align is idempotent") {
  std::mt19937_64 rng(53);
  DomainTrials d = random_domain(10, 4, 60, rng);
  AlignedDomain once = center_align(d, MeanKind::Riemannian);
  // a second alignment of already-centered covariances must be a no-op
  SpdMatrix m = mean(once.covariances, MeanKind::Riemannian);
  Matrix w = matrix_inv_sqrt(m).mat();
  CHECK((w - Matrix::Identity(4, 4)).norm() < 1e-5);
}

TEST_CASE("center_align preserves pairwise Riemannian distances") {
  std::mt19937_64 rng(59);
  DomainTrials d = random_domain(6, 4, 60, rng);
  std::vector<SpdMatrix> covs;
  for (const auto& x : d.trials) covs.push_back(trial_covariance(x));
  AlignedDomain a = center_align(d, MeanKind::Riemannian);
  for (size_t i = 0; i < covs.size(); ++i) {
    for (size_t j = i + 1; j < covs.size(); ++j) {
      const double before = riemannian_distance(covs[i], covs[j]);
      const double after =
          riemannian_distance(a.covariances[i], a.covariances[j]);
      CHECK(std::abs(after - before) < 1e-7 * std::max(1.0, before));
    }
  }
}

TEST_CASE("center_align carries labels and subject id through") {
  std::mt19937_64 rng(61);
  DomainTrials d = random_domain(4, 3, 40, rng);
  d.labels = std::vector<int>{1, 2, 1, 2};
  d.subject_id = "s01";
  AlignedDomain a = center_align(d, MeanKind::Euclidean);
  REQUIRE(a.labels.has_value());
  CHECK(*a.labels == *d.labels);
  CHECK(a.subject_id == "s01");
  CHECK(a.mean_kind == MeanKind::Euclidean);
}

TEST_CASE("center_align needs at least two trials") {
  std::mt19937_64 rng(67);
  DomainTrials d = random_domain(1, 3, 40, rng);
  CHECK_THROWS_AS(center_align(d, MeanKind::Euclidean), InsufficientData);
}

TEST_CASE("riemannian_align uses only the reference subset") {
  std::mt19937_64 rng(71);
  DomainTrials d = random_domain(8, 4, 60, rng);
  std::vector<int> subset{0, 2, 4};
  AlignedDomain a = riemannian_align(d, subset);
  std::vector<SpdMatrix> ref_covs;
  for (int i : subset) ref_covs.push_back(trial_covariance(d.trials[i]));
  SpdMatrix m = mean(ref_covs, MeanKind::Riemannian);
  Matrix w = matrix_inv_sqrt(m).mat();
  Matrix oracle = w * trial_covariance(d.trials[1]).mat() * w;
  CHECK((a.covariances[1].mat() - oracle).norm() < 1e-8 * oracle.norm());
}

TEST_CASE("riemannian_align rejects an empty reference subset") {
  std::mt19937_64 rng(73);
  DomainTrials d = random_domain(4, 3, 40, rng);
  CHECK_THROWS_AS(riemannian_align(d, {}), InsufficientData);
}

TEST_CASE("euclidean_align whitens the arithmetic mean covariance") {
  std::mt19937_64 rng(79);
  DomainTrials d = random_domain(10, 4, 60, rng);
  DomainTrials e = euclidean_align(d);
  Matrix sum = Matrix::Zero(4, 4);
  for (const auto& x : e.trials) sum += x * x.transpose();
  sum /= static_cast<double>(e.trials.size());
  CHECK((sum - Matrix::Identity(4, 4)).norm() < 1e-8);
}

TEST_CASE("euclidean_align transforms trials, not covariances") {
  std::mt19937_64 rng(83);
  DomainTrials d = random_domain(6, 3, 50, rng);
  Matrix sum = Matrix::Zero(3, 3);
  for (const auto& x : d.trials) sum += x * x.transpose();
  sum /= static_cast<double>(d.trials.size());
  Matrix w = matrix_inv_sqrt(regularize(sum)).mat();
  DomainTrials e = euclidean_align(d);
  CHECK((e.trials[0] - w * d.trials[0]).norm() < 1e-9 * d.trials[0].norm());
  CHECK(e.trials[0].rows() == 3);
  CHECK(e.trials[0].cols() == 50);
}
