#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "nscov/assembly.hpp"
#include "nscov/errors.hpp"
#include "nscov/linalg.hpp"

using namespace nscov;

namespace {

Eigen::MatrixXd random_spd(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return a * a.transpose() + n * Eigen::MatrixXd::Identity(n, n);
}

Eigen::MatrixX2d random_sites(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixX2d loc(n, 2);
  for (int i = 0; i < n; ++i) loc.row(i) << u(rng), u(rng);
  return loc;
}

SparseSymmetric tapered_matrix(const Eigen::MatrixX2d& loc, double delta, double nugget = 0.0) {
  auto pattern = SparsePattern::build(loc, delta);
  std::vector<ScalarKernel> k(static_cast<std::size_t>(loc.rows()), ScalarKernel{1.0, 0.01, 1.0});
  return assemble_tapered(pattern, k, TaperSpec{TaperFamily::Wendland1, delta}, MaternScaling::Sqrt8Nu, nugget);
}

}  // namespace

TEST(DenseCholesky, Identity) {
  const DenseCholesky f(Eigen::MatrixXd::Identity(5, 5));
  EXPECT_EQ(f.logdet(), 0.0);
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(5, 1, 5);
  EXPECT_EQ(f.solve(b), b);
}

TEST(DenseCholesky, DiagonalLogdetAndCondition) {
  Eigen::MatrixXd a = Eigen::Vector2d(4, 9).asDiagonal();
  const DenseCholesky f(a);
  EXPECT_NEAR(f.logdet(), std::log(36.0), 1e-15);
  EXPECT_NEAR(condition_estimate(a), 2.25, 1e-6);
  EXPECT_NEAR(condition_estimate(a, f), 2.25, 1e-6);
}

TEST(DenseCholesky, RandomSolveResidual) {
  const Eigen::MatrixXd a = random_spd(20, 1);
  const DenseCholesky f(a);
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(20, -1, 1);
  const Eigen::VectorXd x = f.solve(b);
  EXPECT_LE((a * x - b).norm() / b.norm(), 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  EXPECT_NEAR(f.logdet(), es.eigenvalues().array().log().sum(), 1e-10);
  EXPECT_TRUE((f.lower() * f.lower().transpose()).isApprox(a, 1e-12));
  EXPECT_TRUE(f.half_solve(b).isApprox(f.lower().triangularView<Eigen::Lower>().solve(b), 1e-12));
}

TEST(DenseCholesky, IndefiniteReportsPivot) {
  Eigen::Matrix3d a;
  a << 1, 0, 0, 0, 1, 2, 0, 2, 1;
  try {
    (void)DenseCholesky(a);
    FAIL();
  } catch (const IndefiniteError& e) {
    EXPECT_EQ(e.pivot(), 2);
  }
}

TEST(DenseCholesky, JitterRescue) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(3, 3);  // rank one
  EXPECT_THROW((void)factor_dense(a, false), IndefiniteError);
  const auto r = factor_dense(a, true);
  EXPECT_TRUE(r.jitter_used);
  EXPECT_FALSE(factor_dense(Eigen::MatrixXd::Identity(3, 3), true).jitter_used);
}

TEST(ConditionEstimate, MatchesEigenvalueRatio) {
  const Eigen::MatrixXd a = random_spd(30, 7);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  const double exact = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
  EXPECT_NEAR(condition_estimate(a) / exact, 1.0, 0.01);
}

TEST(SparsePattern, SpecExamples) {
  Eigen::MatrixX2d line(3, 2);
  line << 0, 0, 1, 0, 2, 0;
  EXPECT_EQ(SparsePattern::build(line, 1.5)->full_nnz(), 7u);
  EXPECT_EQ(SparsePattern::build(line, 0.5)->full_nnz(), 3u);
  EXPECT_EQ(SparsePattern::build(line, 10.0)->full_nnz(), 9u);

  const auto loc = random_sites(60, 2);
  const auto p = SparsePattern::build(loc, 1e-6);
  EXPECT_EQ(p->nnz(), 60u);
  EXPECT_EQ(SparsePattern::build(loc, 2.0)->nnz(), 60u * 61u / 2u);
}

TEST(SparsePattern, ContainsExactlyClosePairs) {
  const auto loc = random_sites(80, 3);
  const double delta = 0.2;
  const auto p = SparsePattern::build(loc, delta);
  std::size_t count = 0;
  for (int i = 0; i < 80; ++i) {
    for (int j = i; j < 80; ++j) {
      const bool close = (loc.row(i) - loc.row(j)).norm() < delta;
      EXPECT_EQ(p->contains(i, j), close) << i << "," << j;
      EXPECT_EQ(p->contains(j, i), close);
      count += close;
    }
  }
  EXPECT_EQ(p->nnz(), count);
  // permutation is a bijection
  for (int k = 0; k < 80; ++k) EXPECT_EQ(p->inverse_perm()[static_cast<std::size_t>(p->perm()[static_cast<std::size_t>(k)])], k);
}

TEST(SparseCholesky, MatchesDense) {
  const auto loc = random_sites(150, 4);
  const auto a = tapered_matrix(loc, 0.25, 1e-3);
  const Eigen::MatrixXd dense = a.to_dense();
  const SparseCholesky s(a);
  const DenseCholesky d(dense);
  EXPECT_NEAR(s.logdet(), d.logdet(), 1e-9 * std::abs(d.logdet()) + 1e-9);
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(150, -2, 3);
  EXPECT_TRUE(s.solve(b).isApprox(d.solve(b), 1e-9));
  EXPECT_NEAR(s.inverse_quadratic(b), b.dot(d.solve(b)), 1e-8 * b.dot(d.solve(b)));
  EXPECT_TRUE(a.multiply(b).isApprox(dense * b, 1e-13));

  Eigen::MatrixXd m(150, 150);
  for (int k = 0; k < 150; ++k) m.col(k) = s.multiply_lower(Eigen::VectorXd::Unit(150, k));
  EXPECT_TRUE((m * m.transpose()).isApprox(dense, 1e-10));
}

TEST(SparseCholesky, IndefinitePivotInOriginalNumbering) {
  auto pattern = SparsePattern::build(random_sites(10, 5), 10.0);
  SparseSymmetric a{pattern, std::vector<double>(pattern->nnz(), 0.0)};
  for (std::size_t k = 0; k < pattern->nnz(); ++k) {
    if (pattern->site_a()[k] == pattern->site_b()[k]) a.values[k] = pattern->site_a()[k] == 6 ? -1.0 : 1.0;
  }
  try {
    (void)SparseCholesky(a);
    FAIL();
  } catch (const IndefiniteError& e) {
    EXPECT_EQ(e.pivot(), 6);
  }
}

TEST(SparseCholesky, ConditionMatchesDense) {
  const auto a = tapered_matrix(random_sites(100, 6), 0.3, 1e-2);
  const SparseCholesky s(a);
  EXPECT_NEAR(condition_estimate(a, s) / condition_estimate(a.to_dense()), 1.0, 0.02);
}

TEST(NeighborsWithin, MatchesBruteForce) {
  const auto from = random_sites(40, 8), to = random_sites(70, 9);
  const auto nl = neighbors_within(from, to, 0.15);
  for (int i = 0; i < 40; ++i) {
    std::vector<int> want;
    for (int j = 0; j < 70; ++j)
      if ((from.row(i) - to.row(j)).norm() < 0.15) want.push_back(j);
    std::vector<int> got(nl.index.begin() + nl.offsets[static_cast<std::size_t>(i)],
                         nl.index.begin() + nl.offsets[static_cast<std::size_t>(i) + 1]);
    EXPECT_EQ(got, want);
  }
}
