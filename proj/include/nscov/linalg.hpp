#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "nscov/taper.hpp"

namespace nscov {

/// Cholesky factor of a dense SPD matrix.
class DenseCholesky {
 public:
  /// Throws IndefiniteError carrying the failing pivot.
  explicit DenseCholesky(const Eigen::MatrixXd& a);

  [[nodiscard]] Eigen::Index size() const noexcept { return llt_.rows(); }
  [[nodiscard]] double logdet() const noexcept { return logdet_; }
  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return llt_.solve(b); }
  [[nodiscard]] Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const { return llt_.solve(b); }
  /// L^{-1} b.
  [[nodiscard]] Eigen::MatrixXd half_solve(const Eigen::MatrixXd& b) const {
    return llt_.matrixL().solve(b);
  }
  /// L b.
  [[nodiscard]] Eigen::VectorXd multiply_lower(const Eigen::VectorXd& b) const {
    return llt_.matrixL() * b;
  }
  [[nodiscard]] Eigen::MatrixXd lower() const { return llt_.matrixL(); }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double logdet_ = 0.0;
};

/// Result of a factorization with the optional diagonal jitter retry.
template <class Factor>
struct RescuedFactor {
  Factor factor;
  bool jitter_used = false;
};

/// Factor `a`; on failure and when allowed, retry once with
/// 1e-8 * mean(diag) added to the diagonal.
[[nodiscard]] RescuedFactor<DenseCholesky> factor_dense(const Eigen::MatrixXd& a, bool allow_jitter);

/// Sparsity structure of a tapered covariance: all pairs closer than delta,
/// reordered with approximate minimum degree, plus the symbolic Cholesky
/// analysis. Depends only on the sites and delta, so it is built once and
/// shared by every factorization with those sites.
class SparsePattern {
 public:
  /// Pairs with |s_i - s_j| < delta (diagonal always present).
  static std::shared_ptr<const SparsePattern> build(const Eigen::MatrixX2d& locations, double delta);

  [[nodiscard]] int size() const noexcept { return n_; }
  /// Stored entries of the upper triangle (diagonal included).
  [[nodiscard]] std::size_t nnz() const noexcept { return row_idx_.size(); }
  /// Entries of the full symmetric matrix.
  [[nodiscard]] std::size_t full_nnz() const noexcept { return 2 * nnz() - static_cast<std::size_t>(n_); }
  [[nodiscard]] std::size_t factor_nnz() const noexcept {
    return static_cast<std::size_t>(l_col_ptr_.back());
  }
  [[nodiscard]] double delta() const noexcept { return delta_; }

  // Permuted upper-triangular CSC: column k holds rows <= k of P A P^T,
  // sorted ascending.
  [[nodiscard]] const std::vector<int>& col_ptr() const noexcept { return col_ptr_; }
  [[nodiscard]] const std::vector<int>& row_idx() const noexcept { return row_idx_; }
  /// Original site indices of each stored slot.
  [[nodiscard]] const std::vector<int>& site_a() const noexcept { return site_a_; }
  [[nodiscard]] const std::vector<int>& site_b() const noexcept { return site_b_; }
  /// Euclidean distance of each stored slot.
  [[nodiscard]] const std::vector<double>& distance() const noexcept { return distance_; }
  /// perm[k] = original index placed at position k.
  [[nodiscard]] const std::vector<int>& perm() const noexcept { return perm_; }
  [[nodiscard]] const std::vector<int>& inverse_perm() const noexcept { return inv_perm_; }
  [[nodiscard]] const std::vector<int>& etree() const noexcept { return parent_; }
  [[nodiscard]] const std::vector<int>& factor_col_ptr() const noexcept { return l_col_ptr_; }

  /// True when (i, j) in original numbering is stored.
  [[nodiscard]] bool contains(int i, int j) const;

 private:
  SparsePattern() = default;
  void analyze();

  int n_ = 0;
  double delta_ = 0.0;
  std::vector<int> col_ptr_;
  std::vector<int> row_idx_;
  std::vector<int> site_a_;
  std::vector<int> site_b_;
  std::vector<double> distance_;
  std::vector<int> perm_;
  std::vector<int> inv_perm_;
  std::vector<int> parent_;
  std::vector<int> l_col_ptr_;
};

/// Symmetric matrix with values on a shared SparsePattern.
struct SparseSymmetric {
  std::shared_ptr<const SparsePattern> pattern;
  std::vector<double> values;  // aligned with pattern slots

  [[nodiscard]] Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  [[nodiscard]] Eigen::MatrixXd to_dense() const;
  [[nodiscard]] double mean_diagonal() const;
};

/// Up-looking sparse Cholesky on the pattern's fill-reducing ordering.
class SparseCholesky {
 public:
  /// Throws IndefiniteError with the failing pivot in original numbering.
  explicit SparseCholesky(const SparseSymmetric& a);

  [[nodiscard]] int size() const noexcept { return pattern_->size(); }
  [[nodiscard]] double logdet() const noexcept { return logdet_; }
  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  /// ||L^{-1} P b||^2 = b^T A^{-1} b.
  [[nodiscard]] double inverse_quadratic(const Eigen::VectorXd& b) const;
  /// A x via L L^T in the original ordering (for simulation: L u).
  [[nodiscard]] Eigen::VectorXd multiply_lower(const Eigen::VectorXd& u) const;

 private:
  void lower_solve(std::vector<double>& x) const;
  void upper_solve(std::vector<double>& x) const;

  std::shared_ptr<const SparsePattern> pattern_;
  std::vector<int> li_;
  std::vector<double> lx_;
  double logdet_ = 0.0;
};

[[nodiscard]] RescuedFactor<SparseCholesky> factor_sparse(const SparseSymmetric& a, bool allow_jitter);

/// Ratio of extreme eigenvalues by power iteration (largest) and inverse
/// iteration through the factor (smallest); about 1% accuracy.
[[nodiscard]] double condition_estimate(const Eigen::MatrixXd& a);
[[nodiscard]] double condition_estimate(const Eigen::MatrixXd& a, const DenseCholesky& factor);
[[nodiscard]] double condition_estimate(const SparseSymmetric& a, const SparseCholesky& factor);

/// Sites of `to` within distance delta of each site in `from` (grid bucketing).
struct NeighborList {
  std::vector<int> offsets;   // size from.rows() + 1
  std::vector<int> index;     // indices into `to`
  std::vector<double> distance;
};
[[nodiscard]] NeighborList neighbors_within(const Eigen::MatrixX2d& from, const Eigen::MatrixX2d& to,
                                            double delta);

}  // namespace nscov
