#include <cmath>

#include "nscov/errors.hpp"
#include "nscov/linalg.hpp"

namespace nscov {

SparseCholesky::SparseCholesky(const SparseSymmetric& a) : pattern_(a.pattern) {
  const SparsePattern& pat = *pattern_;
  if (a.values.size() != pat.nnz()) throw std::invalid_argument("sparse cholesky: values do not match pattern");
  const int n = pat.size();
  const auto& cp = pat.col_ptr();
  const auto& ci = pat.row_idx();
  const auto& parent = pat.etree();
  const auto& lp = pat.factor_col_ptr();
  li_.assign(pat.factor_nnz(), 0);
  lx_.assign(pat.factor_nnz(), 0.0);

  std::vector<int> next(lp.begin(), lp.end() - 1);
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  std::vector<int> mark(static_cast<std::size_t>(n), -1);
  std::vector<int> stack(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    // Row k of L: union of etree paths from the nonzeros of column k.
    int top = n;
    mark[static_cast<std::size_t>(k)] = k;
    for (int p = cp[static_cast<std::size_t>(k)]; p < cp[static_cast<std::size_t>(k) + 1]; ++p) {
      const int r = ci[static_cast<std::size_t>(p)];
      x[static_cast<std::size_t>(r)] = a.values[static_cast<std::size_t>(p)];
      int len = 0;
      for (int i = r; mark[static_cast<std::size_t>(i)] != k; i = parent[static_cast<std::size_t>(i)]) {
        stack[static_cast<std::size_t>(len++)] = i;
        mark[static_cast<std::size_t>(i)] = k;
      }
      while (len > 0) stack[static_cast<std::size_t>(--top)] = stack[static_cast<std::size_t>(--len)];
    }
    double d = x[static_cast<std::size_t>(k)];
    x[static_cast<std::size_t>(k)] = 0.0;
    for (; top < n; ++top) {
      const int i = stack[static_cast<std::size_t>(top)];
      const double lki = x[static_cast<std::size_t>(i)] / lx_[static_cast<std::size_t>(lp[static_cast<std::size_t>(i)])];
      x[static_cast<std::size_t>(i)] = 0.0;
      for (int p = lp[static_cast<std::size_t>(i)] + 1; p < next[static_cast<std::size_t>(i)]; ++p) {
        x[static_cast<std::size_t>(li_[static_cast<std::size_t>(p)])] -= lx_[static_cast<std::size_t>(p)] * lki;
      }
      d -= lki * lki;
      const int p = next[static_cast<std::size_t>(i)]++;
      li_[static_cast<std::size_t>(p)] = k;
      lx_[static_cast<std::size_t>(p)] = lki;
    }
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw IndefiniteError(pat.perm()[static_cast<std::size_t>(k)],
                            "sparse cholesky: matrix is not positive definite");
    }
    const int p = next[static_cast<std::size_t>(k)]++;
    li_[static_cast<std::size_t>(p)] = k;
    lx_[static_cast<std::size_t>(p)] = std::sqrt(d);
    logdet_ += std::log(d);
  }
}

void SparseCholesky::lower_solve(std::vector<double>& x) const {
  const auto& lp = pattern_->factor_col_ptr();
  const int n = size();
  for (int j = 0; j < n; ++j) {
    const auto first = static_cast<std::size_t>(lp[static_cast<std::size_t>(j)]);
    const auto last = static_cast<std::size_t>(lp[static_cast<std::size_t>(j) + 1]);
    const double xj = x[static_cast<std::size_t>(j)] / lx_[first];
    x[static_cast<std::size_t>(j)] = xj;
    for (std::size_t p = first + 1; p < last; ++p) x[static_cast<std::size_t>(li_[p])] -= lx_[p] * xj;
  }
}

void SparseCholesky::upper_solve(std::vector<double>& x) const {
  const auto& lp = pattern_->factor_col_ptr();
  for (int j = size() - 1; j >= 0; --j) {
    const auto first = static_cast<std::size_t>(lp[static_cast<std::size_t>(j)]);
    const auto last = static_cast<std::size_t>(lp[static_cast<std::size_t>(j) + 1]);
    double xj = x[static_cast<std::size_t>(j)];
    for (std::size_t p = first + 1; p < last; ++p) xj -= lx_[p] * x[static_cast<std::size_t>(li_[p])];
    x[static_cast<std::size_t>(j)] = xj / lx_[first];
  }
}

Eigen::VectorXd SparseCholesky::solve(const Eigen::VectorXd& b) const {
  const auto& perm = pattern_->perm();
  const int n = size();
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) y[static_cast<std::size_t>(k)] = b(perm[static_cast<std::size_t>(k)]);
  lower_solve(y);
  upper_solve(y);
  Eigen::VectorXd out(n);
  for (int k = 0; k < n; ++k) out(perm[static_cast<std::size_t>(k)]) = y[static_cast<std::size_t>(k)];
  return out;
}

double SparseCholesky::inverse_quadratic(const Eigen::VectorXd& b) const {
  const auto& perm = pattern_->perm();
  const int n = size();
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) y[static_cast<std::size_t>(k)] = b(perm[static_cast<std::size_t>(k)]);
  lower_solve(y);
  double s = 0.0;
  for (double v : y) s += v * v;
  return s;
}

Eigen::VectorXd SparseCholesky::multiply_lower(const Eigen::VectorXd& u) const {
  const auto& lp = pattern_->factor_col_ptr();
  const auto& perm = pattern_->perm();
  const int n = size();
  std::vector<double> y(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    for (int p = lp[static_cast<std::size_t>(j)]; p < lp[static_cast<std::size_t>(j) + 1]; ++p) {
      y[static_cast<std::size_t>(li_[static_cast<std::size_t>(p)])] += lx_[static_cast<std::size_t>(p)] * u(j);
    }
  }
  Eigen::VectorXd out(n);
  for (int k = 0; k < n; ++k) out(perm[static_cast<std::size_t>(k)]) = y[static_cast<std::size_t>(k)];
  return out;
}

RescuedFactor<SparseCholesky> factor_sparse(const SparseSymmetric& a, bool allow_jitter) {
  try {
    return {SparseCholesky(a), false};
  } catch (const IndefiniteError&) {
    if (!allow_jitter) throw;
  }
  SparseSymmetric b = a;
  const double eps = 1e-8 * a.mean_diagonal();
  for (std::size_t s = 0; s < b.values.size(); ++s) {
    if (a.pattern->site_a()[s] == a.pattern->site_b()[s]) b.values[s] += eps;
  }
  return {SparseCholesky(b), true};
}

}  // namespace nscov
