#include <cmath>

#include "nscov/errors.hpp"
#include "nscov/linalg.hpp"

namespace nscov {
namespace {

// Unblocked left-looking pass; returns the first pivot that is not positive.
Eigen::Index failing_pivot(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) return j;
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return n - 1;
}

template <class Apply>
double dominant_eigenvalue(Eigen::Index n, Apply apply) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 0.25 * std::sin(static_cast<double>(i) + 1.0);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 5000; ++it) {
    const Eigen::VectorXd w = apply(v);
    const double next = v.dot(w);
    const double norm = w.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) return next;
    v = w / norm;
    if (it > 0 && std::abs(next - lambda) <= 1e-7 * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

}  // namespace

DenseCholesky::DenseCholesky(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("cholesky: matrix is not square");
  if (!a.allFinite()) throw NumericalError("cholesky: matrix has non-finite entries");
  llt_.compute(a);
  if (llt_.info() != Eigen::Success) {
    throw IndefiniteError(failing_pivot(a), "cholesky: matrix is not positive definite");
  }
  const auto& m = llt_.matrixLLT();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!(m(i, i) > 0.0)) throw IndefiniteError(i, "cholesky: zero pivot");
    logdet_ += 2.0 * std::log(m(i, i));
  }
}

RescuedFactor<DenseCholesky> factor_dense(const Eigen::MatrixXd& a, bool allow_jitter) {
  try {
    return {DenseCholesky(a), false};
  } catch (const IndefiniteError&) {
    if (!allow_jitter) throw;
  }
  Eigen::MatrixXd b = a;
  b.diagonal().array() += 1e-8 * a.diagonal().mean();
  return {DenseCholesky(b), true};
}

double condition_estimate(const Eigen::MatrixXd& a, const DenseCholesky& factor) {
  const Eigen::Index n = a.rows();
  const double hi = dominant_eigenvalue(n, [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return a * v; });
  const double inv = dominant_eigenvalue(n, [&](const Eigen::VectorXd& v) { return factor.solve(v); });
  return hi * inv;
}

double condition_estimate(const Eigen::MatrixXd& a) { return condition_estimate(a, DenseCholesky(a)); }

double condition_estimate(const SparseSymmetric& a, const SparseCholesky& factor) {
  const Eigen::Index n = factor.size();
  const double hi = dominant_eigenvalue(n, [&](const Eigen::VectorXd& v) { return a.multiply(v); });
  const double inv = dominant_eigenvalue(n, [&](const Eigen::VectorXd& v) { return factor.solve(v); });
  return hi * inv;
}

}  // namespace nscov
