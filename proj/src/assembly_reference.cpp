#include "nscov/assembly.hpp"

namespace nscov::reference {

Eigen::MatrixXd assemble_dense(const Eigen::MatrixX2d& locations, std::span<const LocalKernel> kernels,
                               MaternScaling scaling, double nugget) {
  const Eigen::Index n = locations.rows();
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = cov_gr(locations.row(i).transpose(), locations.row(j).transpose(),
                       kernels[static_cast<std::size_t>(i)], kernels[static_cast<std::size_t>(j)], scaling);
    }
    m(i, i) += nugget;
  }
  return m;
}

Eigen::MatrixXd assemble_cross(const Eigen::MatrixX2d& loc_a, std::span<const LocalKernel> k_a,
                               const Eigen::MatrixX2d& loc_b, std::span<const LocalKernel> k_b,
                               MaternScaling scaling) {
  Eigen::MatrixXd m(loc_a.rows(), loc_b.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = cov_gr(loc_a.row(i).transpose(), loc_b.row(j).transpose(), k_a[static_cast<std::size_t>(i)],
                       k_b[static_cast<std::size_t>(j)], scaling);
    }
  }
  return m;
}

Eigen::MatrixXd assemble_tapered(const Eigen::MatrixX2d& locations, std::span<const ScalarKernel> kernels,
                                 const TaperSpec& taper, MaternScaling scaling, double nugget) {
  const Eigen::Index n = locations.rows();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = (locations.row(i) - locations.row(j)).norm();
      if (i != j && !(h < taper.delta)) continue;
      m(i, j) = cov_sparse(h, kernels[static_cast<std::size_t>(i)], kernels[static_cast<std::size_t>(j)], scaling) *
                taper_correlation(h, taper);
    }
    m(i, i) += nugget;
  }
  return m;
}

}  // namespace nscov::reference
