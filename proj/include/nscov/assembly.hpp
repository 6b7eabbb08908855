#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nscov/kernel.hpp"
#include "nscov/linalg.hpp"
#include "nscov/taper.hpp"

namespace nscov {

/// Isotropic reduction of local kernels: scale = Sigma(0, 0).
[[nodiscard]] std::vector<ScalarKernel> scalar_kernels(std::span<const LocalKernel> kernels);

/// Dense covariance among sites, nugget added on the diagonal.
/// Parallel over columns; the result does not depend on the thread count.
[[nodiscard]] Eigen::MatrixXd assemble_dense(const Eigen::MatrixX2d& locations,
                                             std::span<const LocalKernel> kernels,
                                             MaternScaling scaling = MaternScaling::Sqrt8Nu,
                                             double nugget = 0.0);

/// Cross covariance, rows from `a`, columns from `b`.
[[nodiscard]] Eigen::MatrixXd assemble_cross(const Eigen::MatrixX2d& loc_a, std::span<const LocalKernel> k_a,
                                             const Eigen::MatrixX2d& loc_b, std::span<const LocalKernel> k_b,
                                             MaternScaling scaling = MaternScaling::Sqrt8Nu);

/// Tapered covariance on a prebuilt pattern.
[[nodiscard]] SparseSymmetric assemble_tapered(std::shared_ptr<const SparsePattern> pattern,
                                               std::span<const ScalarKernel> kernels, const TaperSpec& taper,
                                               MaternScaling scaling = MaternScaling::Sqrt8Nu,
                                               double nugget = 0.0);

/// Tapered cross covariance stored row-wise on a neighbor list.
struct SparseCross {
  NeighborList neighbors;
  std::vector<double> values;
};
[[nodiscard]] SparseCross assemble_tapered_cross(const Eigen::MatrixX2d& loc_a, std::span<const ScalarKernel> k_a,
                                                 const Eigen::MatrixX2d& loc_b, std::span<const ScalarKernel> k_b,
                                                 const TaperSpec& taper,
                                                 MaternScaling scaling = MaternScaling::Sqrt8Nu);

/// Plain serial loops over the single-pair functions; kept for testing and
/// benchmarking the parallel versions.
namespace reference {

[[nodiscard]] Eigen::MatrixXd assemble_dense(const Eigen::MatrixX2d& locations,
                                             std::span<const LocalKernel> kernels,
                                             MaternScaling scaling = MaternScaling::Sqrt8Nu,
                                             double nugget = 0.0);

[[nodiscard]] Eigen::MatrixXd assemble_cross(const Eigen::MatrixX2d& loc_a, std::span<const LocalKernel> k_a,
                                             const Eigen::MatrixX2d& loc_b, std::span<const LocalKernel> k_b,
                                             MaternScaling scaling = MaternScaling::Sqrt8Nu);

/// Dense n x n matrix of cov_sparse * taper (zeros beyond delta).
[[nodiscard]] Eigen::MatrixXd assemble_tapered(const Eigen::MatrixX2d& locations,
                                               std::span<const ScalarKernel> kernels, const TaperSpec& taper,
                                               MaternScaling scaling = MaternScaling::Sqrt8Nu,
                                               double nugget = 0.0);

}  // namespace reference
}  // namespace nscov
