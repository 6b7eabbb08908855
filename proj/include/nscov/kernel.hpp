#pragma once

#include <array>
#include <span>

#include <Eigen/Dense>

#include "nscov/matern.hpp"

namespace nscov {

/// Lower and upper bound of the spatially varying smoothness.
struct SmoothnessBounds {
  double nu_min = 0.5;
  double nu_max = 2.5;

  /// Throws std::invalid_argument unless 0 < nu_min <= nu_max <= kMaxSmoothness.
  void validate() const;
};

/// Per-location triple (sigma, Sigma, nu) realizing the spatially varying functions.
struct LocalKernel {
  double sigma = 1.0;
  Eigen::Matrix2d Sigma = Eigen::Matrix2d::Identity();
  double nu = 0.5;
};

/// Scalar-kernel specialization Sigma = scale * I used by the tapered model.
struct ScalarKernel {
  double sigma = 1.0;
  double scale = 1.0;
  double nu = 0.5;
};

/// Coefficient blocks of the anisotropy model, acting on standardized covariates.
struct AnisotropyCoefficients {
  Eigen::VectorXd theta_ms;
  Eigen::VectorXd theta_ga;
  Eigen::VectorXd theta_tt;
};

/// Geometric description of Sigma = rho^2 [[1, r cos w], [r cos w, r^2]].
struct KernelGeometry {
  double rho = 1.0;
  double r = 1.0;
  double omega = 1.5707963267948966;
};

/// Eigen-structure of a kernel matrix in closed form.
struct KernelEigen {
  std::array<double, 2> values{};            // descending
  std::array<Eigen::Vector2d, 2> vectors{};  // unit length, matching values
  double rotation = 0.0;                     // angle of the major axis, radians
};

/// Tilt angles are kept this fraction of pi away from 0 and pi.
inline constexpr double kOmegaMargin = 1e-6;

[[nodiscard]] double logistic(double eta);

/// (nu_max - nu_min) / (1 + exp(-eta)) + nu_min. Saturates at the bounds.
[[nodiscard]] double nu_from_linear(double eta, const SmoothnessBounds& bounds);
[[nodiscard]] double nu_fn(std::span<const double> x, std::span<const double> zeta,
                           const SmoothnessBounds& bounds);

/// exp(0.5 eta).
[[nodiscard]] double sigma_from_linear(double eta);
[[nodiscard]] double sigma_fn(std::span<const double> x, std::span<const double> alpha);

/// rho = exp(eta_ms), r = exp(eta_ga), omega = pi * logistic(eta_tt) clamped
/// into [kOmegaMargin pi, (1 - kOmegaMargin) pi].
[[nodiscard]] KernelGeometry geometry_from_linear(double eta_ms, double eta_ga, double eta_tt);

/// Throws std::invalid_argument for rho, r <= 0 or omega outside (0, pi).
[[nodiscard]] Eigen::Matrix2d kernel_matrix(const KernelGeometry& g);
[[nodiscard]] Eigen::Matrix2d kernel_matrix(std::span<const double> x,
                                            const AnisotropyCoefficients& coeffs);

[[nodiscard]] KernelEigen kernel_eigen(const KernelGeometry& g);

/// |Si|^{1/4} |Sj|^{1/4} / |(Si + Sj) / 2|^{1/2}.
[[nodiscard]] double prefactor(const Eigen::Matrix2d& sigma_i, const Eigen::Matrix2d& sigma_j);

/// ds^T ((Si + Sj) / 2)^{-1} ds.
[[nodiscard]] double q_distance(const Eigen::Vector2d& s_i, const Eigen::Vector2d& s_j,
                                const Eigen::Matrix2d& sigma_i, const Eigen::Matrix2d& sigma_j);

/// Modular nonstationary covariance between two sites.
[[nodiscard]] double cov_gr(const Eigen::Vector2d& s_i, const Eigen::Vector2d& s_j,
                            const LocalKernel& k_i, const LocalKernel& k_j,
                            MaternScaling scaling = MaternScaling::Sqrt8Nu);

/// Isotropic (Sigma = scale * I) specialization for sites a distance h apart.
[[nodiscard]] double cov_sparse(double h, const ScalarKernel& k_i, const ScalarKernel& k_j,
                                MaternScaling scaling = MaternScaling::Sqrt8Nu);

/// Throws std::invalid_argument if the kernel violates its invariants.
void validate(const LocalKernel& k, const SmoothnessBounds& bounds);

}  // namespace nscov
