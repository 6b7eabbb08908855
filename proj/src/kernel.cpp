#include "nscov/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nscov {
namespace {

double det2(const Eigen::Matrix2d& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

double dot(std::span<const double> x, std::span<const double> c) {
  if (x.size() != c.size()) {
    throw std::invalid_argument("covariate and coefficient vectors differ in length");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * c[i];
  return s;
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

void SmoothnessBounds::validate() const {
  if (!(nu_min > 0.0) || !(nu_min <= nu_max) || !(nu_max <= kMaxSmoothness)) {
    throw std::invalid_argument("smoothness bounds must satisfy 0 < nu_min <= nu_max <= 50");
  }
}

double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double nu_from_linear(double eta, const SmoothnessBounds& bounds) {
  return (bounds.nu_max - bounds.nu_min) * logistic(eta) + bounds.nu_min;
}

double nu_fn(std::span<const double> x, std::span<const double> zeta,
             const SmoothnessBounds& bounds) {
  return nu_from_linear(dot(x, zeta), bounds);
}

double sigma_from_linear(double eta) { return std::exp(0.5 * eta); }

double sigma_fn(std::span<const double> x, std::span<const double> alpha) {
  return sigma_from_linear(dot(x, alpha));
}

KernelGeometry geometry_from_linear(double eta_ms, double eta_ga, double eta_tt) {
  constexpr double lo = kOmegaMargin * std::numbers::pi;
  constexpr double hi = (1.0 - kOmegaMargin) * std::numbers::pi;
  const double omega = std::clamp(logistic(eta_tt) * std::numbers::pi, lo, hi);
  return {std::exp(eta_ms), std::exp(eta_ga), omega};
}

Eigen::Matrix2d kernel_matrix(const KernelGeometry& g) {
  if (!(g.rho > 0.0) || !(g.r > 0.0) || !std::isfinite(g.rho) || !std::isfinite(g.r)) {
    throw std::invalid_argument("kernel_matrix: rho and r must be positive and finite");
  }
  if (!(g.omega > 0.0) || !(g.omega < std::numbers::pi)) {
    throw std::invalid_argument("kernel_matrix: degenerate tilt (omega must lie in (0, pi))");
  }
  const double rho2 = g.rho * g.rho;
  const double off = g.r * std::cos(g.omega);
  Eigen::Matrix2d m;
  m << 1.0, off, off, g.r * g.r;
  return rho2 * m;
}

Eigen::Matrix2d kernel_matrix(std::span<const double> x, const AnisotropyCoefficients& coeffs) {
  return kernel_matrix(geometry_from_linear(dot(x, as_span(coeffs.theta_ms)),
                                            dot(x, as_span(coeffs.theta_ga)),
                                            dot(x, as_span(coeffs.theta_tt))));
}

KernelEigen kernel_eigen(const KernelGeometry& g) {
  // Validates the geometry.
  const Eigen::Matrix2d m = kernel_matrix(g);
  (void)m;
  const double r2 = g.r * g.r;
  const double sin_w = std::sin(g.omega);
  const double cos_w = std::cos(g.omega);
  const double disc = (r2 + 1.0) * (r2 + 1.0) - 4.0 * r2 * sin_w * sin_w;
  const double a = std::sqrt(std::max(disc, 0.0));
  const double rho2 = g.rho * g.rho;

  KernelEigen out;
  out.values = {0.5 * rho2 * ((r2 + 1.0) + a), 0.5 * rho2 * ((r2 + 1.0) - a)};

  const double two_rc = 2.0 * g.r * cos_w;
  for (int i = 0; i < 2; ++i) {
    const double sign = i == 0 ? 1.0 : -1.0;
    // Two equivalent forms; the second one survives when cos(omega) = 0.
    Eigen::Vector2d v1(two_rc, r2 - 1.0 + sign * a);
    Eigen::Vector2d v2((1.0 - r2) + sign * a, two_rc);
    Eigen::Vector2d v = v1.norm() >= v2.norm() ? v1 : v2;
    const double norm = v.norm();
    if (norm > 0.0) {
      out.vectors[i] = v / norm;
    } else {
      out.vectors[i] = i == 0 ? Eigen::Vector2d(1.0, 0.0) : Eigen::Vector2d(0.0, 1.0);
    }
  }

  const double num = r2 - 1.0 + a;
  if (two_rc != 0.0) {
    out.rotation = std::atan(num / two_rc);
  } else {
    out.rotation = num > 0.0 ? std::numbers::pi / 2.0 : 0.0;
  }
  return out;
}

double prefactor(const Eigen::Matrix2d& sigma_i, const Eigen::Matrix2d& sigma_j) {
  const double di = det2(sigma_i);
  const double dj = det2(sigma_j);
  const double dm = det2(0.5 * (sigma_i + sigma_j));
  if (!(di > 0.0) || !(dj > 0.0) || !(dm > 0.0)) {
    throw std::invalid_argument("prefactor: singular kernel matrix");
  }
  return std::sqrt(std::sqrt(di * dj)) / std::sqrt(dm);
}

double q_distance(const Eigen::Vector2d& s_i, const Eigen::Vector2d& s_j,
                  const Eigen::Matrix2d& sigma_i, const Eigen::Matrix2d& sigma_j) {
  const Eigen::Matrix2d avg = 0.5 * (sigma_i + sigma_j);
  const double det = det2(avg);
  if (!(det > 0.0)) throw std::invalid_argument("q_distance: singular average kernel");
  const double dx = s_i.x() - s_j.x();
  const double dy = s_i.y() - s_j.y();
  const double q = (avg(1, 1) * dx * dx - 2.0 * avg(0, 1) * dx * dy + avg(0, 0) * dy * dy) / det;
  return q > 0.0 ? q : 0.0;
}

double cov_gr(const Eigen::Vector2d& s_i, const Eigen::Vector2d& s_j, const LocalKernel& k_i,
              const LocalKernel& k_j, MaternScaling scaling) {
  const double nu = std::sqrt(k_i.nu * k_j.nu);
  const double q = q_distance(s_i, s_j, k_i.Sigma, k_j.Sigma);
  return k_i.sigma * k_j.sigma * prefactor(k_i.Sigma, k_j.Sigma) *
         MaternCorrelation(nu, scaling)(std::sqrt(q));
}

double cov_sparse(double h, const ScalarKernel& k_i, const ScalarKernel& k_j,
                  MaternScaling scaling) {
  if (!(k_i.scale > 0.0) || !(k_j.scale > 0.0)) {
    throw std::invalid_argument("cov_sparse: kernel scales must be positive");
  }
  const double sum = k_i.scale + k_j.scale;
  const double pre = 2.0 * std::sqrt(k_i.scale * k_j.scale) / sum;
  const double nu = std::sqrt(k_i.nu * k_j.nu);
  return k_i.sigma * k_j.sigma * pre * MaternCorrelation(nu, scaling)(h / std::sqrt(0.5 * sum));
}

void validate(const LocalKernel& k, const SmoothnessBounds& bounds) {
  if (!(k.sigma > 0.0) || !std::isfinite(k.sigma)) {
    throw std::invalid_argument("local kernel: sigma must be positive");
  }
  if (!(k.Sigma(0, 0) > 0.0) || !(det2(k.Sigma) > 0.0) || k.Sigma(0, 1) != k.Sigma(1, 0)) {
    throw std::invalid_argument("local kernel: Sigma must be symmetric positive definite");
  }
  if (k.nu < bounds.nu_min || k.nu > bounds.nu_max) {
    throw std::invalid_argument("local kernel: nu outside smoothness bounds");
  }
}

}  // namespace nscov
