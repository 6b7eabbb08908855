#pragma once

namespace nscov {

/// Largest smoothness accepted anywhere in the library. Beyond this the Bessel
/// evaluation overflows for the distances met in practice.
inline constexpr double kMaxSmoothness = 50.0;

/// Modified Bessel function of the second kind for one fixed real order.
///
/// Uses Temme's series for x < 2 and Steed's continued fraction otherwise,
/// both on the reduced order |mu| <= 1/2, followed by forward recurrence to
/// the requested order. Order-dependent constants are computed once in the
/// constructor so repeated evaluation at many arguments is cheap.
class BesselK {
 public:
  explicit BesselK(double nu);

  /// K_nu(x) for x > 0.
  [[nodiscard]] double operator()(double x) const;

  /// exp(x) * K_nu(x) for x > 0; finite for large x where K_nu underflows.
  [[nodiscard]] double scaled(double x) const;

  [[nodiscard]] double order() const noexcept { return nu_; }

 private:
  double nu_;
  int steps_;      // number of upward recurrence steps
  double mu_;      // reduced order in [-1/2, 1/2]
  double gam1_;
  double gam2_;
  double gampl_;   // 1 / Gamma(1 + mu)
  double gammi_;   // 1 / Gamma(1 - mu)
  double pimu_fact_;
};

/// Convenience wrapper: K_nu(x).
[[nodiscard]] double bessel_k(double nu, double x);

/// How the Matern argument is formed from a (scaled) distance h.
enum class MaternScaling {
  Sqrt8Nu,  ///< argument sqrt(8 nu) * h: correlation ~0.1 at h = 1
  Unit,     ///< argument h, the textbook form used by most other software
};

/// Matern correlation of fixed smoothness nu, evaluated on distances that
/// already carry the scale (gamma = 1).
class MaternCorrelation {
 public:
  explicit MaternCorrelation(double nu, MaternScaling scaling = MaternScaling::Sqrt8Nu);

  [[nodiscard]] double operator()(double h) const;
  [[nodiscard]] double nu() const noexcept { return nu_; }
  [[nodiscard]] MaternScaling scaling() const noexcept { return scaling_; }

 private:
  double nu_;
  MaternScaling scaling_;
  double arg_factor_;
  double log_norm_;  // (1 - nu) log 2 - log Gamma(nu)
  double log_small_bound_;
  BesselK bessel_;
};

/// M(h; gamma, nu) = 2^{1-nu}/Gamma(nu) (a)^nu K_nu(a), a = sqrt(8 nu) h / gamma.
/// Throws std::invalid_argument on non-finite input, h < 0, gamma <= 0,
/// nu <= 0, or nu above kMaxSmoothness.
[[nodiscard]] double matern_correlation(double h, double gamma, double nu,
                                        MaternScaling scaling = MaternScaling::Sqrt8Nu);

}  // namespace nscov
