#include "nscov/matern.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nscov {
namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Taylor coefficients of 1/Gamma(z) = sum_k c[k] z^(k+1), Abramowitz & Stegun 6.1.34.
constexpr std::array<double, 26> kReciprocalGamma = {
    1.0000000000000000,  0.5772156649015329,  -0.6558780715202538, -0.0420026350340952,
    0.1665386113822915,  -0.0421977345555443, -0.0096219715278770, 0.0072189432466630,
    -0.0011651675918591, -0.0002152416741149, 0.0001280502823882,  -0.0000201348547807,
    -0.0000012504934821, 0.0000011330272320,  -0.0000002056338417, 0.0000000061160950,
    0.0000000050020075,  -0.0000000011812746, 0.0000000001043427,  0.0000000000077823,
    -0.0000000000036968, 0.0000000000005100,  -0.0000000000000206, -0.0000000000000054,
    0.0000000000000014,  0.0000000000000001};

}  // namespace

BesselK::BesselK(double nu) : nu_(nu) {
  if (!std::isfinite(nu) || nu < 0.0) {
    throw std::invalid_argument("BesselK: order must be finite and non-negative");
  }
  steps_ = static_cast<int>(nu + 0.5);
  mu_ = nu - steps_;

  // 1/Gamma(1+z) = sum_k c[k] z^k. Odd and even parts give gam1 and gam2
  // without the cancellation of the direct difference at small mu.
  double odd = 0.0;   // sum over k odd of c[k] mu^(k-1)
  double even = 0.0;  // sum over k even of c[k] mu^k
  double power = 1.0;
  for (std::size_t k = 0; k < kReciprocalGamma.size(); ++k) {
    if (k % 2 == 0) {
      even += kReciprocalGamma[k] * power;
    } else {
      odd += kReciprocalGamma[k] * power / (mu_ == 0.0 ? 1.0 : mu_);
    }
    power *= mu_;
  }
  if (mu_ == 0.0) odd = kReciprocalGamma[1];
  gam1_ = -odd;
  gam2_ = even;
  gampl_ = gam2_ - mu_ * gam1_;
  gammi_ = gam2_ + mu_ * gam1_;
  const double pimu = std::numbers::pi * mu_;
  pimu_fact_ = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
}

double BesselK::scaled(double x) const {
  if (!(x > 0.0)) throw std::invalid_argument("BesselK: argument must be positive");
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;
  const double mu2 = mu_ * mu_;
  double k_mu = 0.0;
  double k_mu1 = 0.0;

  if (x < 2.0) {
    const double half_x = 0.5 * x;
    const double d = -std::log(half_x);
    double e = mu_ * d;
    const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    double ff = pimu_fact_ * (gam1_ * std::cosh(e) + gam2_ * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / gampl_;
    double q = 0.5 / (e * gammi_);
    double c = 1.0;
    const double dd = half_x * half_x;
    double sum1 = p;
    for (int i = 1; i <= kMaxIterations; ++i) {
      ff = (i * ff + p + q) / (i * static_cast<double>(i) - mu2);
      c *= dd / i;
      p /= (i - mu_);
      q /= (i + mu_);
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - i * ff);
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    const double ex = std::exp(x);
    k_mu = sum * ex;
    k_mu1 = sum1 * xi2 * ex;
  } else {
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25 - mu2;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 1; i < kMaxIterations; ++i) {
      a -= 2 * i;
      c = -a * c / (i + 1.0);
      const double qnew = (q1 - b * q2) / a;
      q1 = q2;
      q2 = qnew;
      q += c * qnew;
      b += 2.0;
      d = 1.0 / (b + a * d);
      delh = (b * d - 1.0) * delh;
      h += delh;
      const double dels = q * delh;
      s += dels;
      if (std::abs(dels / s) < kEps) break;
    }
    h = a1 * h;
    k_mu = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
    k_mu1 = k_mu * (mu_ + x + 0.5 - h) * xi;
  }

  for (int i = 1; i <= steps_; ++i) {
    const double next = (mu_ + i) * xi2 * k_mu1 + k_mu;
    k_mu = k_mu1;
    k_mu1 = next;
  }
  return k_mu;
}

double BesselK::operator()(double x) const { return scaled(x) * std::exp(-x); }

double bessel_k(double nu, double x) { return BesselK(nu)(x); }

MaternCorrelation::MaternCorrelation(double nu, MaternScaling scaling)
    : nu_(nu),
      scaling_(scaling),
      arg_factor_(scaling == MaternScaling::Sqrt8Nu ? std::sqrt(8.0 * nu) : 1.0),
      log_norm_((1.0 - nu) * std::numbers::ln2 - std::lgamma(nu)),
      log_small_bound_(std::lgamma(nu) + (nu - 1.0) * std::numbers::ln2),
      bessel_(nu) {
  if (!std::isfinite(nu) || nu <= 0.0) {
    throw std::invalid_argument("Matern: smoothness must be finite and positive");
  }
  if (nu > kMaxSmoothness) {
    throw std::invalid_argument("Matern: smoothness above the supported ceiling of 50");
  }
}

double MaternCorrelation::operator()(double h) const {
  const double a = arg_factor_ * h;
  if (a <= 0.0) return 1.0;
  const double log_a = std::log(a);
  // K_nu(a) ~ Gamma(nu) 2^(nu-1) a^-nu near the origin; switch to the
  // two-term expansion before that overflows.
  if (nu_ > 1.0 && log_small_bound_ - nu_ * log_a > 650.0) {
    return 1.0 - a * a / (4.0 * (nu_ - 1.0));
  }
  const double exponent = log_norm_ + nu_ * log_a - a;
  if (exponent < -745.0) return 0.0;
  const double value = std::exp(exponent) * bessel_.scaled(a);
  return value > 1.0 ? 1.0 : value;
}

double matern_correlation(double h, double gamma, double nu, MaternScaling scaling) {
  if (!std::isfinite(h) || !std::isfinite(gamma) || !std::isfinite(nu)) {
    throw std::invalid_argument("matern_correlation: non-finite input");
  }
  if (h < 0.0) throw std::invalid_argument("matern_correlation: negative distance");
  if (gamma <= 0.0) throw std::invalid_argument("matern_correlation: scale must be positive");
  return MaternCorrelation(nu, scaling)(h / gamma);
}

}  // namespace nscov
