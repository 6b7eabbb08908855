#include "nscov/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "nscov/errors.hpp"

namespace nscov {
namespace {

// Matern object rebuilt only when the pair smoothness changes.
class MaternMemo {
 public:
  explicit MaternMemo(MaternScaling scaling) : scaling_(scaling) {}

  double operator()(double nu, double h) {
    if (!m_ || m_->nu() != nu) m_.emplace(nu, scaling_);
    return (*m_)(h);
  }

 private:
  MaternScaling scaling_;
  std::optional<MaternCorrelation> m_;
};

struct SiteTerms {
  double quarter_det;  // |Sigma|^{1/4}
};

std::vector<SiteTerms> site_terms(std::span<const LocalKernel> kernels) {
  std::vector<SiteTerms> out(kernels.size());
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    const auto& s = kernels[i].Sigma;
    const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
    if (!(det > 0.0)) throw NumericalError("assembly: singular kernel matrix at site " + std::to_string(i));
    out[i].quarter_det = std::sqrt(std::sqrt(det));
  }
  return out;
}

inline double pair_value(double dx, double dy, const LocalKernel& ki, const LocalKernel& kj, double qi,
                         double qj, MaternMemo& matern) {
  const double a00 = 0.5 * (ki.Sigma(0, 0) + kj.Sigma(0, 0));
  const double a01 = 0.5 * (ki.Sigma(0, 1) + kj.Sigma(0, 1));
  const double a11 = 0.5 * (ki.Sigma(1, 1) + kj.Sigma(1, 1));
  const double det = a00 * a11 - a01 * a01;
  double q = (a11 * dx * dx - 2.0 * a01 * dx * dy + a00 * dy * dy) / det;
  if (q < 0.0) q = 0.0;
  const double pre = qi * qj / std::sqrt(det);
  const double nu = std::sqrt(ki.nu * kj.nu);
  // NaN instead of throwing inside a parallel region; reported by the caller
  if (!std::isfinite(q) || !(nu > 0.0) || !std::isfinite(nu)) return std::numeric_limits<double>::quiet_NaN();
  return ki.sigma * kj.sigma * pre * matern(nu, std::sqrt(q));
}

inline double scalar_pair(double h, const ScalarKernel& ki, const ScalarKernel& kj, MaternMemo& matern) {
  const double sum = ki.scale + kj.scale;
  const double pre = 2.0 * std::sqrt(ki.scale * kj.scale) / sum;
  const double nu = std::sqrt(ki.nu * kj.nu);
  const double arg = h / std::sqrt(0.5 * sum);
  if (!std::isfinite(arg) || !(nu > 0.0) || !std::isfinite(nu)) return std::numeric_limits<double>::quiet_NaN();
  return ki.sigma * kj.sigma * pre * matern(nu, arg);
}

[[noreturn]] void bad_entry(Eigen::Index i, Eigen::Index j, double v) {
  throw NumericalError("assembly: non-finite covariance " + std::to_string(v) + " at pair (" +
                       std::to_string(i) + ", " + std::to_string(j) + ")");
}

void check_sizes(const Eigen::MatrixX2d& loc, std::size_t k) {
  if (static_cast<std::size_t>(loc.rows()) != k) {
    throw std::invalid_argument("assembly: locations and kernels differ in length");
  }
}

}  // namespace

std::vector<ScalarKernel> scalar_kernels(std::span<const LocalKernel> kernels) {
  std::vector<ScalarKernel> out(kernels.size());
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    out[i] = {kernels[i].sigma, kernels[i].Sigma(0, 0), kernels[i].nu};
  }
  return out;
}

Eigen::MatrixXd assemble_dense(const Eigen::MatrixX2d& locations, std::span<const LocalKernel> kernels,
                               MaternScaling scaling, double nugget) {
  check_sizes(locations, kernels.size());
  const Eigen::Index n = locations.rows();
  const auto terms = site_terms(kernels);
  Eigen::MatrixXd m(n, n);
  bool failed = false;
  Eigen::Index bad_i = 0, bad_j = 0;
#pragma omp parallel
  {
    MaternMemo matern(scaling);
#pragma omp for schedule(dynamic, 8)
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& kj = kernels[static_cast<std::size_t>(j)];
      const double qj = terms[static_cast<std::size_t>(j)].quarter_det;
      for (Eigen::Index i = 0; i < j; ++i) {
        const auto& ki = kernels[static_cast<std::size_t>(i)];
        const double v = pair_value(locations(i, 0) - locations(j, 0), locations(i, 1) - locations(j, 1), ki, kj,
                                    terms[static_cast<std::size_t>(i)].quarter_det, qj, matern);
        if (!std::isfinite(v)) {
#pragma omp critical(nscov_assembly_error)
          {
            failed = true;
            bad_i = i;
            bad_j = j;
          }
        }
        m(i, j) = v;
        m(j, i) = v;
      }
      m(j, j) = kj.sigma * kj.sigma + nugget;
    }
  }
  if (failed) bad_entry(bad_i, bad_j, m(bad_i, bad_j));
  return m;
}

Eigen::MatrixXd assemble_cross(const Eigen::MatrixX2d& loc_a, std::span<const LocalKernel> k_a,
                               const Eigen::MatrixX2d& loc_b, std::span<const LocalKernel> k_b,
                               MaternScaling scaling) {
  check_sizes(loc_a, k_a.size());
  check_sizes(loc_b, k_b.size());
  const auto ta = site_terms(k_a);
  const auto tb = site_terms(k_b);
  const Eigen::Index na = loc_a.rows();
  const Eigen::Index nb = loc_b.rows();
  Eigen::MatrixXd m(na, nb);
#pragma omp parallel
  {
    MaternMemo matern(scaling);
#pragma omp for schedule(dynamic, 8)
    for (Eigen::Index j = 0; j < nb; ++j) {
      for (Eigen::Index i = 0; i < na; ++i) {
        m(i, j) = pair_value(loc_a(i, 0) - loc_b(j, 0), loc_a(i, 1) - loc_b(j, 1), k_a[static_cast<std::size_t>(i)],
                             k_b[static_cast<std::size_t>(j)], ta[static_cast<std::size_t>(i)].quarter_det,
                             tb[static_cast<std::size_t>(j)].quarter_det, matern);
      }
    }
  }
  if (!m.allFinite()) {
    for (Eigen::Index j = 0; j < nb; ++j)
      for (Eigen::Index i = 0; i < na; ++i)
        if (!std::isfinite(m(i, j))) bad_entry(i, j, m(i, j));
  }
  return m;
}

SparseSymmetric assemble_tapered(std::shared_ptr<const SparsePattern> pattern, std::span<const ScalarKernel> kernels,
                                 const TaperSpec& taper, MaternScaling scaling, double nugget) {
  if (static_cast<std::size_t>(pattern->size()) != kernels.size()) {
    throw std::invalid_argument("assembly: pattern and kernels differ in length");
  }
  SparseSymmetric out{pattern, std::vector<double>(pattern->nnz())};
  const auto& a = pattern->site_a();
  const auto& b = pattern->site_b();
  const auto& h = pattern->distance();
  const auto& cp = pattern->col_ptr();
  const int n = pattern->size();
  bool failed = false;
#pragma omp parallel
  {
    MaternMemo matern(scaling);
#pragma omp for schedule(dynamic, 32)
    for (int k = 0; k < n; ++k) {
      for (int p = cp[static_cast<std::size_t>(k)]; p < cp[static_cast<std::size_t>(k) + 1]; ++p) {
        const auto s = static_cast<std::size_t>(p);
        const auto& ki = kernels[static_cast<std::size_t>(a[s])];
        double v;
        if (a[s] == b[s]) {
          v = ki.sigma * ki.sigma + nugget;
        } else {
          v = scalar_pair(h[s], ki, kernels[static_cast<std::size_t>(b[s])], matern) * taper_correlation(h[s], taper);
        }
        if (!std::isfinite(v)) {
#pragma omp atomic write
          failed = true;
        }
        out.values[s] = v;
      }
    }
  }
  if (failed) {
    for (std::size_t s = 0; s < out.values.size(); ++s)
      if (!std::isfinite(out.values[s])) bad_entry(a[s], b[s], out.values[s]);
  }
  return out;
}

SparseCross assemble_tapered_cross(const Eigen::MatrixX2d& loc_a, std::span<const ScalarKernel> k_a,
                                   const Eigen::MatrixX2d& loc_b, std::span<const ScalarKernel> k_b,
                                   const TaperSpec& taper, MaternScaling scaling) {
  if (static_cast<std::size_t>(loc_a.rows()) != k_a.size() || static_cast<std::size_t>(loc_b.rows()) != k_b.size()) {
    throw std::invalid_argument("assembly: locations and kernels differ in length");
  }
  SparseCross out;
  out.neighbors = neighbors_within(loc_a, loc_b, taper.delta);
  const auto& nb = out.neighbors;
  out.values.resize(nb.index.size());
  const Eigen::Index na = loc_a.rows();
#pragma omp parallel
  {
    MaternMemo matern(scaling);
#pragma omp for schedule(dynamic, 32)
    for (Eigen::Index i = 0; i < na; ++i) {
      for (int p = nb.offsets[static_cast<std::size_t>(i)]; p < nb.offsets[static_cast<std::size_t>(i) + 1]; ++p) {
        const auto s = static_cast<std::size_t>(p);
        const double h = nb.distance[s];
        out.values[s] = scalar_pair(h, k_a[static_cast<std::size_t>(i)],
                                    k_b[static_cast<std::size_t>(nb.index[s])], matern) *
                        taper_correlation(h, taper);
      }
    }
  }
  for (std::size_t s = 0; s < out.values.size(); ++s) {
    if (!std::isfinite(out.values[s])) {
      const auto row = std::upper_bound(nb.offsets.begin(), nb.offsets.end(), static_cast<int>(s)) - nb.offsets.begin() - 1;
      bad_entry(row, nb.index[s], out.values[s]);
    }
  }
  return out;
}

}  // namespace nscov
