#include "nscov/predict.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nscov/assembly.hpp"
#include "nscov/errors.hpp"

namespace nscov {
namespace {

constexpr Eigen::Index kChunk = 256;

double checked_sd(double marginal, double reduction, Eigen::Index i) {
  const double v = marginal - reduction;
  if (v >= 0.0) return std::sqrt(v);
  if (v >= -1e-6 * marginal) return 0.0;
  throw NumericalError("predict: negative predictive variance " + std::to_string(v) + " at site " +
                       std::to_string(i));
}

}  // namespace

PredictiveDistribution krige(const Model& model, const ModelParameters& params, const SpatialDataset& sites,
                             const PredictOptions& opts) {
  const CovariancePath path = model.sparse() ? CovariancePath::Sparse : CovariancePath::Dense;
  return krige(model, params, factor_covariance(model, params, path, false), sites, opts);
}

PredictiveDistribution krige(const Model& model, const ModelParameters& params, const CovarianceFactor& factor,
                             const SpatialDataset& sites, const PredictOptions& opts) {
  const auto& design = model.design();
  const DesignMatrices xp = build_design_matrices(sites, design);
  const auto k_train = model.kernels(params);
  const auto k_site = local_kernels(xp, params, design);
  const Eigen::Index m = sites.size();
  const Eigen::VectorXd r = model.data().response - model.x()[Component::Mean] * params[Component::Mean];
  const Eigen::VectorXd w = factor.solve(r);
  const double nugget = params.nugget_variance();

  PredictiveDistribution out;
  out.include_nugget = opts.include_nugget;
  out.mean = xp[Component::Mean] * params[Component::Mean];
  out.sd.resize(m);

  if (!model.sparse()) {
    const DenseCholesky* chol = factor.core->dense();
    for (Eigen::Index start = 0; start < m; start += kChunk) {
      const Eigen::Index len = std::min(kChunk, m - start);
      const Eigen::MatrixXd cross =
          assemble_cross(sites.locations.middleRows(start, len),
                         std::span<const LocalKernel>(k_site).subspan(static_cast<std::size_t>(start),
                                                                     static_cast<std::size_t>(len)),
                         model.data().locations, k_train, design.scaling);
      out.mean.segment(start, len) += cross * w;
      const Eigen::MatrixXd v = chol->half_solve(cross.transpose().array().colwise() / factor.scale.array());
      for (Eigen::Index j = 0; j < len; ++j) {
        const double s2 = k_site[static_cast<std::size_t>(start + j)].sigma;
        out.sd(start + j) = checked_sd(s2 * s2, v.col(j).squaredNorm(), start + j);
      }
    }
    if (opts.full_covariance) {
      const Eigen::MatrixXd cross = assemble_cross(sites.locations, k_site, model.data().locations, k_train,
                                                   design.scaling);
      const Eigen::MatrixXd v = chol->half_solve(cross.transpose().array().colwise() / factor.scale.array());
      out.covariance = assemble_dense(sites.locations, k_site, design.scaling) - v.transpose() * v;
    }
  } else {
    const auto sk_site = scalar_kernels(k_site);
    const auto sk_train = scalar_kernels(k_train);
    const SparseCross cross = assemble_tapered_cross(sites.locations, sk_site, model.data().locations, sk_train,
                                                     design.taper, design.scaling);
    const auto& nb = cross.neighbors;
    const Eigen::Index n = model.n();
    std::vector<Eigen::VectorXd> rows(opts.full_covariance ? static_cast<std::size_t>(m) : 0);
    bool failed = false;
    std::string error;
#pragma omp parallel
    {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
#pragma omp for schedule(dynamic, 16)
      for (Eigen::Index i = 0; i < m; ++i) {
        const int first = nb.offsets[static_cast<std::size_t>(i)];
        const int last = nb.offsets[static_cast<std::size_t>(i) + 1];
        double mean_add = 0.0;
        for (int p = first; p < last; ++p) {
          const auto s = static_cast<std::size_t>(p);
          c(nb.index[s]) = cross.values[s];
          mean_add += cross.values[s] * w(nb.index[s]);
        }
        out.mean(i) += mean_add;
        const double s2 = sk_site[static_cast<std::size_t>(i)].sigma;
        try {
          out.sd(i) = checked_sd(s2 * s2, last > first ? factor.inverse_quadratic(c) : 0.0, i);
        } catch (const NumericalError& e) {
#pragma omp critical(nscov_predict_error)
          {
            failed = true;
            error = e.what();
          }
        }
        if (opts.full_covariance) rows[static_cast<std::size_t>(i)] = factor.solve(c);
        for (int p = first; p < last; ++p) c(nb.index[static_cast<std::size_t>(p)]) = 0.0;
      }
    }
    if (failed) throw NumericalError(error);
    if (opts.full_covariance) {
      Eigen::MatrixXd cov(m, m);
      for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
          double s = 0.0;
          for (int p = nb.offsets[static_cast<std::size_t>(i)]; p < nb.offsets[static_cast<std::size_t>(i) + 1]; ++p) {
            s += cross.values[static_cast<std::size_t>(p)] * rows[static_cast<std::size_t>(j)](nb.index[static_cast<std::size_t>(p)]);
          }
          const double h = (sites.locations.row(i) - sites.locations.row(j)).norm();
          const double prior = i == j ? sk_site[static_cast<std::size_t>(i)].sigma * sk_site[static_cast<std::size_t>(i)].sigma
                                      : (h < design.taper.delta
                                             ? cov_sparse(h, sk_site[static_cast<std::size_t>(i)],
                                                          sk_site[static_cast<std::size_t>(j)], design.scaling) *
                                                   taper_correlation(h, design.taper)
                                             : 0.0);
          cov(i, j) = prior - s;
        }
      }
      out.covariance = 0.5 * (cov + cov.transpose());
    }
  }
  if (opts.include_nugget && nugget > 0.0) {
    out.sd = (out.sd.array().square() + nugget).sqrt();
    if (out.covariance) out.covariance->diagonal().array() += nugget;
  }
  if (out.covariance) {
    // Keep the documented invariant: diagonal equals sd^2.
    out.covariance->diagonal() = out.sd.array().square();
  }
  return out;
}

Simulation simulate(const Eigen::MatrixX2d& locations, const DesignMatrices& x, const ModelParameters& params,
                    const ModelDesign& design, std::uint64_t seed) {
  const Eigen::Index n = locations.rows();
  std::vector<LocalKernel> k;
  try {
    k = local_kernels(x, params, design);
  } catch (const std::invalid_argument& e) {
    throw NumericalError(std::string("simulate: ") + e.what());
  }
  Eigen::VectorXd sigma(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sigma(i) = k[static_cast<std::size_t>(i)].sigma;
    k[static_cast<std::size_t>(i)].sigma = 1.0;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) u(i) = normal(rng);

  Simulation sim;
  Eigen::VectorXd field;
  if (design.taper.sparse()) {
    const auto pattern = SparsePattern::build(locations, design.taper.delta);
    const auto f = factor_sparse(assemble_tapered(pattern, scalar_kernels(k), design.taper, design.scaling), true);
    field = f.factor.multiply_lower(u);
    sim.jitter_used = f.jitter_used;
  } else {
    const auto f = factor_dense(assemble_dense(locations, k, design.scaling), true);
    field = f.factor.multiply_lower(u);
    sim.jitter_used = f.jitter_used;
  }
  sim.z = x[Component::Mean] * params[Component::Mean] + sigma.cwiseProduct(field);
  if (params.log_nugget) {
    const double tau = std::sqrt(params.nugget_variance());
    for (Eigen::Index i = 0; i < n; ++i) sim.z(i) += tau * normal(rng);
  }
  return sim;
}

}  // namespace nscov
