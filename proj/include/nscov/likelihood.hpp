#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nscov/dataset.hpp"
#include "nscov/linalg.hpp"
#include "nscov/parameters.hpp"

namespace nscov {

/// Dataset and design with everything that does not depend on parameter
/// values: layout, design matrices and (for finite taper range) the sparse
/// pattern.
class Model {
 public:
  /// Validates the design against the data; requires a response.
  Model(SpatialDataset data, ModelDesign design);

  [[nodiscard]] const SpatialDataset& data() const noexcept { return data_; }
  [[nodiscard]] const ModelDesign& design() const noexcept { return design_; }
  [[nodiscard]] const ParameterLayout& layout() const noexcept { return layout_; }
  [[nodiscard]] const DesignMatrices& x() const noexcept { return x_; }
  [[nodiscard]] Eigen::Index n() const noexcept { return data_.size(); }
  [[nodiscard]] bool sparse() const noexcept { return pattern_ != nullptr; }
  [[nodiscard]] const std::shared_ptr<const SparsePattern>& pattern() const noexcept { return pattern_; }

  [[nodiscard]] std::vector<LocalKernel> kernels(const ModelParameters& p) const {
    return local_kernels(x_, p, design_);
  }

 private:
  SpatialDataset data_;
  ModelDesign design_;
  ParameterLayout layout_;
  DesignMatrices x_;
  std::shared_ptr<const SparsePattern> pattern_;
};

enum class CovariancePath { Dense, Sparse };

/// Factor of the correlation matrix R (nugget-free case, Sigma = D R D with
/// D = diag(sigma)) or of Sigma itself (nugget case, D = I).
class CorrelationFactor {
 public:
  CorrelationFactor(DenseCholesky f, bool jitter) : dense_(std::move(f)), jitter_(jitter) {}
  CorrelationFactor(SparseCholesky f, bool jitter) : sparse_(std::move(f)), jitter_(jitter) {}

  [[nodiscard]] double logdet() const { return dense_ ? dense_->logdet() : sparse_->logdet(); }
  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    return dense_ ? dense_->solve(b) : sparse_->solve(b);
  }
  [[nodiscard]] double inverse_quadratic(const Eigen::VectorXd& b) const;
  [[nodiscard]] bool jitter_used() const noexcept { return jitter_; }
  [[nodiscard]] const DenseCholesky* dense() const noexcept { return dense_ ? &*dense_ : nullptr; }
  [[nodiscard]] const SparseCholesky* sparse() const noexcept { return sparse_ ? &*sparse_ : nullptr; }

 private:
  std::optional<DenseCholesky> dense_;
  std::optional<SparseCholesky> sparse_;
  bool jitter_ = false;
};

/// Sigma = D C D where C is the factored matrix.
struct CovarianceFactor {
  std::shared_ptr<const CorrelationFactor> core;
  Eigen::VectorXd scale;  // D

  [[nodiscard]] double logdet() const;
  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  [[nodiscard]] double inverse_quadratic(const Eigen::VectorXd& b) const;
  [[nodiscard]] bool jitter_used() const noexcept { return core->jitter_used(); }
};

/// Assembles and factors the (correlation) matrix for these parameters.
/// Throws NumericalError (IndefiniteError) on failure.
[[nodiscard]] std::shared_ptr<const CorrelationFactor> factor_core(const Model& model, const ModelParameters& p,
                                                                   CovariancePath path, bool allow_jitter);
[[nodiscard]] CovarianceFactor factor_covariance(const Model& model, const ModelParameters& p,
                                                 CovariancePath path, bool allow_jitter);

/// Gaussian log-likelihood with a given factor.
[[nodiscard]] double loglik_from_factor(const Model& model, const ModelParameters& p, const CovarianceFactor& f);

/// Dense log-likelihood.
[[nodiscard]] double loglik(const Model& model, const ModelParameters& p);
/// Sparse path: Sigma times the taper on the model's pattern. Requires a
/// model with finite taper range.
[[nodiscard]] double loglik_tapered(const Model& model, const ModelParameters& p);

/// (log(1 + e^{kx}) + log(1 + e^{-kx})) / k, overflow-safe.
[[nodiscard]] double smooth_l1(double x, double kappa);

/// n lambda_r sqrt(nu_0) rho_0.
[[nodiscard]] double microergodic_penalty(const Model& model, const ModelParameters& p, const PenaltyConfig& cfg);
/// True for coefficients subject to the Lasso terms: every covariate slope;
/// never intercepts or the nugget.
[[nodiscard]] bool penalized_slope(const ParameterEntry& e);
/// n lambda_mu sum p(beta slopes) + n lambda_sigma sum p(covariance slopes),
/// on the stored coordinates.
[[nodiscard]] double lasso_penalty(const Model& model, const Eigen::VectorXd& stored, const PenaltyConfig& cfg);

[[nodiscard]] double penalized_loglik(const Model& model, const ModelParameters& p, const PenaltyConfig& cfg);
[[nodiscard]] double stage1_objective(const Model& model, const ModelParameters& p, const PenaltyConfig& cfg);

enum class ObjectiveKind { Loglik, Penalized, Stage1 };

struct Evaluation {
  double loglik = 0.0;
  double objective = 0.0;
  bool jitter_used = false;
};

/// Objective evaluation with a small cache of factorizations. Coordinates
/// that leave the factored matrix unchanged (mean coefficients and, without
/// nugget, the standard-deviation coefficients) reuse the cached factor.
/// Safe for concurrent use.
class LikelihoodEvaluator {
 public:
  explicit LikelihoodEvaluator(std::shared_ptr<const Model> model, std::size_t cache_entries = 4);

  [[nodiscard]] const Model& model() const noexcept { return *model_; }
  [[nodiscard]] std::shared_ptr<const Model> model_ptr() const noexcept { return model_; }
  [[nodiscard]] CovariancePath path() const noexcept {
    return model_->sparse() ? CovariancePath::Sparse : CovariancePath::Dense;
  }

  /// Throws NumericalError when the covariance cannot be factored.
  [[nodiscard]] CovarianceFactor factor(const ModelParameters& p, bool allow_jitter) const;
  [[nodiscard]] Evaluation evaluate(const Eigen::VectorXd& stored, ObjectiveKind kind, const PenaltyConfig& cfg,
                                    bool allow_jitter) const;
  /// As evaluate, but -inf on numerical failure (for the optimizer).
  [[nodiscard]] double objective(const Eigen::VectorXd& stored, ObjectiveKind kind, const PenaltyConfig& cfg,
                                 bool allow_jitter) const;

  [[nodiscard]] std::size_t factorizations() const;

 private:
  struct Entry {
    std::vector<double> key;
    std::shared_ptr<const CorrelationFactor> factor;  // null: factorization failed
    std::string error;
  };

  [[nodiscard]] std::vector<double> cache_key(const ModelParameters& p, bool allow_jitter) const;

  std::shared_ptr<const Model> model_;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  mutable std::vector<Entry> cache_;  // most recent last
  mutable std::size_t factorizations_ = 0;
};

/// Condition estimate of the covariance (with nugget) at these parameters.
[[nodiscard]] double covariance_condition(const Model& model, const ModelParameters& p);

}  // namespace nscov
