#include "nscov/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nscov/assembly.hpp"
#include "nscov/errors.hpp"

namespace nscov {
namespace {

double softplus(double y) { return std::max(y, 0.0) + std::log1p(std::exp(-std::abs(y))); }

// Kernels of the factored matrix: unit sigma without nugget (correlation).
std::vector<LocalKernel> core_kernels(const Model& model, const ModelParameters& p) {
  std::vector<LocalKernel> k;
  try {
    k = model.kernels(p);
  } catch (const std::invalid_argument& e) {
    throw NumericalError(std::string("kernel evaluation failed: ") + e.what());
  }
  if (!p.log_nugget) {
    for (auto& ki : k) ki.sigma = 1.0;
  }
  return k;
}

Eigen::VectorXd scale_vector(const Model& model, const ModelParameters& p) {
  const Eigen::Index n = model.n();
  if (p.log_nugget) return Eigen::VectorXd::Ones(n);
  const auto& x = model.x()[Component::StdDev];
  Eigen::VectorXd eta = x.cols() > 0 ? Eigen::VectorXd(x * p[Component::StdDev]) : Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i) s(i) = sigma_from_linear(eta(i));
  if (!s.allFinite() || (s.array() <= 0.0).any()) throw NumericalError("standard deviation overflow");
  return s;
}

}  // namespace

Model::Model(SpatialDataset data, ModelDesign design) : data_(std::move(data)), design_(std::move(design)) {
  design_.validate(data_.covariate_names, data_.dim);
  if (!data_.has_response()) throw DataError("model: the dataset has no response");
  if (data_.size() < 2) throw DataError("model: need at least two observations");
  layout_ = ParameterLayout(design_);
  x_ = build_design_matrices(data_, design_);
  if (design_.taper.sparse()) pattern_ = SparsePattern::build(data_.locations, design_.taper.delta);
}

double CorrelationFactor::inverse_quadratic(const Eigen::VectorXd& b) const {
  if (dense_) return dense_->half_solve(b).squaredNorm();
  return sparse_->inverse_quadratic(b);
}

double CovarianceFactor::logdet() const { return core->logdet() + 2.0 * scale.array().log().sum(); }

Eigen::VectorXd CovarianceFactor::solve(const Eigen::VectorXd& b) const {
  const Eigen::VectorXd w = b.cwiseQuotient(scale);
  return core->solve(w).cwiseQuotient(scale);
}

double CovarianceFactor::inverse_quadratic(const Eigen::VectorXd& b) const {
  return core->inverse_quadratic(b.cwiseQuotient(scale));
}

std::shared_ptr<const CorrelationFactor> factor_core(const Model& model, const ModelParameters& p,
                                                     CovariancePath path, bool allow_jitter) {
  const auto k = core_kernels(model, p);
  const auto& d = model.design();
  const double nugget = p.nugget_variance();
  if (path == CovariancePath::Dense) {
    auto r = factor_dense(assemble_dense(model.data().locations, k, d.scaling, nugget), allow_jitter);
    return std::make_shared<CorrelationFactor>(std::move(r.factor), r.jitter_used);
  }
  if (!model.pattern()) throw std::logic_error("sparse path requested for a model without taper range");
  const auto sk = scalar_kernels(k);
  auto r = factor_sparse(assemble_tapered(model.pattern(), sk, d.taper, d.scaling, nugget), allow_jitter);
  return std::make_shared<CorrelationFactor>(std::move(r.factor), r.jitter_used);
}

CovarianceFactor factor_covariance(const Model& model, const ModelParameters& p, CovariancePath path,
                                   bool allow_jitter) {
  return {factor_core(model, p, path, allow_jitter), scale_vector(model, p)};
}

double loglik_from_factor(const Model& model, const ModelParameters& p, const CovarianceFactor& f) {
  const Eigen::VectorXd r = model.data().response - model.x()[Component::Mean] * p[Component::Mean];
  const double n = static_cast<double>(model.n());
  const double value = -0.5 * (n * std::log(2.0 * std::numbers::pi) + f.logdet() + f.inverse_quadratic(r));
  if (!std::isfinite(value)) throw NumericalError("log-likelihood is not finite");
  return value;
}

double loglik(const Model& model, const ModelParameters& p) {
  return loglik_from_factor(model, p, factor_covariance(model, p, CovariancePath::Dense, false));
}

double loglik_tapered(const Model& model, const ModelParameters& p) {
  return loglik_from_factor(model, p, factor_covariance(model, p, CovariancePath::Sparse, false));
}

double smooth_l1(double x, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("smooth_l1: kappa must be positive");
  return (softplus(kappa * x) + softplus(-kappa * x)) / kappa;
}

double microergodic_penalty(const Model& model, const ModelParameters& p, const PenaltyConfig& cfg) {
  if (cfg.lambda_r == 0.0) return 0.0;
  const Baseline b = baseline(p, model.design(), model.layout());
  return static_cast<double>(model.n()) * cfg.lambda_r * std::sqrt(b.nu0) * b.rho0;
}

bool penalized_slope(const ParameterEntry& e) { return !e.intercept() && e.component != Component::Nugget; }

double lasso_penalty(const Model& model, const Eigen::VectorXd& stored, const PenaltyConfig& cfg) {
  if (!cfg.lasso()) return 0.0;
  double mean_sum = 0.0;
  double cov_sum = 0.0;
  const auto& entries = model.layout().entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!penalized_slope(entries[i])) continue;
    const double v = smooth_l1(stored(static_cast<Eigen::Index>(i)), cfg.kappa);
    (entries[i].component == Component::Mean ? mean_sum : cov_sum) += v;
  }
  return static_cast<double>(model.n()) * (cfg.lambda_mu * mean_sum + cfg.lambda_sigma * cov_sum);
}

double penalized_loglik(const Model& model, const ModelParameters& p, const PenaltyConfig& cfg) {
  return loglik(model, p) - microergodic_penalty(model, p, cfg);
}

double stage1_objective(const Model& model, const ModelParameters& p, const PenaltyConfig& cfg) {
  return penalized_loglik(model, p, cfg) - lasso_penalty(model, model.layout().encode(p), cfg);
}

LikelihoodEvaluator::LikelihoodEvaluator(std::shared_ptr<const Model> model, std::size_t cache_entries)
    : model_(std::move(model)), capacity_(std::max<std::size_t>(1, cache_entries)) {}

std::vector<double> LikelihoodEvaluator::cache_key(const ModelParameters& p, bool allow_jitter) const {
  std::vector<double> key;
  auto add = [&](Component c) { key.insert(key.end(), p[c].data(), p[c].data() + p[c].size()); };
  if (p.log_nugget) {
    add(Component::StdDev);
    key.push_back(*p.log_nugget);
  }
  add(Component::Scale);
  add(Component::Aniso);
  add(Component::Tilt);
  add(Component::Smooth);
  key.push_back(allow_jitter ? 1.0 : 0.0);
  return key;
}

CovarianceFactor LikelihoodEvaluator::factor(const ModelParameters& p, bool allow_jitter) const {
  const auto key = cache_key(p, allow_jitter);
  const Eigen::VectorXd scale = scale_vector(*model_, p);
  {
    std::lock_guard lock(mutex_);
    for (auto it = cache_.begin(); it != cache_.end(); ++it) {
      if (it->key != key) continue;
      Entry e = *it;
      cache_.erase(it);
      cache_.push_back(e);
      if (!e.factor) throw NumericalError(e.error);
      return {e.factor, scale};
    }
  }
  Entry e{key, nullptr, {}};
  try {
    e.factor = factor_core(*model_, p, path(), allow_jitter);
  } catch (const NumericalError& err) {
    e.error = err.what();
  }
  {
    std::lock_guard lock(mutex_);
    ++factorizations_;
    cache_.push_back(e);
    if (cache_.size() > capacity_) cache_.erase(cache_.begin());
  }
  if (!e.factor) throw NumericalError(e.error);
  return {e.factor, scale};
}

Evaluation LikelihoodEvaluator::evaluate(const Eigen::VectorXd& stored, ObjectiveKind kind, const PenaltyConfig& cfg,
                                         bool allow_jitter) const {
  const ModelParameters p = model_->layout().decode(stored);
  const CovarianceFactor f = factor(p, allow_jitter);
  Evaluation ev;
  ev.loglik = loglik_from_factor(*model_, p, f);
  ev.jitter_used = f.jitter_used();
  ev.objective = ev.loglik;
  if (kind != ObjectiveKind::Loglik) ev.objective -= microergodic_penalty(*model_, p, cfg);
  if (kind == ObjectiveKind::Stage1) ev.objective -= lasso_penalty(*model_, stored, cfg);
  return ev;
}

double LikelihoodEvaluator::objective(const Eigen::VectorXd& stored, ObjectiveKind kind, const PenaltyConfig& cfg,
                                      bool allow_jitter) const {
  try {
    const double v = evaluate(stored, kind, cfg, allow_jitter).objective;
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  } catch (const NumericalError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

std::size_t LikelihoodEvaluator::factorizations() const {
  std::lock_guard lock(mutex_);
  return factorizations_;
}

double covariance_condition(const Model& model, const ModelParameters& p) {
  const auto k = model.kernels(p);
  const auto& d = model.design();
  const double nugget = p.nugget_variance();
  try {
    if (!model.sparse()) return condition_estimate(assemble_dense(model.data().locations, k, d.scaling, nugget));
    const SparseSymmetric a = assemble_tapered(model.pattern(), scalar_kernels(k), d.taper, d.scaling, nugget);
    return condition_estimate(a, SparseCholesky(a));
  } catch (const NumericalError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace nscov
