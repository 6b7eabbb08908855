#include "nscov/parameters.hpp"

#include <algorithm>
#include <cmath>

#include "nscov/errors.hpp"

namespace nscov {
namespace {

constexpr std::array<std::string_view, 7> kNames = {"mean", "std_dev", "scale", "aniso",
                                                     "tilt", "smooth", "nugget"};

std::size_t idx(Component c) { return static_cast<std::size_t>(c); }

}  // namespace

std::string_view component_name(Component c) { return kNames[idx(c)]; }

Component parse_component(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<Component>(i);
  }
  throw ConfigError("unknown model component '" + std::string(name) + "'");
}

void PenaltyConfig::validate() const {
  if (!(lambda_r >= 0.0) || !(lambda_mu >= 0.0) || !(lambda_sigma >= 0.0)) {
    throw ConfigError("penalties: lambda values must be non-negative");
  }
  if (!(kappa >= 1.0)) throw ConfigError("penalties.kappa must be at least 1");
  if (!(epsilon >= 0.0)) throw ConfigError("penalties.epsilon must be non-negative");
}

ModelDesign::ModelDesign() {
  (*this)[Component::Aniso].intercept = false;
  (*this)[Component::Tilt].intercept = false;
}

ComponentDesign& ModelDesign::operator[](Component c) {
  if (c == Component::Nugget) throw std::out_of_range("nugget has no covariate design");
  return components[idx(c)];
}

const ComponentDesign& ModelDesign::operator[](Component c) const {
  if (c == Component::Nugget) throw std::out_of_range("nugget has no covariate design");
  return components[idx(c)];
}

bool ModelDesign::isotropic() const noexcept {
  return components[idx(Component::Aniso)].size() == 0 &&
         components[idx(Component::Tilt)].size() == 0;
}

void ModelDesign::validate(const std::vector<std::string>& available, int dim) const {
  for (Component c : kRegressionComponentList) {
    const auto& comp = (*this)[c];
    for (const auto& cov : comp.covariates) {
      if (std::find(available.begin(), available.end(), cov) == available.end()) {
        throw ConfigError("design." + std::string(component_name(c)) + ": covariate '" + cov +
                          "' not found in the data");
      }
      if (std::count(comp.covariates.begin(), comp.covariates.end(), cov) > 1) {
        throw ConfigError("design." + std::string(component_name(c)) + ": covariate '" + cov +
                          "' listed twice");
      }
    }
  }
  try {
    smoothness.validate();
    taper.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  penalties.validate();
  if (!isotropic() && taper.sparse()) {
    throw ConfigError("design: the sparse (tapered) model is isotropic; aniso and tilt must be empty");
  }
  if (!isotropic() && dim == 1) {
    throw ConfigError("design: one-dimensional data supports only isotropic kernels");
  }
}

ParameterLayout::ParameterLayout(const ModelDesign& design) {
  for (Component c : kRegressionComponentList) {
    const auto& comp = design[c];
    offsets_[idx(c)] = entries_.size();
    if (comp.intercept) entries_.push_back({c, std::string(kInterceptName)});
    for (const auto& cov : comp.covariates) entries_.push_back({c, cov});
    counts_[idx(c)] = entries_.size() - offsets_[idx(c)];
  }
  offsets_[idx(Component::Nugget)] = entries_.size();
  if (design.nugget) entries_.push_back({Component::Nugget, std::string(kInterceptName)});
  counts_[idx(Component::Nugget)] = entries_.size() - offsets_[idx(Component::Nugget)];

  if (design.reparameterize) {
    for (std::size_t i = offsets_[idx(Component::StdDev)];
         i < offsets_[idx(Component::StdDev)] + counts_[idx(Component::StdDev)]; ++i) {
      if (auto j = find(Component::Scale, entries_[i].covariate)) shared_.emplace_back(i, *j);
    }
  }
}

std::optional<std::size_t> ParameterLayout::find(Component c, std::string_view covariate) const {
  for (std::size_t i = offsets_[idx(c)]; i < offsets_[idx(c)] + counts_[idx(c)]; ++i) {
    if (entries_[i].covariate == covariate) return i;
  }
  return std::nullopt;
}

std::string ParameterLayout::label(std::size_t i) const {
  const auto& e = entries_.at(i);
  return std::string(component_name(e.component)) + ":" + e.covariate;
}

ModelParameters ParameterLayout::decode(const Eigen::VectorXd& stored) const {
  if (static_cast<std::size_t>(stored.size()) != entries_.size()) {
    throw std::invalid_argument("parameter vector length does not match the layout");
  }
  Eigen::VectorXd natural = stored;
  for (const auto& [a, t] : shared_) {
    natural(static_cast<Eigen::Index>(a)) = 0.5 * (stored(static_cast<Eigen::Index>(a)) +
                                                   stored(static_cast<Eigen::Index>(t)));
    natural(static_cast<Eigen::Index>(t)) = 0.5 * (stored(static_cast<Eigen::Index>(a)) -
                                                   stored(static_cast<Eigen::Index>(t)));
  }
  ModelParameters p;
  for (Component c : kRegressionComponentList) {
    p[c] = natural.segment(static_cast<Eigen::Index>(offset(c)), static_cast<Eigen::Index>(count(c)));
  }
  if (count(Component::Nugget) == 1) {
    p.log_nugget = natural(static_cast<Eigen::Index>(offset(Component::Nugget)));
  }
  return p;
}

Eigen::VectorXd ParameterLayout::encode(const ModelParameters& params) const {
  Eigen::VectorXd stored(static_cast<Eigen::Index>(entries_.size()));
  for (Component c : kRegressionComponentList) {
    if (static_cast<std::size_t>(params[c].size()) != count(c)) {
      throw std::invalid_argument("component '" + std::string(component_name(c)) +
                                  "' has the wrong number of coefficients");
    }
    stored.segment(static_cast<Eigen::Index>(offset(c)), static_cast<Eigen::Index>(count(c))) = params[c];
  }
  if (count(Component::Nugget) == 1) {
    if (!params.log_nugget) throw std::invalid_argument("nugget enabled but not provided");
    stored(static_cast<Eigen::Index>(offset(Component::Nugget))) = *params.log_nugget;
  }
  const Eigen::VectorXd natural = stored;
  for (const auto& [a, t] : shared_) {
    stored(static_cast<Eigen::Index>(a)) = natural(static_cast<Eigen::Index>(a)) + natural(static_cast<Eigen::Index>(t));
    stored(static_cast<Eigen::Index>(t)) = natural(static_cast<Eigen::Index>(a)) - natural(static_cast<Eigen::Index>(t));
  }
  return stored;
}

DesignMatrices build_design_matrices(const SpatialDataset& data, const ModelDesign& design) {
  DesignMatrices out;
  const Eigen::Index n = data.size();
  for (Component c : kRegressionComponentList) {
    const auto& comp = design[c];
    Eigen::MatrixXd m(n, static_cast<Eigen::Index>(comp.size()));
    Eigen::Index col = 0;
    if (comp.intercept) m.col(col++).setOnes();
    for (const auto& cov : comp.covariates) {
      m.col(col++) = data.covariates.col(data.covariate_index(cov));
    }
    out.x[idx(c)] = std::move(m);
  }
  return out;
}

std::vector<LocalKernel> local_kernels(const DesignMatrices& x, const ModelParameters& params,
                                       const ModelDesign& design) {
  const Eigen::Index n = x[Component::Mean].rows();
  auto linear = [&](Component c) -> Eigen::VectorXd {
    if (params[c].size() == 0) return Eigen::VectorXd::Zero(n);
    return x[c] * params[c];
  };
  const Eigen::VectorXd eta_sd = linear(Component::StdDev);
  const Eigen::VectorXd eta_ms = linear(Component::Scale);
  const Eigen::VectorXd eta_ga = linear(Component::Aniso);
  const Eigen::VectorXd eta_tt = linear(Component::Tilt);
  const Eigen::VectorXd eta_nu = linear(Component::Smooth);
  std::vector<LocalKernel> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& k = out[static_cast<std::size_t>(i)];
    k.sigma = sigma_from_linear(eta_sd(i));
    k.Sigma = kernel_matrix(geometry_from_linear(eta_ms(i), eta_ga(i), eta_tt(i)));
    k.nu = nu_from_linear(eta_nu(i), design.smoothness);
  }
  return out;
}

Baseline baseline(const ModelParameters& params, const ModelDesign& design,
                  const ParameterLayout& layout) {
  Baseline b;
  if (layout.find(Component::Scale, kInterceptName)) b.rho0 = std::exp(params[Component::Scale](0));
  const double eta = layout.find(Component::Smooth, kInterceptName) ? params[Component::Smooth](0) : 0.0;
  b.nu0 = nu_from_linear(eta, design.smoothness);
  return b;
}

}  // namespace nscov
