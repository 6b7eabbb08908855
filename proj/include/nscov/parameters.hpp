#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nscov/dataset.hpp"
#include "nscov/kernel.hpp"
#include "nscov/taper.hpp"

namespace nscov {

/// Model components. The first six carry covariate regressions; the nugget is
/// a single log-variance.
enum class Component : int { Mean = 0, StdDev, Scale, Aniso, Tilt, Smooth, Nugget };

inline constexpr std::size_t kRegressionComponents = 6;
inline constexpr std::array<Component, kRegressionComponents> kRegressionComponentList = {
    Component::Mean, Component::StdDev, Component::Scale,
    Component::Aniso, Component::Tilt, Component::Smooth};

[[nodiscard]] std::string_view component_name(Component c);
/// Accepts mean, std_dev, scale, aniso, tilt, smooth, nugget.
[[nodiscard]] Component parse_component(std::string_view name);

inline constexpr std::string_view kInterceptName = "(intercept)";

struct ComponentDesign {
  bool intercept = true;
  std::vector<std::string> covariates;

  [[nodiscard]] std::size_t size() const noexcept {
    return covariates.size() + (intercept ? 1U : 0U);
  }
};

/// Lasso and microergodic penalty settings.
struct PenaltyConfig {
  double lambda_r = 0.0;
  double lambda_mu = 0.0;
  double lambda_sigma = 0.0;
  double kappa = 1e6;
  double epsilon = 1e-4;

  void validate() const;
  [[nodiscard]] bool lasso() const noexcept { return lambda_mu > 0.0 || lambda_sigma > 0.0; }
};

/// Which covariates enter which component, plus the model-wide switches.
struct ModelDesign {
  /// Defaults: intercepts for mean, std_dev, scale and smooth; aniso and tilt
  /// switched off (isotropic kernels).
  ModelDesign();

  std::array<ComponentDesign, kRegressionComponents> components;
  SmoothnessBounds smoothness;
  TaperSpec taper;
  PenaltyConfig penalties;
  bool nugget = false;
  bool reparameterize = false;  ///< shared-covariate (alpha, theta_ms) rotation
  MaternScaling scaling = MaternScaling::Sqrt8Nu;
  std::uint64_t seed = 0;

  [[nodiscard]] ComponentDesign& operator[](Component c);
  [[nodiscard]] const ComponentDesign& operator[](Component c) const;

  /// Throws ConfigError for unknown covariates, invalid bounds, or an
  /// anisotropic kernel requested for a tapered or one-dimensional model.
  void validate(const std::vector<std::string>& available, int dim) const;

  /// True when aniso and tilt carry no parameters (Sigma = rho^2 I).
  [[nodiscard]] bool isotropic() const noexcept;
};

/// Decoded (natural) coefficients per component.
struct ModelParameters {
  std::array<Eigen::VectorXd, kRegressionComponents> blocks;
  std::optional<double> log_nugget;

  [[nodiscard]] Eigen::VectorXd& operator[](Component c) { return blocks[static_cast<std::size_t>(c)]; }
  [[nodiscard]] const Eigen::VectorXd& operator[](Component c) const {
    return blocks[static_cast<std::size_t>(c)];
  }
  [[nodiscard]] double nugget_variance() const { return log_nugget ? std::exp(*log_nugget) : 0.0; }
};

struct ParameterEntry {
  Component component;
  std::string covariate;  // kInterceptName for intercepts
  [[nodiscard]] bool intercept() const noexcept { return covariate == kInterceptName; }
};

/// Maps the flat stored vector onto components and covariates.
///
/// Order: mean, std_dev, scale, aniso, tilt, smooth, nugget; within a
/// component the intercept first, then covariates in design order. With the
/// reparameterization on, every covariate (intercept included) present in
/// both std_dev and scale is stored as alpha + theta_ms in the std_dev slot
/// and alpha - theta_ms in the scale slot.
class ParameterLayout {
 public:
  ParameterLayout() = default;
  explicit ParameterLayout(const ModelDesign& design);

  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] const std::vector<ParameterEntry>& entries() const noexcept { return entries_; }
  [[nodiscard]] const ParameterEntry& entry(std::size_t i) const { return entries_.at(i); }
  [[nodiscard]] std::size_t offset(Component c) const { return offsets_[static_cast<std::size_t>(c)]; }
  [[nodiscard]] std::size_t count(Component c) const { return counts_[static_cast<std::size_t>(c)]; }
  [[nodiscard]] std::optional<std::size_t> find(Component c, std::string_view covariate) const;
  [[nodiscard]] std::string label(std::size_t i) const;
  [[nodiscard]] bool reparameterized() const noexcept { return !shared_.empty(); }
  /// (std_dev slot, scale slot) pairs stored in rotated form.
  [[nodiscard]] const std::vector<std::pair<std::size_t, std::size_t>>& shared_pairs() const noexcept {
    return shared_;
  }

  [[nodiscard]] ModelParameters decode(const Eigen::VectorXd& stored) const;
  [[nodiscard]] Eigen::VectorXd encode(const ModelParameters& params) const;

 private:
  std::vector<ParameterEntry> entries_;
  std::array<std::size_t, 7> offsets_{};
  std::array<std::size_t, 7> counts_{};
  std::vector<std::pair<std::size_t, std::size_t>> shared_;
};

/// Per-component design matrices: column of ones for the intercept followed by
/// the standardized covariates in design order.
struct DesignMatrices {
  std::array<Eigen::MatrixXd, kRegressionComponents> x;

  [[nodiscard]] const Eigen::MatrixXd& operator[](Component c) const {
    return x[static_cast<std::size_t>(c)];
  }
};

/// Throws DataError when a referenced covariate column is missing.
[[nodiscard]] DesignMatrices build_design_matrices(const SpatialDataset& data,
                                                   const ModelDesign& design);

/// sigma, Sigma and nu at every row of the design matrices.
[[nodiscard]] std::vector<LocalKernel> local_kernels(const DesignMatrices& x,
                                                     const ModelParameters& params,
                                                     const ModelDesign& design);

/// Baseline scale rho_0 = exp(theta_ms intercept) and smoothness nu_0 at x = 0.
struct Baseline {
  double rho0 = 1.0;
  double nu0 = 1.0;
};
[[nodiscard]] Baseline baseline(const ModelParameters& params, const ModelDesign& design,
                                const ParameterLayout& layout);

}  // namespace nscov
