#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nscov/likelihood.hpp"
#include "nscov/optimizer.hpp"

namespace nscov {

struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Starting point (stored coordinates): GLS mean under an isotropic
/// exponential correlation with range equal to the 20th percentile of the
/// inter-site distances, log of the GLS residual variance for the variance
/// intercept, log of that range for the scale intercept, zero slopes, zero
/// smoothness intercept, and 5% of the variance as nugget when enabled.
[[nodiscard]] Eigen::VectorXd initial_parameters(const Model& model);

/// Mean coefficients within 20 response standard deviations of the start;
/// covariance intercepts within 20 of the start; covariance slopes in
/// [-20, 20]; log nugget at least -30. Smoothness coefficients are fixed when
/// nu_min == nu_max.
[[nodiscard]] Bounds default_bounds(const Model& model, const Eigen::VectorXd& start);

/// 20th percentile of pairwise distances (deterministic subsample above 2000 sites).
[[nodiscard]] double distance_quantile(const Eigen::MatrixX2d& locations, double q);

struct FitOptions {
  ObjectiveKind kind = ObjectiveKind::Penalized;
  int max_iterations = 200;
  double gradient_tolerance = 1e-4;
  double objective_tolerance = 1e-10;
  bool standard_errors = false;
  bool allow_jitter = true;
  std::optional<Eigen::VectorXd> start;  // stored coordinates
  std::vector<bool> pinned;              // held at zero
};

struct FitResult {
  Eigen::VectorXd stored;
  ModelParameters params;
  OptimResult optim;
  double loglik = 0.0;
  double penalized = 0.0;   // loglik minus the microergodic penalty
  double objective = 0.0;   // the maximized objective
  bool jitter_used = false;
  std::string diagnostic;
  std::vector<bool> active;
  std::optional<Eigen::VectorXd> standard_errors;  // natural coordinates
};

/// Maximizes the chosen objective. Throws NumericalError when the objective
/// is not finite at the starting point.
[[nodiscard]] FitResult fit(const LikelihoodEvaluator& eval, const PenaltyConfig& cfg, const FitOptions& opts = {});

}  // namespace nscov
