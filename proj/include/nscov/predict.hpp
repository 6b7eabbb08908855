#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "nscov/likelihood.hpp"

namespace nscov {

struct PredictOptions {
  bool include_nugget = false;   // add the nugget variance (data-scale intervals)
  bool full_covariance = false;  // also return the joint predictive covariance
};

struct PredictiveDistribution {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  std::optional<Eigen::MatrixXd> covariance;
  bool include_nugget = false;
};

/// Conditional Gaussian prediction at `sites` (covariates standardized with
/// the training record). The sparse model tapers both the training and the
/// cross covariance.
[[nodiscard]] PredictiveDistribution krige(const Model& model, const ModelParameters& params,
                                           const SpatialDataset& sites, const PredictOptions& opts = {});

/// Same, reusing an existing factor of the training covariance.
[[nodiscard]] PredictiveDistribution krige(const Model& model, const ModelParameters& params,
                                           const CovarianceFactor& factor, const SpatialDataset& sites,
                                           const PredictOptions& opts = {});

struct Simulation {
  Eigen::VectorXd z;
  bool jitter_used = false;
};

/// z = X beta + L u (+ nugget noise), u standard normal from mt19937_64(seed).
/// A finite taper range in the design simulates the tapered covariance.
[[nodiscard]] Simulation simulate(const Eigen::MatrixX2d& locations, const DesignMatrices& x,
                                  const ModelParameters& params, const ModelDesign& design, std::uint64_t seed);

}  // namespace nscov
