#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "nscov/csv.hpp"
#include "nscov/parameters.hpp"

namespace nscov {

/// Synthetic data layout. Training sites are uniform on the unit square (or
/// unit interval); holdout sites mix uniform points, vertical stripes and
/// Gaussian clusters.
struct SimulateSettings {
  Eigen::Index n = 400;
  Eigen::Index holdout = 0;
  int covariates = 3;
  int dim = 2;
  double holdout_random_share = 0.4;
  int stripes = 2;
  int clusters = 3;
};

/// Columns x, y (2-D only), c1..cp; the first `n` rows are training sites.
[[nodiscard]] CsvTable synthetic_sites(const SimulateSettings& s, std::uint64_t seed);

/// Smooth covariate fields: sums of three random plane waves, one per column.
[[nodiscard]] Eigen::MatrixXd wave_covariates(const Eigen::MatrixX2d& locations, int count, int dim,
                                              std::uint64_t seed);

struct SyntheticSample {
  CsvTable train;    // x, y, c1..cp, z
  CsvTable holdout;  // same columns
  bool jitter_used = false;
};

/// Draws z jointly at training and holdout sites under `truth`, with
/// covariates standardized over all sites.
[[nodiscard]] SyntheticSample simulate_sample(const SimulateSettings& s, const ModelDesign& design,
                                              const ModelParameters& truth, std::uint64_t seed);

}  // namespace nscov
