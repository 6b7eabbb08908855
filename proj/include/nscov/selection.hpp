#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nscov/fit.hpp"
#include "nscov/predict.hpp"

namespace nscov {

/// Mask over the parameter layout; intercepts and the nugget are always active.
struct ActiveSet {
  std::vector<bool> mask;
  std::vector<bool> always;

  [[nodiscard]] std::size_t size() const noexcept { return mask.size(); }
  [[nodiscard]] std::size_t count() const;
  [[nodiscard]] bool all() const;
  /// Complement of the mask, for FitOptions::pinned.
  [[nodiscard]] std::vector<bool> pinned() const;
};

[[nodiscard]] ActiveSet full_active_set(const ParameterLayout& layout);
/// {i : |stored_i| > epsilon} plus the always-active coordinates.
[[nodiscard]] ActiveSet threshold(const ParameterLayout& layout, const Eigen::VectorXd& stored, double epsilon);

struct StageOne {
  FitResult fit;
  ActiveSet active;
};

/// Maximizes the Lasso-penalized objective and thresholds the estimate.
[[nodiscard]] StageOne stage1_fit(const LikelihoodEvaluator& eval, const PenaltyConfig& cfg, FitOptions opts = {});

/// Refit of the penalized likelihood (no Lasso terms) over the active
/// coordinates, the others held at zero. Starts from opts.start when given.
[[nodiscard]] FitResult stage2_refit(const LikelihoodEvaluator& eval, const ActiveSet& active,
                                     const PenaltyConfig& cfg, FitOptions opts = {});

struct TwoStageResult {
  std::optional<FitResult> stage1;
  FitResult final;
  ActiveSet active;
  bool stage2_skipped = false;  // no Lasso penalty: a single penalized fit
};

[[nodiscard]] TwoStageResult two_stage_fit(const LikelihoodEvaluator& eval, const PenaltyConfig& cfg,
                                           const FitOptions& opts = {});

struct TuneGrid {
  std::vector<double> lambda_r{0.0};
  std::vector<double> lambda_mu{0.0};
  std::vector<double> lambda_sigma{0.0};
  double holdout_fraction = 0.3;

  void validate() const;
};

struct TuneCell {
  double lambda_r = 0.0;
  double lambda_mu = 0.0;
  double lambda_sigma = 0.0;
  bool ok = false;
  double crps = 0.0;
  std::size_t active_count = 0;
  std::string error;
};

struct TuneResult {
  std::vector<TuneCell> cells;
  std::size_t chosen = 0;

  [[nodiscard]] const TuneCell& best() const { return cells.at(chosen); }
};

/// Fits one grid cell and returns the mean CRPS on the tuning holdout.
using CellEvaluator = std::function<double(const PenaltyConfig&, std::size_t& active_count)>;

/// Default cell evaluation: two-stage fit on `train`, plug-in data-scale
/// predictive distribution at `holdout`.
[[nodiscard]] CellEvaluator default_cell_evaluator(std::shared_ptr<const Model> train, const SpatialDataset& holdout,
                                                   const FitOptions& opts);

/// Evaluates every cell; failed cells are recorded and excluded. Ties in CRPS
/// go to the larger (lambda_mu, lambda_sigma), then the larger lambda_r.
/// Throws NumericalError when every cell fails.
[[nodiscard]] TuneResult tune(const PenaltyConfig& base, const TuneGrid& grid, const CellEvaluator& evaluate);

/// Random split of the rows: (train rows, holdout rows).
[[nodiscard]] std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_rows(Eigen::Index n,
                                                                                          double holdout_fraction,
                                                                                          std::uint64_t seed);

}  // namespace nscov
