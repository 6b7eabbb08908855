#include "nscov/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "nscov/errors.hpp"
#include "nscov/scoring.hpp"

namespace nscov {

std::size_t ActiveSet::count() const { return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true)); }

bool ActiveSet::all() const { return count() == mask.size(); }

std::vector<bool> ActiveSet::pinned() const {
  std::vector<bool> p(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) p[i] = !mask[i];
  return p;
}

ActiveSet full_active_set(const ParameterLayout& layout) {
  ActiveSet a;
  a.mask.assign(layout.size(), true);
  a.always.resize(layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i) a.always[i] = !penalized_slope(layout.entry(i));
  return a;
}

ActiveSet threshold(const ParameterLayout& layout, const Eigen::VectorXd& stored, double epsilon) {
  ActiveSet a = full_active_set(layout);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    a.mask[i] = a.always[i] || std::abs(stored(static_cast<Eigen::Index>(i))) > epsilon;
  }
  return a;
}

StageOne stage1_fit(const LikelihoodEvaluator& eval, const PenaltyConfig& cfg, FitOptions opts) {
  opts.kind = ObjectiveKind::Stage1;
  opts.pinned.clear();
  StageOne s{fit(eval, cfg, opts), {}};
  s.active = threshold(eval.model().layout(), s.fit.stored, cfg.epsilon);
  return s;
}

FitResult stage2_refit(const LikelihoodEvaluator& eval, const ActiveSet& active, const PenaltyConfig& cfg,
                       FitOptions opts) {
  opts.kind = ObjectiveKind::Penalized;
  opts.pinned = active.pinned();
  if (opts.start) {
    for (std::size_t i = 0; i < active.size(); ++i)
      if (!active.mask[i]) (*opts.start)(static_cast<Eigen::Index>(i)) = 0.0;
  }
  return fit(eval, cfg, opts);
}

TwoStageResult two_stage_fit(const LikelihoodEvaluator& eval, const PenaltyConfig& cfg, const FitOptions& opts) {
  const auto& layout = eval.model().layout();
  if (!cfg.lasso()) {
    FitOptions o = opts;
    o.kind = ObjectiveKind::Penalized;
    o.pinned.clear();
    return {std::nullopt, fit(eval, cfg, o), full_active_set(layout), true};
  }
  StageOne s1 = stage1_fit(eval, cfg, opts);
  FitOptions o = opts;
  o.start = s1.fit.stored;
  FitResult s2 = stage2_refit(eval, s1.active, cfg, o);
  return {std::move(s1.fit), std::move(s2), std::move(s1.active), false};
}

void TuneGrid::validate() const {
  if (lambda_r.empty() || lambda_mu.empty() || lambda_sigma.empty()) {
    throw ConfigError("tune: every grid axis needs at least one value");
  }
  for (const auto* axis : {&lambda_r, &lambda_mu, &lambda_sigma})
    for (double v : *axis)
      if (!(v >= 0.0)) throw ConfigError("tune: grid values must be non-negative");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw ConfigError("tune: holdout fraction must lie in (0, 1)");
  }
}

CellEvaluator default_cell_evaluator(std::shared_ptr<const Model> train, const SpatialDataset& holdout,
                                     const FitOptions& opts) {
  if (!holdout.has_response()) throw DataError("tune: the tuning holdout has no response");
  auto eval = std::make_shared<LikelihoodEvaluator>(train);
  return [eval, holdout, opts](const PenaltyConfig& cfg, std::size_t& active_count) {
    const TwoStageResult r = two_stage_fit(*eval, cfg, opts);
    active_count = r.active.count();
    const auto pred = krige(eval->model(), r.final.params, holdout, PredictOptions{true, false});
    double sum = 0.0;
    for (Eigen::Index i = 0; i < holdout.size(); ++i) {
      sum += crps_gaussian(holdout.response(i), pred.mean(i), std::max(pred.sd(i), 1e-300));
    }
    return sum / static_cast<double>(holdout.size());
  };
}

TuneResult tune(const PenaltyConfig& base, const TuneGrid& grid, const CellEvaluator& evaluate) {
  grid.validate();
  TuneResult res;
  for (double lr : grid.lambda_r)
    for (double lm : grid.lambda_mu)
      for (double ls : grid.lambda_sigma) res.cells.push_back({lr, lm, ls, false, 0.0, 0, {}});

  for (auto& cell : res.cells) {
    PenaltyConfig cfg = base;
    cfg.lambda_r = cell.lambda_r;
    cfg.lambda_mu = cell.lambda_mu;
    cfg.lambda_sigma = cell.lambda_sigma;
    try {
      cell.crps = evaluate(cfg, cell.active_count);
      cell.ok = std::isfinite(cell.crps);
      if (!cell.ok) cell.error = "non-finite CRPS";
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
    }
  }
  auto better = [](const TuneCell& a, const TuneCell& b) {
    const double tol = 1e-12 * std::max(std::abs(a.crps), std::abs(b.crps));
    if (std::abs(a.crps - b.crps) > tol) return a.crps < b.crps;
    if (a.lambda_mu != b.lambda_mu) return a.lambda_mu > b.lambda_mu;
    if (a.lambda_sigma != b.lambda_sigma) return a.lambda_sigma > b.lambda_sigma;
    return a.lambda_r > b.lambda_r;
  };
  bool found = false;
  for (std::size_t i = 0; i < res.cells.size(); ++i) {
    if (!res.cells[i].ok) continue;
    if (!found || better(res.cells[i], res.cells[res.chosen])) res.chosen = i;
    found = true;
  }
  if (!found) throw NumericalError("tune: every grid cell failed");
  return res;
}

std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_rows(Eigen::Index n, double holdout_fraction,
                                                                            std::uint64_t seed) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto m = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(n)));
  std::vector<Eigen::Index> hold(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m));
  std::vector<Eigen::Index> train(idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end());
  std::sort(hold.begin(), hold.end());
  std::sort(train.begin(), train.end());
  return {train, hold};
}

}  // namespace nscov
