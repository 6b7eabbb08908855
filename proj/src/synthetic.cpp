#include "nscov/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nscov/dataset.hpp"
#include "nscov/errors.hpp"
#include "nscov/predict.hpp"

namespace nscov {

Eigen::MatrixXd wave_covariates(const Eigen::MatrixX2d& locations, int count, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> freq(1.0, 4.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(locations.rows(), count);
  for (int k = 0; k < count; ++k) {
    for (int w = 0; w < 3; ++w) {
      const double f = freq(rng);
      const double dir = dim == 1 ? 0.0 : angle(rng);
      const double phase = angle(rng);
      const double a = 2.0 * std::numbers::pi * f * std::cos(dir);
      const double b = 2.0 * std::numbers::pi * f * std::sin(dir);
      for (Eigen::Index i = 0; i < locations.rows(); ++i) {
        out(i, k) += std::sin(a * locations(i, 0) + b * locations(i, 1) + phase);
      }
    }
  }
  return out;
}

CsvTable synthetic_sites(const SimulateSettings& s, std::uint64_t seed) {
  if (s.n < 2 || s.holdout < 0 || (s.dim != 1 && s.dim != 2)) {
    throw ConfigError("simulate: need n >= 2, holdout >= 0 and dim 1 or 2");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::Index total = s.n + s.holdout;
  Eigen::MatrixX2d loc = Eigen::MatrixX2d::Zero(total, 2);
  auto draw_uniform = [&](Eigen::Index i) {
    loc(i, 0) = unif(rng);
    if (s.dim == 2) loc(i, 1) = unif(rng);
  };
  for (Eigen::Index i = 0; i < s.n; ++i) draw_uniform(i);

  const auto n_random = static_cast<Eigen::Index>(std::round(s.holdout_random_share * static_cast<double>(s.holdout)));
  const int groups = std::max(0, s.stripes) + std::max(0, s.clusters);
  std::vector<double> stripe_lo;
  for (int k = 0; k < s.stripes; ++k) stripe_lo.push_back(0.05 + 0.85 * unif(rng));
  std::vector<Eigen::Vector2d> centers;
  for (int k = 0; k < s.clusters; ++k) {
    centers.emplace_back(0.1 + 0.8 * unif(rng), s.dim == 2 ? 0.1 + 0.8 * unif(rng) : 0.0);
  }
  std::normal_distribution<double> spread(0.0, 0.04);
  for (Eigen::Index h = 0; h < s.holdout; ++h) {
    const Eigen::Index i = s.n + h;
    if (h < n_random || groups == 0) {
      draw_uniform(i);
      continue;
    }
    const int g = static_cast<int>((h - n_random) % groups);
    if (g < s.stripes) {
      loc(i, 0) = stripe_lo[static_cast<std::size_t>(g)] + 0.05 * unif(rng);
      if (s.dim == 2) loc(i, 1) = unif(rng);
    } else {
      const auto& c = centers[static_cast<std::size_t>(g - s.stripes)];
      loc(i, 0) = std::clamp(c(0) + spread(rng), 0.0, 1.0);
      if (s.dim == 2) loc(i, 1) = std::clamp(c(1) + spread(rng), 0.0, 1.0);
    }
  }

  CsvTable t;
  t.names = {"x"};
  if (s.dim == 2) t.names.push_back("y");
  for (int k = 0; k < s.covariates; ++k) t.names.push_back("c" + std::to_string(k + 1));
  t.values.resize(total, static_cast<Eigen::Index>(t.names.size()));
  t.values.leftCols(s.dim) = loc.leftCols(s.dim);
  if (s.covariates > 0) t.values.rightCols(s.covariates) = wave_covariates(loc, s.covariates, s.dim, seed);
  return t;
}

SyntheticSample simulate_sample(const SimulateSettings& s, const ModelDesign& design, const ModelParameters& truth,
                                std::uint64_t seed) {
  const CsvTable sites = synthetic_sites(s, seed);
  DatasetSpec spec;
  spec.response.clear();
  if (s.dim == 1) spec.y.clear();
  const SpatialDataset all = make_dataset(sites, spec);
  design.validate(all.covariate_names, all.dim);
  const DesignMatrices x = build_design_matrices(all, design);
  const Simulation sim = simulate(all.locations, x, truth, design, seed + 1);

  SyntheticSample out;
  out.jitter_used = sim.jitter_used;
  auto take = [&](Eigen::Index first, Eigen::Index count) {
    CsvTable t;
    t.names = sites.names;
    t.names.push_back("z");
    t.values.resize(count, static_cast<Eigen::Index>(t.names.size()));
    t.values.leftCols(sites.values.cols()) = sites.values.middleRows(first, count);
    t.values.col(t.values.cols() - 1) = sim.z.segment(first, count);
    return t;
  };
  out.train = take(0, s.n);
  out.holdout = take(s.n, s.holdout);
  return out;
}

}  // namespace nscov
