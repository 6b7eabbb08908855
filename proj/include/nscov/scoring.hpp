#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nscov {

/// sigma [u (2 Phi(u) - 1) + 2 phi(u) - 1/sqrt(pi)], u = (z - mu) / sigma.
/// Lower is better. Throws std::invalid_argument for sigma <= 0.
[[nodiscard]] double crps_gaussian(double z, double mu, double sigma);

/// Negative log density: log sqrt(2 pi) + ((z - mu) / (sqrt 2 sigma))^2 + log sigma.
[[nodiscard]] double logscore_gaussian(double z, double mu, double sigma);

/// Kolmogorov-Smirnov distance of the sample to the standard normal.
[[nodiscard]] double ks_statistic(const Eigen::VectorXd& residuals);

/// Fraction of z inside mu +- Phi^{-1}((1 + level) / 2) sd.
[[nodiscard]] double coverage(const Eigen::VectorXd& z, const Eigen::VectorXd& mu, const Eigen::VectorXd& sd,
                              double level = 0.95);

[[nodiscard]] double normal_cdf(double x);
[[nodiscard]] double normal_quantile(double p);

/// Lloyd's algorithm with k-means++ seeding on the coordinates; at most 100
/// iterations. Labels are 0..k-1. Throws std::invalid_argument when k > n.
[[nodiscard]] std::vector<int> cluster_holdout(const Eigen::MatrixX2d& locations, int k, std::uint64_t seed);

struct ScoreSet {
  double rmspe = 0.0;
  double crps = 0.0;
  double crps_q95 = 0.0;
  double logscore = 0.0;
  double ks = 0.0;
  double cpi = 0.0;
};

struct ClusterScore {
  int cluster = 0;
  std::size_t size = 0;
  ScoreSet scores;
};

struct ScoreReport {
  ScoreSet aggregate;                    // mean over clusters
  std::optional<ScoreSet> standard_error;  // sd of per-cluster values; absent for one cluster
  ScoreSet pooled;                       // all points together
  std::vector<ClusterScore> clusters;
  std::vector<std::string> notes;
  int k = 0;
  std::uint64_t seed = 0;
};

/// Per-point scores for a single set.
[[nodiscard]] ScoreSet score_set(const Eigen::VectorXd& z, const Eigen::VectorXd& mu, const Eigen::VectorXd& sd);

/// Scores per cluster, their mean and between-cluster standard error.
[[nodiscard]] ScoreReport score_report(const Eigen::VectorXd& z, const Eigen::VectorXd& mu, const Eigen::VectorXd& sd,
                                       const std::vector<int>& clusters, int k = 0, std::uint64_t seed = 0);

/// Plain-text table with one row per metric: mean (se).
[[nodiscard]] std::string format_report(const ScoreReport& report, const std::string& model_name);

}  // namespace nscov
