#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nscov/kernel.hpp"

namespace nscov {

enum class StudyId { Fig3, Fig6, Nested };

/// Accepts fig3_covariate_pathologies, fig6_regularization_path, nested_model_check.
[[nodiscard]] StudyId parse_study_id(std::string_view name);
[[nodiscard]] std::string study_name(StudyId id);

struct StudySpec {
  StudyId id = StudyId::Fig3;
  int replicates = 0;  // 0: study default
  std::uint64_t seed = 1;
  std::filesystem::path out;
  void validate() const;
};

// ---- one-dimensional covariate pathologies ----

/// Study constants. Sites: 400 midpoints of [0, 1] plus one pair straddling
/// each multi-jump boundary. Kernels: sigma = 1, nu = 0.5, Sigma scalar
/// base * 10^c for covariate value c.
struct Fig3Constants {
  static constexpr int grid = 400;
  static constexpr int segments = 10;     // multi-jump: level alternates every 0.1
  static constexpr double base = 1e-4;    // Sigma scalar at level 0
  static constexpr double ratio = 10.0;   // Sigma scalar ratio between levels
  static constexpr double gap = 1e-6;     // width of each straddling pair
  static constexpr double noise_sd = 0.25;
  static constexpr int default_replicates = 500;
};

struct Fig3Scenario {
  std::string name;
  Eigen::VectorXd covariate;
  Eigen::MatrixXd realizations;  // sites x replicates
};

struct Fig3Result {
  Eigen::VectorXd x;
  std::vector<Fig3Scenario> scenarios;  // one-jump, multi-jump, smooth, noisy
  std::vector<int> pair_left;           // site indices of the straddling pairs
  std::vector<int> pair_right;
  double prefactor = 0.0;               // 2 sqrt(s1 s2) / (s1 + s2)
  double cap = 0.0;                     // pooled correlation across multi-jump pairs
  double cap_se = 0.0;
  double one_jump_cap = 0.0;            // single pair at x = 0.5, one-jump scenario
  int replicates = 0;
};

[[nodiscard]] Eigen::VectorXd fig3_sites();
/// Kernels for covariate values c: Sigma scalar base * exp(slope * c).
[[nodiscard]] std::vector<LocalKernel> fig3_kernels(const Eigen::VectorXd& covariate, double slope);
[[nodiscard]] Fig3Result run_fig3(int replicates, std::uint64_t seed);

// ---- regularization path ----

/// 300 training sites on a jittered 15 x 20 grid, 50 uniform prediction
/// sites; covariates sin(2 pi x), sin(2 pi y); mean (0, 1, 1), log-variance
/// (0, 0.5, 0.5), log-scale (log 0.1, 0.5, 0.5), smoothness intercept 0
/// (nu = 1.5 in [0.5, 2.5]), no nugget.
struct Fig6Row {
  double lambda_r = 0.0;
  bool ok = false;
  std::string error;
  double condition = 0.0;
  double loglik = 0.0;
  double penalized = 0.0;
  double rho0 = 0.0;
  double nu0 = 0.0;
  Eigen::VectorXd coefficients;     // natural, layout order
  Eigen::VectorXd relative_change;  // against the lambda_r = 0 row
  double max_change_slopes = 0.0;     // covariance slopes (std_dev, scale)
  double max_change_intercepts = 0.0; // std_dev and scale intercepts
  double rmspe = 0.0;
  double crps = 0.0;
  int iterations = 0;
};

struct Fig6Result {
  std::vector<std::string> labels;
  std::vector<Fig6Row> rows;
};

[[nodiscard]] std::vector<double> fig6_default_lambdas();
[[nodiscard]] Fig6Result run_fig6(std::uint64_t seed, const std::vector<double>& lambdas = fig6_default_lambdas());

// ---- stationary nesting ----

/// Stationary anisotropic Matern sigma^2 M(sqrt(8 nu) sqrt(h' Sigma^-1 h))
/// with the Bessel function from the standard library.
[[nodiscard]] Eigen::MatrixXd stationary_matern_oracle(const Eigen::MatrixX2d& locations, double sigma,
                                                       const Eigen::Matrix2d& Sigma, double nu);

struct NestedResult {
  int draws = 0;
  Eigen::Index n = 0;
  double max_abs_diff = 0.0;
};

/// Random designs with every covariate slope zero against the oracle.
[[nodiscard]] NestedResult run_nested_check(std::uint64_t seed, int draws, Eigen::Index n);

/// Runs a study and writes its CSV and JSON outputs under spec.out.
void run_study(const StudySpec& spec);

}  // namespace nscov
