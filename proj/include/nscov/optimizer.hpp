#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nscov {

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Bound-constrained maximization problem. Coordinates with lower == upper
/// are held fixed.
struct OptimProblem {
  Objective objective;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd initial;
  int max_iterations = 200;
  double gradient_tolerance = 1e-5;   // projected gradient, infinity norm
  double objective_tolerance = 1e-10; // relative change between iterations
  int history = 10;
  int max_backtracks = 30;
  double max_step = 5.0;              // largest coordinate move per iteration
  bool compute_hessian = false;

  /// Throws std::invalid_argument on inconsistent sizes, bounds or tolerances.
  void validate() const;
};

struct GradientResult {
  Eigen::VectorXd gradient;
  std::vector<bool> one_sided;  // fallback at a bound
  std::vector<bool> failed;     // no finite neighbor on either side
  int evaluations = 0;
};

struct OptimResult {
  Eigen::VectorXd argmax;
  double value = 0.0;
  double initial_value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool line_search_failed = false;
  std::string message;
  std::optional<Eigen::MatrixXd> hessian;
  std::optional<Eigen::VectorXd> standard_errors;  // NaN for fixed coordinates
  std::string hessian_note;
  double wall_seconds = 0.0;
};

/// Step used for coordinate i: max(1e-6, 1e-7 |x_i|).
[[nodiscard]] double fd_step(double x);

/// Central differences, one-sided where x +- h leaves the bounds or the
/// objective is not finite there. Coordinates are evaluated in parallel.
[[nodiscard]] GradientResult fd_gradient(const Objective& f, const Eigen::VectorXd& x, double fx,
                                         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);
[[nodiscard]] GradientResult fd_gradient(const Objective& f, const Eigen::VectorXd& x);

/// Central second differences with step 1e-4 max(1, |x_i|), symmetrized.
/// Coordinates flagged in `fixed` get zero rows and columns.
[[nodiscard]] Eigen::MatrixXd hessian_fd(const Objective& f, const Eigen::VectorXd& x,
                                         const std::vector<bool>& fixed = {});

/// sqrt(diag((-H)^{-1})) over the free coordinates; empty with a note when
/// -H is not positive definite.
struct StandardErrors {
  std::optional<Eigen::VectorXd> values;
  std::string note;
};
[[nodiscard]] StandardErrors standard_errors(const Eigen::MatrixXd& hessian, const std::vector<bool>& fixed = {});

/// Projected limited-memory BFGS with backtracking (Armijo) line search.
/// Throws std::invalid_argument when the objective is not finite at the start.
[[nodiscard]] OptimResult maximize(const OptimProblem& problem);

}  // namespace nscov
