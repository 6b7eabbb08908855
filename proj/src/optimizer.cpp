#include "nscov/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace nscov {
namespace {

constexpr double kArmijo = 1e-4;

std::vector<bool> fixed_mask(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  std::vector<bool> m(static_cast<std::size_t>(lower.size()));
  for (Eigen::Index i = 0; i < lower.size(); ++i) m[static_cast<std::size_t>(i)] = lower(i) == upper(i);
  return m;
}

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

// Gradient of the minimized function g = -f with blocked components zeroed.
Eigen::VectorXd projected(const Eigen::VectorXd& g, const Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                          const Eigen::VectorXd& upper) {
  Eigen::VectorXd pg = g;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (lower(i) == upper(i)) pg(i) = 0.0;
    else if (x(i) <= lower(i) && g(i) > 0.0) pg(i) = 0.0;
    else if (x(i) >= upper(i) && g(i) < 0.0) pg(i) = 0.0;
  }
  return pg;
}

struct Pair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

Eigen::VectorXd two_loop(const std::deque<Pair>& mem, const Eigen::VectorXd& q0) {
  Eigen::VectorXd q = q0;
  std::vector<double> alpha(mem.size());
  for (std::size_t k = mem.size(); k-- > 0;) {
    alpha[k] = mem[k].rho * mem[k].s.dot(q);
    q -= alpha[k] * mem[k].y;
  }
  if (!mem.empty()) {
    const auto& last = mem.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t k = 0; k < mem.size(); ++k) {
    const double beta = mem[k].rho * mem[k].y.dot(q);
    q += (alpha[k] - beta) * mem[k].s;
  }
  return q;
}

}  // namespace

void OptimProblem::validate() const {
  const Eigen::Index n = initial.size();
  if (!objective) throw std::invalid_argument("optimizer: no objective");
  if (lower.size() != n || upper.size() != n) throw std::invalid_argument("optimizer: bound sizes differ");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(lower(i) <= initial(i) && initial(i) <= upper(i))) {
      throw std::invalid_argument("optimizer: initial point outside bounds at coordinate " + std::to_string(i));
    }
  }
  if (!(gradient_tolerance > 0.0) || !(objective_tolerance > 0.0)) {
    throw std::invalid_argument("optimizer: tolerances must be positive");
  }
  if (max_iterations < 0 || history < 1 || max_backtracks < 1) {
    throw std::invalid_argument("optimizer: invalid iteration settings");
  }
}

double fd_step(double x) { return std::max(1e-6, 1e-7 * std::abs(x)); }

GradientResult fd_gradient(const Objective& f, const Eigen::VectorXd& x, double fx, const Eigen::VectorXd& lower,
                           const Eigen::VectorXd& upper) {
  const Eigen::Index n = x.size();
  GradientResult r;
  r.gradient = Eigen::VectorXd::Zero(n);
  r.one_sided.assign(static_cast<std::size_t>(n), false);
  r.failed.assign(static_cast<std::size_t>(n), false);
  int evaluations = 0;
#pragma omp parallel for schedule(dynamic, 1) reduction(+ : evaluations)
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lower(i) == upper(i)) continue;
    const double h = fd_step(x(i));
    Eigen::VectorXd xi = x;
    double fp = std::numeric_limits<double>::quiet_NaN();
    double fm = fp;
    if (x(i) + h <= upper(i)) {
      xi(i) = x(i) + h;
      fp = f(xi);
      ++evaluations;
    }
    if (x(i) - h >= lower(i)) {
      xi(i) = x(i) - h;
      fm = f(xi);
      ++evaluations;
    }
    const bool okp = std::isfinite(fp);
    const bool okm = std::isfinite(fm);
    const auto k = static_cast<std::size_t>(i);
    if (okp && okm) {
      r.gradient(i) = (fp - fm) / (2.0 * h);
    } else if (okp) {
      r.gradient(i) = (fp - fx) / h;
      r.one_sided[k] = true;
    } else if (okm) {
      r.gradient(i) = (fx - fm) / h;
      r.one_sided[k] = true;
    } else {
      r.failed[k] = true;
    }
  }
  r.evaluations = evaluations;
  return r;
}

GradientResult fd_gradient(const Objective& f, const Eigen::VectorXd& x) {
  const double inf = std::numeric_limits<double>::infinity();
  return fd_gradient(f, x, f(x), Eigen::VectorXd::Constant(x.size(), -inf), Eigen::VectorXd::Constant(x.size(), inf));
}

Eigen::MatrixXd hessian_fd(const Objective& f, const Eigen::VectorXd& x, const std::vector<bool>& fixed) {
  const Eigen::Index n = x.size();
  auto is_fixed = [&](Eigen::Index i) { return !fixed.empty() && fixed[static_cast<std::size_t>(i)]; };
  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) h(i) = 1e-4 * std::max(1.0, std::abs(x(i)));
  const double f0 = f(x);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> cells;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i <= j; ++i)
      if (!is_fixed(i) && !is_fixed(j)) cells.emplace_back(i, j);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto [i, j] = cells[c];
    Eigen::VectorXd y = x;
    double v;
    if (i == j) {
      y(i) = x(i) + h(i);
      const double fp = f(y);
      y(i) = x(i) - h(i);
      const double fm = f(y);
      v = (fp - 2.0 * f0 + fm) / (h(i) * h(i));
    } else {
      auto at = [&](double si, double sj) {
        y = x;
        y(i) += si * h(i);
        y(j) += sj * h(j);
        return f(y);
      };
      v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h(i) * h(j));
    }
    hess(i, j) = v;
    hess(j, i) = v;
  }
  return hess;
}

StandardErrors standard_errors(const Eigen::MatrixXd& hessian, const std::vector<bool>& fixed) {
  StandardErrors out;
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < hessian.rows(); ++i) {
    if (fixed.empty() || !fixed[static_cast<std::size_t>(i)]) free.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd a(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) a(r, c) = -hessian(free[static_cast<std::size_t>(r)], free[static_cast<std::size_t>(c)]);
  if (!a.allFinite()) {
    out.note = "Hessian has non-finite entries; standard errors omitted";
    return out;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    out.note = "Hessian is not negative definite; standard errors omitted";
    return out;
  }
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m, m));
  Eigen::VectorXd se = Eigen::VectorXd::Constant(hessian.rows(), std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index r = 0; r < m; ++r) se(free[static_cast<std::size_t>(r)]) = std::sqrt(inv(r, r));
  out.values = se;
  return out;
}

OptimResult maximize(const OptimProblem& problem) {
  problem.validate();
  const auto start = std::chrono::steady_clock::now();
  const Eigen::VectorXd& lo = problem.lower;
  const Eigen::VectorXd& hi = problem.upper;
  const Objective& f = problem.objective;
  const auto fixed = fixed_mask(lo, hi);

  OptimResult res;
  Eigen::VectorXd x = problem.initial;
  double fx = f(x);
  res.evaluations = 1;
  if (!std::isfinite(fx)) throw std::invalid_argument("optimizer: objective is not finite at the initial point");
  res.initial_value = fx;

  auto gradient_of_g = [&](const Eigen::VectorXd& at, double fat) {
    GradientResult gr = fd_gradient(f, at, fat, lo, hi);
    res.evaluations += gr.evaluations;
    return Eigen::VectorXd(-gr.gradient);
  };

  Eigen::VectorXd g = gradient_of_g(x, fx);
  std::deque<Pair> mem;
  res.message = "iteration limit reached";
  for (int it = 0; it < problem.max_iterations; ++it) {
    const Eigen::VectorXd pg = projected(g, x, lo, hi);
    if (pg.lpNorm<Eigen::Infinity>() < problem.gradient_tolerance) {
      res.converged = true;
      res.message = "projected gradient below tolerance";
      break;
    }
    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = 0.0;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      Eigen::VectorXd d = -two_loop(mem, pg);
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (pg(i) == 0.0) d(i) = 0.0;
      }
      if (!(d.dot(pg) < 0.0)) {
        mem.clear();
        d = -pg;
      }
      double t = 1.0;
      const double dmax = d.lpNorm<Eigen::Infinity>();
      if (mem.empty()) t = std::min(1.0, 1.0 / dmax);
      t = std::min(t, problem.max_step / dmax);
      for (int b = 0; b < problem.max_backtracks; ++b, t *= 0.5) {
        x_new = project(x + t * d, lo, hi);
        f_new = f(x_new);
        ++res.evaluations;
        if (std::isfinite(f_new) && -f_new <= -fx + kArmijo * g.dot(x_new - x)) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (mem.empty()) break;
        mem.clear();
      }
    }
    res.iterations = it + 1;
    if (!accepted) {
      res.line_search_failed = true;
      res.message = "line search failed";
      break;
    }
    const Eigen::VectorXd g_new = gradient_of_g(x_new, f_new);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-10 * y.squaredNorm() && sy > 0.0) {
      mem.push_back({s, y, 1.0 / sy});
      if (static_cast<int>(mem.size()) > problem.history) mem.pop_front();
    }
    const double change = std::abs(f_new - fx);
    x = x_new;
    g = g_new;
    const double f_old = fx;
    fx = f_new;
    if (change <= problem.objective_tolerance * std::max({std::abs(f_old), std::abs(f_new), 1.0})) {
      res.converged = true;
      res.message = "relative objective change below tolerance";
      break;
    }
  }
  res.argmax = x;
  res.value = fx;
  if (problem.compute_hessian) {
    if (res.converged) {
      res.hessian = hessian_fd(f, x, fixed);
      StandardErrors se = standard_errors(*res.hessian, fixed);
      res.standard_errors = se.values;
      res.hessian_note = se.note;
    } else {
      res.hessian_note = "fit did not converge; standard errors omitted";
    }
  }
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace nscov
