#include "nscov/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nscov/assembly.hpp"
#include "nscov/errors.hpp"

namespace nscov {
namespace {

struct GlsResult {
  Eigen::VectorXd beta;
  double variance = 1.0;
};

GlsResult gls_exponential(const Model& model, double range) {
  const Eigen::Index n = model.n();
  const auto& xm = model.x()[Component::Mean];
  const Eigen::VectorXd& z = model.data().response;
  std::vector<LocalKernel> k(static_cast<std::size_t>(n),
                             LocalKernel{1.0, range * range * Eigen::Matrix2d::Identity(), 0.5});
  const auto& d = model.design();
  Eigen::MatrixXd rhs(n, xm.cols() + 1);
  rhs << xm, z;
  Eigen::MatrixXd sol(n, rhs.cols());
  if (model.sparse()) {
    const auto a = assemble_tapered(model.pattern(), scalar_kernels(k), d.taper, d.scaling, 0.0);
    const auto f = factor_sparse(a, true);
    for (Eigen::Index c = 0; c < rhs.cols(); ++c) sol.col(c) = f.factor.solve(rhs.col(c));
  } else {
    const auto f = factor_dense(assemble_dense(model.data().locations, k, d.scaling, 0.0), true);
    sol = f.factor.solve(rhs);
  }
  GlsResult g;
  if (xm.cols() > 0) {
    const Eigen::MatrixXd xtx = xm.transpose() * sol.leftCols(xm.cols());
    const Eigen::VectorXd xtz = xm.transpose() * sol.col(xm.cols());
    g.beta = xtx.ldlt().solve(xtz);
  } else {
    g.beta.resize(0);
  }
  const Eigen::VectorXd r = z - xm * g.beta;
  const Eigen::VectorXd rs = sol.col(xm.cols()) - sol.leftCols(xm.cols()) * g.beta;
  g.variance = std::max(r.dot(rs) / static_cast<double>(n), 1e-12);
  return g;
}

double response_sd(const Model& model) {
  const Eigen::VectorXd& z = model.data().response;
  const double m = z.mean();
  const double sd = std::sqrt((z.array() - m).square().sum() / static_cast<double>(z.size() - 1));
  return std::max(sd, 1e-8 * std::max(1.0, std::abs(m)));
}

}  // namespace

double distance_quantile(const Eigen::MatrixX2d& locations, double q) {
  const Eigen::Index n = locations.rows();
  const Eigen::Index step = std::max<Eigen::Index>(1, (n + 1999) / 2000);
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < n; i += step) idx.push_back(i);
  std::vector<double> d;
  d.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b) d.push_back((locations.row(idx[a]) - locations.row(idx[b])).norm());
  if (d.empty()) return 1.0;
  const auto k = static_cast<std::size_t>(q * static_cast<double>(d.size() - 1));
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  return d[k] > 0.0 ? d[k] : 1.0;
}

Eigen::VectorXd initial_parameters(const Model& model) {
  const double range = distance_quantile(model.data().locations, 0.2);
  const GlsResult g = gls_exponential(model, range);
  const auto& layout = model.layout();
  ModelParameters p;
  for (Component c : kRegressionComponentList) p[c] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.count(c)));
  p[Component::Mean] = g.beta;
  if (layout.find(Component::StdDev, kInterceptName)) p[Component::StdDev](0) = std::log(g.variance);
  if (layout.find(Component::Scale, kInterceptName)) p[Component::Scale](0) = std::log(range);
  if (layout.count(Component::Nugget) == 1) p.log_nugget = std::log(0.05 * g.variance);
  return layout.encode(p);
}

Bounds default_bounds(const Model& model, const Eigen::VectorXd& start) {
  const auto& layout = model.layout();
  const auto n = static_cast<Eigen::Index>(layout.size());
  Bounds b{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  const double sd = response_sd(model);
  const bool fixed_nu = model.design().smoothness.nu_min == model.design().smoothness.nu_max;
  std::vector<bool> shared(layout.size(), false);
  for (const auto& [a, t] : layout.shared_pairs()) shared[a] = shared[t] = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& e = layout.entry(static_cast<std::size_t>(i));
    double lo, hi;
    if (e.component == Component::Mean) {
      const double c = e.intercept() ? start(i) : 0.0;
      lo = std::min(c - 20.0 * sd, start(i));
      hi = std::max(c + 20.0 * sd, start(i));
    } else if (e.component == Component::Nugget) {
      lo = -30.0;
      hi = std::max(start(i) + 20.0, 20.0);
    } else if (e.component == Component::Smooth && fixed_nu) {
      lo = hi = start(i);
    } else {
      const double c = e.intercept() ? start(i) : 0.0;
      const double w = shared[static_cast<std::size_t>(i)] ? 40.0 : 20.0;
      lo = std::min(c - w, start(i));
      hi = std::max(c + w, start(i));
    }
    b.lower(i) = lo;
    b.upper(i) = hi;
  }
  return b;
}

FitResult fit(const LikelihoodEvaluator& eval, const PenaltyConfig& cfg, const FitOptions& opts) {
  const Model& model = eval.model();
  const auto& layout = model.layout();
  const auto n = static_cast<Eigen::Index>(layout.size());
  Eigen::VectorXd start = opts.start ? *opts.start : initial_parameters(model);
  if (start.size() != n) throw std::invalid_argument("fit: start vector has the wrong length");
  Bounds b = default_bounds(model, start);
  std::vector<bool> active(layout.size(), true);
  if (!opts.pinned.empty()) {
    if (opts.pinned.size() != layout.size()) throw std::invalid_argument("fit: pinned mask has the wrong length");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!opts.pinned[static_cast<std::size_t>(i)]) continue;
      start(i) = b.lower(i) = b.upper(i) = 0.0;
      active[static_cast<std::size_t>(i)] = false;
    }
  }
  b.lower = b.lower.cwiseMin(start);
  b.upper = b.upper.cwiseMax(start);

  OptimProblem prob;
  prob.objective = [&](const Eigen::VectorXd& v) { return eval.objective(v, opts.kind, cfg, opts.allow_jitter); };
  prob.lower = b.lower;
  prob.upper = b.upper;
  prob.initial = start;
  prob.max_iterations = opts.max_iterations;
  prob.gradient_tolerance = opts.gradient_tolerance;
  prob.objective_tolerance = opts.objective_tolerance;
  prob.compute_hessian = opts.standard_errors;
  if (!std::isfinite(prob.objective(start))) {
    throw NumericalError("fit: objective is not finite at the starting point");
  }

  FitResult r;
  r.optim = maximize(prob);
  r.stored = r.optim.argmax;
  r.params = layout.decode(r.stored);
  r.active = active;
  Evaluation ev;
  try {
    ev = eval.evaluate(r.stored, opts.kind, cfg, false);
  } catch (const NumericalError& e) {
    ev = eval.evaluate(r.stored, opts.kind, cfg, true);
    r.diagnostic = std::string("covariance at the estimate needed diagonal jitter: ") + e.what();
  }
  r.jitter_used = ev.jitter_used;
  r.loglik = ev.loglik;
  r.objective = ev.objective;
  r.penalized = ev.loglik - microergodic_penalty(model, r.params, cfg);

  if (r.optim.hessian && r.optim.standard_errors) {
    // Decode is linear: propagate the covariance through it.
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i)
      if (b.lower(i) != b.upper(i)) free.push_back(i);
    const auto m = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd a(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) a(i, j) = -(*r.optim.hessian)(free[i], free[j]);
    const Eigen::MatrixXd cov_free = a.llt().solve(Eigen::MatrixXd::Identity(m, m));
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) cov(free[i], free[j]) = cov_free(i, j);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(n, n);
    for (const auto& [s, t] : layout.shared_pairs()) {
      const auto si = static_cast<Eigen::Index>(s), ti = static_cast<Eigen::Index>(t);
      jac(si, si) = 0.5; jac(si, ti) = 0.5;
      jac(ti, si) = 0.5; jac(ti, ti) = -0.5;
    }
    const Eigen::MatrixXd nat = jac * cov * jac.transpose();
    Eigen::VectorXd se(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      se(i) = b.lower(i) == b.upper(i) ? std::numeric_limits<double>::quiet_NaN() : std::sqrt(std::max(0.0, nat(i, i)));
    }
    r.standard_errors = se;
  }
  return r;
}

}  // namespace nscov
