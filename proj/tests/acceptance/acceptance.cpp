// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Criteria can be selected by number: `acceptance 3 7`.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nscov/assembly.hpp"
#include "nscov/experiments.hpp"
#include "nscov/fit.hpp"
#include "nscov/predict.hpp"
#include "nscov/scoring.hpp"
#include "nscov/selection.hpp"
#include "nscov/synthetic.hpp"

using namespace nscov;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ModelParameters from_lists(const ModelDesign& d, const std::vector<std::pair<Component, std::vector<double>>>& lists) {
  const ParameterLayout l(d);
  ModelParameters p;
  for (Component c : kRegressionComponentList) p[c] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(l.count(c)));
  for (const auto& [c, v] : lists)
    for (std::size_t i = 0; i < v.size(); ++i) p[c](static_cast<Eigen::Index>(i)) = v[i];
  if (d.nugget) p.log_nugget = std::log(0.01);
  return p;
}

// 1. random draws of the full anisotropic model are positive definite
Outcome positive_definite() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  ModelDesign d;
  for (Component c : {Component::Mean, Component::StdDev, Component::Scale, Component::Aniso, Component::Tilt,
                      Component::Smooth}) {
    d[c].intercept = true;
    d[c].covariates = {"a", "b"};
  }
  const ParameterLayout l(d);
  double worst = INFINITY;
  for (int draw = 0; draw < 200; ++draw) {
    CsvTable t;
    t.names = {"x", "y", "a", "b"};
    t.values.resize(30, 4);
    for (int i = 0; i < 30; ++i) t.values.row(i) << u(rng), u(rng), g(rng), g(rng);
    DatasetSpec spec;
    spec.response.clear();
    const auto data = make_dataset(t, spec);
    Eigen::VectorXd x(static_cast<Eigen::Index>(l.size()));
    for (std::size_t i = 0; i < l.size(); ++i) {
      const auto& e = l.entry(i);
      x(static_cast<Eigen::Index>(i)) =
          e.component == Component::Scale && e.intercept() ? std::log(0.02 + 0.3 * u(rng)) : g(rng);
    }
    const auto c = assemble_dense(data.locations, local_kernels(build_design_matrices(data, d), l.decode(x), d));
    if (!c.isApprox(c.transpose(), 0.0)) return {false, fmt("draw %d: matrix not symmetric", draw)};
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c, Eigen::EigenvaluesOnly);
    worst = std::min(worst, es.eigenvalues().minCoeff() / es.eigenvalues().maxCoeff());
  }
  return {worst >= -1e-8, fmt("200 draws, min eigenvalue / max eigenvalue = %.3g (bound -1e-8)", worst)};
}

// 2. zero slopes reduce to the stationary anisotropic Matern
Outcome stationary_nesting() {
  const auto r = run_nested_check(2, 20, 50);
  return {r.max_abs_diff <= 1e-12, fmt("%d draws at n=%ld, max |difference| = %.3g (bound 1e-12)", r.draws,
                                       static_cast<long>(r.n), r.max_abs_diff)};
}

// 3. closed-form eigenvalues and rotation against a generic solver
Outcome eigen_geometry() {
  constexpr double pi = std::numbers::pi;
  double worst_value = 0.0, worst_angle = 0.0;
  auto check = [&](const KernelGeometry& g) {
    const auto ke = kernel_eigen(g);
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(kernel_matrix(g));
    const double top = es.eigenvalues()(1);
    worst_value = std::max({worst_value, std::abs(ke.values[0] - top) / top,
                            std::abs(ke.values[1] - es.eigenvalues()(0)) / top});
    if (es.eigenvalues()(1) - es.eigenvalues()(0) > 1e-6 * top) {
      const Eigen::Vector2d v = es.eigenvectors().col(1);
      double diff = std::remainder(ke.rotation - std::atan2(v(1), v(0)), pi);
      worst_angle = std::max(worst_angle, std::abs(diff));
    }
  };
  for (int i = 0; i < 20; ++i) {
    const double r = std::exp(std::log(0.2) + (std::log(5.0) - std::log(0.2)) * i / 19.0);
    for (int j = 0; j < 20; ++j) check(KernelGeometry{1.3, r, pi * (j + 0.5) / 20.0});
  }
  check(KernelGeometry{1.0, 1.0, pi / 3});
  check(KernelGeometry{2.0, 3.0, pi / 2});
  const auto a = kernel_eigen(KernelGeometry{1.0, 1.0, pi / 3});
  const auto b = kernel_eigen(KernelGeometry{2.0, 3.0, pi / 2});
  const bool special = std::abs(a.values[0] - 1.5) < 1e-12 && std::abs(a.values[1] - 0.5) < 1e-12 &&
                       std::abs(b.values[0] - 36.0) < 1e-12 && std::abs(b.values[1] - 4.0) < 1e-12;
  const bool pass = worst_value <= 1e-10 && worst_angle <= 1e-10 && special;
  return {pass, fmt("400-point grid plus special cases: eigenvalue rel err %.2g, rotation err %.2g rad; "
                    "r=1 gives (1.5, 0.5), omega=pi/2 gives (rho^2 r^2, rho^2) = (36, 4)",
                    worst_value, worst_angle)};
}

// 4. prefactor value and measured correlation cap
Outcome prefactor_cap() {
  const double expected = 2.0 * std::sqrt(10.0) / 11.0;
  const auto r = run_fig3(Fig3Constants::default_replicates, 1);
  const bool pass = std::abs(r.prefactor - expected) < 1e-12 && std::abs(r.cap - r.prefactor) <= 0.03;
  return {pass, fmt("prefactor %.6f (2 sqrt 10 / 11 = %.6f), measured cap %.4f (se %.4f) over %d replicates", r.prefactor,
                    expected, r.cap, r.cap_se, r.replicates)};
}

// 5. wide taper equals dense; sparse fit faster than dense at n = 3000
Outcome taper_consistency() {
  ModelDesign truth_design;
  truth_design[Component::Mean].covariates = {"c1"};
  truth_design[Component::StdDev].covariates = {"c1"};
  truth_design[Component::Scale].covariates = {"c2"};
  const auto truth = from_lists(truth_design, {{Component::Mean, {0.5, 1.0}},
                                               {Component::StdDev, {0.0, 0.3}},
                                               {Component::Scale, {std::log(0.1), 0.4}}});
  SimulateSettings s;
  s.n = 200;
  s.covariates = 2;
  const auto sample = simulate_sample(s, truth_design, truth, 5);
  const auto data = make_dataset(sample.train, DatasetSpec{});
  const double diameter = domain_diameter(data.locations);
  const Model dense(data, truth_design);
  const double ll = loglik(dense, truth);
  double worst = 0.0;
  for (const TaperSpec t : {TaperSpec{TaperFamily::None, 1.01 * diameter}, TaperSpec{TaperFamily::Wendland1, 1e6 * diameter}}) {
    ModelDesign d = truth_design;
    d.taper = t;
    const Model sparse(data, d);
    worst = std::max(worst, std::abs(loglik_tapered(sparse, truth) - ll) / std::abs(ll));
  }

  // n = 3000, about 50 neighbours per site
  ModelDesign fit_design;
  fit_design.smoothness = {1.5, 1.5};
  SimulateSettings big;
  big.n = 3000;
  big.covariates = 0;
  const auto big_truth = from_lists(fit_design, {{Component::Mean, {1.0}}, {Component::Scale, {std::log(0.02)}}});
  const auto big_sample = simulate_sample(big, fit_design, big_truth, 6);
  const auto big_data = make_dataset(big_sample.train, DatasetSpec{});
  const double delta = std::sqrt(50.0 / (3000.0 * std::numbers::pi));
  FitOptions opts;
  opts.kind = ObjectiveKind::Loglik;

  ModelDesign tapered = fit_design;
  tapered.taper = TaperSpec{TaperFamily::Wendland1, delta};
  auto t0 = std::chrono::steady_clock::now();
  const LikelihoodEvaluator sparse_eval(std::make_shared<const Model>(big_data, tapered));
  const auto sparse_fit = fit(sparse_eval, PenaltyConfig{}, opts);
  const double sparse_time = seconds_since(t0);
  const double neighbours =
      static_cast<double>(sparse_eval.model().pattern()->full_nnz()) / static_cast<double>(big_data.size());

  t0 = std::chrono::steady_clock::now();
  const LikelihoodEvaluator dense_eval(std::make_shared<const Model>(big_data, fit_design));
  const auto dense_fit = fit(dense_eval, PenaltyConfig{}, opts);
  const double dense_time = seconds_since(t0);

  const bool pass = worst <= 1e-8 && sparse_time < dense_time;
  return {pass, fmt("n=200 max rel |tapered - dense| = %.2g (bound 1e-8); n=3000, %.1f entries per row: "
                    "sparse fit %.1f s (%d it), dense fit %.1f s (%d it)",
                    worst, neighbours, sparse_time, sparse_fit.optim.iterations, dense_time,
                    dense_fit.optim.iterations)};
}

// 6. nugget-free kriging interpolates at every lambda_r
Outcome exact_interpolation() {
  ModelDesign d;
  d[Component::Mean].covariates = {"c1"};
  d[Component::Scale].covariates = {"c1"};
  d.smoothness = {1.5, 1.5};
  const auto truth =
      from_lists(d, {{Component::Mean, {0.0, 1.0}}, {Component::Scale, {std::log(0.08), 0.3}}});
  SimulateSettings s;
  s.n = 150;
  s.covariates = 1;
  const auto sample = simulate_sample(s, d, truth, 8);
  auto eval = LikelihoodEvaluator(std::make_shared<const Model>(make_dataset(sample.train, DatasetSpec{}), d));
  const auto& m = eval.model();
  double worst_mean = 0.0, worst_sd = 0.0;
  for (double lambda : {0.0, 0.01, 0.1}) {
    PenaltyConfig cfg;
    cfg.lambda_r = lambda;
    const auto f = fit(eval, cfg);
    const auto pd = krige(m, f.params, m.data());
    const auto k = m.kernels(f.params);
    for (Eigen::Index i = 0; i < m.n(); ++i) {
      worst_mean = std::max(worst_mean, std::abs(pd.mean(i) - m.data().response(i)));
      worst_sd = std::max(worst_sd, pd.sd(i) / k[static_cast<std::size_t>(i)].sigma);
    }
  }
  return {worst_mean <= 1e-8 && worst_sd <= 1e-4,
          fmt("n=150, lambda_r in {0, 0.01, 0.1}: max |mean - z| = %.2g, max sd / marginal sd = %.2g", worst_mean,
              worst_sd)};
}

// 7. smooth L1 approximation error
Outcome smooth_l1_bound() {
  double worst = -INFINITY;
  for (int i = 0; i <= 2000000; ++i) {
    const double x = -10.0 + 1e-5 * i;
    worst = std::max(worst, smooth_l1(x, 1e6) - std::abs(x));
  }
  const double bound = 2.0 * std::numbers::ln2 / 1e6 + 1e-12;
  return {worst <= bound, fmt("max excess %.6g over 2e6 grid points (bound %.6g)", worst, bound)};
}

// 8. scoring rules against sampling and density oracles
Outcome scoring_oracles() {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.1, 3.0);
  double worst_z = 0.0, worst_log = 0.0;
  for (int t = 0; t < 20; ++t) {
    const double mu = g(rng), sigma = u(rng), z = mu + 2.0 * g(rng);
    const int m = 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < m; ++i) {
      const double a = mu + sigma * g(rng), b = mu + sigma * g(rng);
      const double v = std::abs(a - z) - 0.5 * std::abs(a - b);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / m, se = std::sqrt((sum2 / m - mean * mean) / m);
    worst_z = std::max(worst_z, std::abs(crps_gaussian(z, mu, sigma) - mean) / se);
    const double density =
        std::exp(-0.5 * std::pow((z - mu) / sigma, 2)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
    worst_log = std::max(worst_log, std::abs(logscore_gaussian(z, mu, sigma) + std::log(density)));
  }
  return {worst_z <= 3.0 && worst_log <= 1e-12,
          fmt("20 triples: max |CRPS - MC| = %.2f SE (bound 3); max |logscore + log density| = %.2g", worst_z,
              worst_log)};
}

// 9. regularization path on the synthetic study
Outcome regularization_path() {
  const auto r = run_fig6(1);
  const auto& base = r.rows.front();
  if (!base.ok) return {false, "unpenalized fit failed: " + base.error};
  double worst = 0.0;
  for (const auto& row : r.rows) {
    if (!row.ok) return {false, fmt("lambda_r = %g failed: %s", row.lambda_r, row.error.c_str())};
    worst = std::max({worst, std::abs(row.rmspe / base.rmspe - 1.0), std::abs(row.crps / base.crps - 1.0)});
  }
  const auto& last = r.rows.back();
  const bool pass = last.condition < base.condition && worst <= 0.03;
  return {pass, fmt("condition %.4g at lambda_r=0, %.4g at lambda_r=%g; max relative RMSPE/CRPS change %.2f%% "
                    "(bound 3%%) over %zu values",
                    base.condition, last.condition, last.lambda_r, 100.0 * worst, r.rows.size())};
}

// 10. two-stage selection recovers the true slopes
Outcome two_stage_selection() {
  ModelDesign d;
  const std::vector<std::string> cands = {"c1", "c2", "c3", "c4", "c5", "c6"};
  d[Component::Mean].covariates = cands;
  d[Component::Scale].covariates = cands;
  d.smoothness = {1.5, 1.5};
  const auto truth = from_lists(d, {{Component::Mean, {0.0, 1.0, -0.8, 0.0, 0.0, 0.0, 0.0}},
                                    {Component::Scale, {std::log(0.08), 0.0, 0.0, 0.4, 0.0, 0.0, 0.0}}});
  PenaltyConfig cfg;
  cfg.lambda_mu = 0.02;
  cfg.lambda_sigma = 0.02;
  FitOptions opts;
  int recovered = 0, within = 0;
  double worst_ratio = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    SimulateSettings s;
    s.n = 500;
    s.holdout = 500;
    s.covariates = 6;
    const auto sample = simulate_sample(s, d, truth, 100 + static_cast<std::uint64_t>(rep));
    const auto train = make_dataset(sample.train, DatasetSpec{});
    const auto hold = make_dataset(sample.holdout, DatasetSpec{}, train.standardization);
    const LikelihoodEvaluator eval(std::make_shared<const Model>(train, d));
    const auto& l = eval.model().layout();

    const auto two = two_stage_fit(eval, cfg, opts);
    const auto& act = two.active.mask;
    if (act[*l.find(Component::Mean, "c1")] && act[*l.find(Component::Mean, "c2")] &&
        act[*l.find(Component::Scale, "c3")])
      ++recovered;
    const auto full = fit(eval, PenaltyConfig{}, opts);
    auto mean_crps = [&](const ModelParameters& p) {
      const auto pd = krige(eval.model(), p, hold, PredictOptions{true, false});
      double acc = 0.0;
      for (Eigen::Index i = 0; i < hold.size(); ++i)
        acc += crps_gaussian(hold.response(i), pd.mean(i), std::max(pd.sd(i), 1e-300));
      return acc / static_cast<double>(hold.size());
    };
    const double ratio = mean_crps(two.final.params) / mean_crps(full.params);
    worst_ratio = std::max(worst_ratio, ratio);
    if (ratio <= 1.05) ++within;
  }
  return {recovered >= 16 && within == 20,
          fmt("true slopes kept in %d/20 replicates (need 16); stage-2 CRPS within 5%% of the full model in %d/20 "
              "(worst ratio %.4f)",
              recovered, within, worst_ratio)};
}

// 11. tune, two-stage fit and clustered scoring on synthetic data
Outcome pipeline_dry_run() {
  ModelDesign d;
  d[Component::Mean].covariates = {"c1", "c2", "c3"};
  d[Component::StdDev].covariates = {"c1", "c2", "c3"};
  d[Component::Scale].covariates = {"c1", "c2", "c3"};
  d.smoothness = {0.5, 2.5};
  const auto truth = from_lists(d, {{Component::Mean, {0.0, 1.0, 0.0, 0.5}},
                                    {Component::StdDev, {0.0, 0.4, 0.0, 0.0}},
                                    {Component::Scale, {std::log(0.08), 0.0, 0.3, 0.0}}});
  SimulateSettings s;
  s.n = 400;
  s.holdout = 300;
  const auto sample = simulate_sample(s, d, truth, 31);
  const auto all = make_dataset(sample.train, DatasetSpec{});
  const auto hold = make_dataset(sample.holdout, DatasetSpec{}, all.standardization);

  TuneGrid grid;
  grid.lambda_r = {0.0, 0.01};
  grid.lambda_mu = {0.0, 0.02};
  grid.lambda_sigma = {0.0, 0.02};
  const auto [tr, th] = split_rows(all.size(), grid.holdout_fraction, 31);
  FitOptions opts;
  const auto tuned = tune(d.penalties, grid,
                          default_cell_evaluator(std::make_shared<const Model>(all.subset(tr), d), all.subset(th), opts));
  PenaltyConfig cfg = d.penalties;
  cfg.lambda_r = tuned.best().lambda_r;
  cfg.lambda_mu = tuned.best().lambda_mu;
  cfg.lambda_sigma = tuned.best().lambda_sigma;

  const LikelihoodEvaluator eval(std::make_shared<const Model>(all, d));
  const auto r = two_stage_fit(eval, cfg, opts);
  const auto pd = krige(eval.model(), r.final.params, hold, PredictOptions{true, false});
  const int k = 30;
  const auto report = score_report(hold.response, pd.mean, pd.sd, cluster_holdout(hold.locations, k, 31), k, 31);
  const auto& a = report.aggregate;
  const bool finite = std::isfinite(a.rmspe) && std::isfinite(a.crps) && std::isfinite(a.crps_q95) &&
                      std::isfinite(a.logscore) && std::isfinite(a.ks) && std::isfinite(a.cpi) &&
                      report.standard_error.has_value();
  const std::string table = format_report(report, "two-stage");
  bool columns = true;
  for (const char* col : {"RMSPE", "CRPS", "q0.95", "Log", "D_n", "CPI"}) columns = columns && table.find(col) != std::string::npos;
  std::size_t failed = 0;
  for (const auto& c : tuned.cells) failed += c.ok ? 0 : 1;
  return {finite && columns,
          fmt("%zu grid cells (%zu failed), chosen (%g, %g, %g), %zu active; %d clusters: RMSPE %.3f CRPS %.3f "
              "q95 %.3f LogS %.3f Dn %.3f CPI %.3f",
              tuned.cells.size(), failed, cfg.lambda_r, cfg.lambda_mu, cfg.lambda_sigma, r.active.count(), k, a.rmspe,
              a.crps, a.crps_q95, a.logscore, a.ks, a.cpi)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"positive definiteness", positive_definite},
      {"stationary nesting", stationary_nesting},
      {"eigen-geometry", eigen_geometry},
      {"prefactor cap", prefactor_cap},
      {"taper consistency", taper_consistency},
      {"exact interpolation", exact_interpolation},
      {"smooth-L1 bound", smooth_l1_bound},
      {"scoring oracles", scoring_oracles},
      {"regularization path", regularization_path},
      {"two-stage selection", two_stage_selection},
      {"pipeline dry run", pipeline_dry_run},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d %s: %s [%.1f s] %s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first,
                seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
