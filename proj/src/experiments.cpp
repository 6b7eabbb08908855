#include "nscov/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "nscov/assembly.hpp"
#include "nscov/csv.hpp"
#include "nscov/errors.hpp"
#include "nscov/fit.hpp"
#include "nscov/linalg.hpp"
#include "nscov/model_io.hpp"
#include "nscov/predict.hpp"
#include "nscov/scoring.hpp"

namespace nscov {

StudyId parse_study_id(std::string_view name) {
  if (name == "fig3_covariate_pathologies") return StudyId::Fig3;
  if (name == "fig6_regularization_path") return StudyId::Fig6;
  if (name == "nested_model_check") return StudyId::Nested;
  throw ConfigError("unknown study id '" + std::string(name) +
                    "' (expected fig3_covariate_pathologies, fig6_regularization_path or nested_model_check)");
}

std::string study_name(StudyId id) {
  switch (id) {
    case StudyId::Fig3: return "fig3_covariate_pathologies";
    case StudyId::Fig6: return "fig6_regularization_path";
    case StudyId::Nested: return "nested_model_check";
  }
  return "";
}

void StudySpec::validate() const {
  if (replicates < 0) throw ConfigError("study: replicates must be >= 1 (0 selects the default)");
  if (out.empty()) throw ConfigError("study: output directory required");
}

// ---------------------------------------------------------------------------

Eigen::VectorXd fig3_sites() {
  using C = Fig3Constants;
  std::vector<double> x;
  for (int i = 0; i < C::grid; ++i) x.push_back((i + 0.5) / C::grid);
  for (int k = 1; k < C::segments; ++k) {
    const double b = static_cast<double>(k) / C::segments;
    x.push_back(b - 0.5 * C::gap);
    x.push_back(b + 0.5 * C::gap);
  }
  std::sort(x.begin(), x.end());
  return Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

std::vector<LocalKernel> fig3_kernels(const Eigen::VectorXd& covariate, double slope) {
  std::vector<LocalKernel> k(static_cast<std::size_t>(covariate.size()));
  for (Eigen::Index i = 0; i < covariate.size(); ++i) {
    const double s = Fig3Constants::base * std::exp(slope * covariate(i));
    k[static_cast<std::size_t>(i)] = LocalKernel{1.0, s * Eigen::Matrix2d::Identity(), 0.5};
  }
  return k;
}

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

Fig3Result run_fig3(int replicates, std::uint64_t seed) {
  using C = Fig3Constants;
  if (replicates < 1) throw ConfigError("fig3: replicates must be >= 1");
  Fig3Result r;
  r.replicates = replicates;
  r.x = fig3_sites();
  const Eigen::Index n = r.x.size();
  Eigen::MatrixX2d loc = Eigen::MatrixX2d::Zero(n, 2);
  loc.col(0) = r.x;

  // shared white noise: column j from mt19937_64(seed + j)
  Eigen::MatrixXd u(n, replicates);
  for (int j = 0; j < replicates; ++j) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(j));
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < n; ++i) u(i, j) = normal(rng);
  }

  std::mt19937_64 noise_rng(seed ^ 0x5bd1e995ULL);
  std::normal_distribution<double> noise(0.0, C::noise_sd);
  Eigen::VectorXd one(n), multi(n), smooth(n), noisy(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = r.x(i);
    one(i) = x >= 0.5 ? 1.0 : 0.0;
    multi(i) = static_cast<double>(static_cast<int>(std::floor(x * C::segments)) % 2);
    smooth(i) = 0.5 * (1.0 + std::sin(4.0 * std::numbers::pi * x));
    noisy(i) = smooth(i) + noise(noise_rng);
  }
  const double slope = std::log(C::ratio);
  const std::vector<std::pair<std::string, Eigen::VectorXd>> defs = {
      {"ordinal_one_jump", one}, {"ordinal_multi_jump", multi}, {"smooth", smooth}, {"noisy", noisy}};
  for (const auto& [name, cov] : defs) {
    const auto kernels = fig3_kernels(cov, slope);
    const Eigen::MatrixXd sigma = assemble_dense(loc, kernels, MaternScaling::Sqrt8Nu, 0.0);
    const DenseCholesky chol(sigma);
    Fig3Scenario sc;
    sc.name = name;
    sc.covariate = cov;
    sc.realizations = chol.lower() * u;
    r.scenarios.push_back(std::move(sc));
  }

  for (int k = 1; k < C::segments; ++k) {
    const double b = static_cast<double>(k) / C::segments;
    const auto left = std::lower_bound(r.x.data(), r.x.data() + n, b - 0.75 * C::gap) - r.x.data();
    r.pair_left.push_back(static_cast<int>(left));
    r.pair_right.push_back(static_cast<int>(left + 1));
  }
  r.prefactor = 2.0 * std::sqrt(C::ratio) / (1.0 + C::ratio);

  std::vector<double> a, b;
  const Eigen::MatrixXd& zm = r.scenarios[1].realizations;
  for (std::size_t p = 0; p < r.pair_left.size(); ++p) {
    for (int j = 0; j < replicates; ++j) {
      a.push_back(zm(r.pair_left[p], j));
      b.push_back(zm(r.pair_right[p], j));
    }
  }
  r.cap = pearson(a, b);
  r.cap_se = (1.0 - r.cap * r.cap) / std::sqrt(static_cast<double>(a.size()) - 3.0);

  const std::size_t mid = static_cast<std::size_t>(C::segments / 2 - 1);
  std::vector<double> a1, b1;
  for (int j = 0; j < replicates; ++j) {
    a1.push_back(r.scenarios[0].realizations(r.pair_left[mid], j));
    b1.push_back(r.scenarios[0].realizations(r.pair_right[mid], j));
  }
  r.one_jump_cap = pearson(a1, b1);
  return r;
}

// ---------------------------------------------------------------------------

std::vector<double> fig6_default_lambdas() { return {0.0, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1}; }

namespace {

struct Fig6Data {
  CsvTable train;
  CsvTable test;
  ModelDesign design;
};

Fig6Data fig6_data(std::uint64_t seed) {
  constexpr int nx = 15, ny = 20, n_test = 50;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3), unif(0.0, 1.0);
  const Eigen::Index total = nx * ny + n_test;
  CsvTable all;
  all.names = {"x", "y", "sx", "sy"};
  all.values.resize(total, 4);
  Eigen::Index row = 0;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j, ++row) {
      all.values(row, 0) = (i + 0.5 + jitter(rng)) / nx;
      all.values(row, 1) = (j + 0.5 + jitter(rng)) / ny;
    }
  }
  for (; row < total; ++row) {
    all.values(row, 0) = unif(rng);
    all.values(row, 1) = unif(rng);
  }
  all.values.col(2) = (2.0 * std::numbers::pi * all.values.col(0).array()).sin();
  all.values.col(3) = (2.0 * std::numbers::pi * all.values.col(1).array()).sin();

  Fig6Data d;
  for (Component c : {Component::Mean, Component::StdDev, Component::Scale}) d.design[c].covariates = {"sx", "sy"};
  d.design.seed = seed;

  DatasetSpec spec;
  spec.response.clear();
  const SpatialDataset ds = make_dataset(all, spec);
  const DesignMatrices x = build_design_matrices(ds, d.design);
  ModelParameters truth;
  truth[Component::Mean] = Eigen::Vector3d(0.0, 1.0, 1.0);
  truth[Component::StdDev] = Eigen::Vector3d(0.0, 0.5, 0.5);
  truth[Component::Scale] = Eigen::Vector3d(std::log(0.1), 0.5, 0.5);
  truth[Component::Aniso] = Eigen::VectorXd(0);
  truth[Component::Tilt] = Eigen::VectorXd(0);
  truth[Component::Smooth] = Eigen::VectorXd::Zero(1);
  const Simulation sim = simulate(ds.locations, x, truth, d.design, seed + 1);

  auto take = [&](Eigen::Index first, Eigen::Index count) {
    CsvTable t;
    t.names = {"x", "y", "sx", "sy", "z"};
    t.values.resize(count, 5);
    t.values.leftCols(4) = all.values.middleRows(first, count);
    t.values.col(4) = sim.z.segment(first, count);
    return t;
  };
  d.train = take(0, nx * ny);
  d.test = take(nx * ny, n_test);
  return d;
}

Eigen::VectorXd flatten(const ModelParameters& p) {
  std::vector<double> v;
  for (Component c : kRegressionComponentList)
    for (Eigen::Index i = 0; i < p[c].size(); ++i) v.push_back(p[c](i));
  if (p.log_nugget) v.push_back(*p.log_nugget);
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Fig6Result run_fig6(std::uint64_t seed, const std::vector<double>& lambdas) {
  if (lambdas.empty() || lambdas.front() != 0.0) throw ConfigError("fig6: the lambda_r grid must start at 0");
  const Fig6Data data = fig6_data(seed);
  DatasetSpec spec;
  const SpatialDataset train = make_dataset(data.train, spec);
  const SpatialDataset test = make_dataset(data.test, spec, train.standardization);
  auto model = std::make_shared<const Model>(train, data.design);
  const LikelihoodEvaluator eval(model);
  const ParameterLayout& layout = model->layout();

  Fig6Result res;
  for (std::size_t i = 0; i < layout.size(); ++i) res.labels.push_back(layout.label(i));

  std::optional<Eigen::VectorXd> warm;
  for (double lambda : lambdas) {
    Fig6Row row;
    row.lambda_r = lambda;
    try {
      PenaltyConfig cfg = data.design.penalties;
      cfg.lambda_r = lambda;
      FitOptions opts;
      opts.kind = ObjectiveKind::Penalized;
      opts.start = warm;
      const FitResult f = fit(eval, cfg, opts);
      warm = f.stored;
      row.loglik = f.loglik;
      row.penalized = f.penalized;
      row.iterations = f.optim.iterations;
      const Baseline b = baseline(f.params, model->design(), layout);
      row.rho0 = b.rho0;
      row.nu0 = b.nu0;
      row.coefficients = flatten(f.params);
      row.condition = covariance_condition(*model, f.params);
      const PredictiveDistribution pd = krige(*model, f.params, test);
      const ScoreSet s = score_set(test.response, pd.mean, pd.sd);
      row.rmspe = s.rmspe;
      row.crps = s.crps;
      row.ok = true;
    } catch (const Error& e) {
      row.error = e.what();
    }
    res.rows.push_back(std::move(row));
  }

  const Fig6Row* ref = res.rows.front().ok ? &res.rows.front() : nullptr;
  for (auto& row : res.rows) {
    if (!row.ok || !ref) continue;
    row.relative_change = ((row.coefficients - ref->coefficients).array().abs() /
                           ref->coefficients.array().abs().max(1e-12))
                              .matrix();
    for (std::size_t i = 0; i < layout.size(); ++i) {
      const auto& e = layout.entry(i);
      if (e.component != Component::StdDev && e.component != Component::Scale) continue;
      double& slot = e.intercept() ? row.max_change_intercepts : row.max_change_slopes;
      slot = std::max(slot, row.relative_change(static_cast<Eigen::Index>(i)));
    }
  }
  return res;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd stationary_matern_oracle(const Eigen::MatrixX2d& locations, double sigma,
                                         const Eigen::Matrix2d& Sigma, double nu) {
  const Eigen::Index n = locations.rows();
  const Eigen::Matrix2d inv = Sigma.inverse();
  const double norm = std::pow(2.0, 1.0 - nu) / std::tgamma(nu);
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Vector2d h = (locations.row(i) - locations.row(j)).transpose();
      const double x = std::sqrt(8.0 * nu) * std::sqrt(h.dot(inv * h));
      c(i, j) = x == 0.0 ? sigma * sigma : sigma * sigma * norm * std::pow(x, nu) * std::cyl_bessel_k(nu, x);
    }
  }
  return c;
}

NestedResult run_nested_check(std::uint64_t seed, int draws, Eigen::Index n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  NestedResult out;
  out.draws = draws;
  out.n = n;
  for (int d = 0; d < draws; ++d) {
    CsvTable t;
    t.names = {"x", "y", "a", "b"};
    t.values.resize(n, 4);
    for (Eigen::Index i = 0; i < n; ++i)
      for (int k = 0; k < 4; ++k) t.values(i, k) = unif(rng);
    DatasetSpec spec;
    spec.response.clear();
    const SpatialDataset ds = make_dataset(t, spec);
    ModelDesign design;
    for (Component c : kRegressionComponentList) {
      design[c].intercept = true;
      design[c].covariates = {"a", "b"};
    }
    const ParameterLayout layout(design);
    ModelParameters p;
    for (Component c : kRegressionComponentList) p[c] = Eigen::Vector3d(0.0, 0.0, 0.0);
    const double log_var = -1.0 + 2.0 * unif(rng);
    const double rho = 0.1 + 0.4 * unif(rng);
    const double r = 0.5 + 1.5 * unif(rng);
    const double omega = std::numbers::pi * (0.15 + 0.7 * unif(rng));
    const double nu = 0.6 + 1.8 * unif(rng);
    p[Component::StdDev](0) = log_var;
    p[Component::Scale](0) = std::log(rho);
    p[Component::Aniso](0) = std::log(r);
    p[Component::Tilt](0) = std::log(omega / (std::numbers::pi - omega));
    const auto& b = design.smoothness;
    p[Component::Smooth](0) = std::log((nu - b.nu_min) / (b.nu_max - nu));

    const DesignMatrices x = build_design_matrices(ds, design);
    const auto kernels = local_kernels(x, p, design);
    const Eigen::MatrixXd got = assemble_dense(ds.locations, kernels, design.scaling, 0.0);

    Eigen::Matrix2d sigma_mat;
    sigma_mat << rho * rho, rho * rho * r * std::cos(omega), rho * rho * r * std::cos(omega), rho * rho * r * r;
    const Eigen::MatrixXd want = stationary_matern_oracle(ds.locations, std::exp(0.5 * log_var), sigma_mat, nu);
    out.max_abs_diff = std::max(out.max_abs_diff, (got - want).cwiseAbs().maxCoeff());
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

void write_fig3(const Fig3Result& r, const std::filesystem::path& dir) {
  const int shown = std::min(r.replicates, 3);
  for (const auto& sc : r.scenarios) {
    CsvTable t;
    t.names = {"x", "covariate"};
    for (int j = 0; j < shown; ++j) t.names.push_back("z" + std::to_string(j + 1));
    t.values.resize(r.x.size(), 2 + shown);
    t.values.col(0) = r.x;
    t.values.col(1) = sc.covariate;
    t.values.rightCols(shown) = sc.realizations.leftCols(shown);
    write_csv(dir / (sc.name + ".csv"), t);
  }
  nlohmann::json j = {
      {"study", study_name(StudyId::Fig3)},
      {"replicates", r.replicates},
      {"pairs", r.pair_left.size()},
      {"prefactor", r.prefactor},
      {"cap", r.cap},
      {"cap_se", r.cap_se},
      {"one_jump_cap", r.one_jump_cap},
      {"constants",
       {{"grid", Fig3Constants::grid},
        {"segments", Fig3Constants::segments},
        {"base", Fig3Constants::base},
        {"ratio", Fig3Constants::ratio},
        {"gap", Fig3Constants::gap},
        {"noise_sd", Fig3Constants::noise_sd}}},
  };
  write_json(dir / "summary.json", j);
}

void write_fig6(const Fig6Result& r, const std::filesystem::path& dir) {
  std::string path = "lambda_r,ok,condition,loglik,penalized,rho0,nu0,max_change_slopes,max_change_intercepts,"
                     "rmspe,crps,iterations\n";
  std::string coef = "lambda_r,label,estimate,relative_change\n";
  for (const auto& row : r.rows) {
    path += format_double(row.lambda_r) + "," + (row.ok ? "1" : "0");
    if (row.ok) {
      for (double v : {row.condition, row.loglik, row.penalized, row.rho0, row.nu0, row.max_change_slopes,
                       row.max_change_intercepts, row.rmspe, row.crps}) {
        path += "," + format_double(v);
      }
      path += "," + std::to_string(row.iterations) + "\n";
      for (std::size_t i = 0; i < r.labels.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        coef += format_double(row.lambda_r) + ",\"" + r.labels[i] + "\"," + format_double(row.coefficients(k)) +
                "," + format_double(row.relative_change(k)) + "\n";
      }
    } else {
      path += ",,,,,,,,,,\n";
    }
  }
  write_text(dir / "path.csv", path);
  write_text(dir / "coefficients.csv", coef);
  nlohmann::json errors = nlohmann::json::array();
  for (const auto& row : r.rows)
    if (!row.ok) errors.push_back({{"lambda_r", row.lambda_r}, {"error", row.error}});
  write_json(dir / "summary.json", {{"study", study_name(StudyId::Fig6)}, {"failures", errors}});
}

}  // namespace

void run_study(const StudySpec& spec) {
  spec.validate();
  std::filesystem::create_directories(spec.out);
  switch (spec.id) {
    case StudyId::Fig3: {
      const int reps = spec.replicates > 0 ? spec.replicates : Fig3Constants::default_replicates;
      write_fig3(run_fig3(reps, spec.seed), spec.out);
      break;
    }
    case StudyId::Fig6:
      write_fig6(run_fig6(spec.seed), spec.out);
      break;
    case StudyId::Nested: {
      const int draws = spec.replicates > 0 ? spec.replicates : 10;
      const NestedResult r = run_nested_check(spec.seed, draws, 50);
      write_json(spec.out / "summary.json", {{"study", study_name(StudyId::Nested)},
                                             {"draws", r.draws},
                                             {"n", r.n},
                                             {"max_abs_diff", r.max_abs_diff}});
      break;
    }
  }
}

}  // namespace nscov
