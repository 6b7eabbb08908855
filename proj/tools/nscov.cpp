// nscov: batch front end for the nonstationary Gaussian-process library.
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numerical failure, 1 anything else.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "nscov/config.hpp"
#include "nscov/csv.hpp"
#include "nscov/errors.hpp"
#include "nscov/experiments.hpp"
#include "nscov/fit.hpp"
#include "nscov/likelihood.hpp"
#include "nscov/model_io.hpp"
#include "nscov/predict.hpp"
#include "nscov/scoring.hpp"
#include "nscov/selection.hpp"
#include "nscov/synthetic.hpp"

namespace fs = std::filesystem;
using namespace nscov;

namespace {

struct Common {
  std::string config;
  std::string data;
  std::string out = ".";
  int threads = 0;
  std::optional<long long> seed;
  std::string taper;
};

struct Extra {
  std::string params;
  std::string sites;
  std::string predictions;
  std::string study;
  int replicates = 0;
  bool include_nugget = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "Configuration file");
  app->add_option("--data", c.data, "Input CSV (overrides data.file)");
  app->add_option("--out", c.out, "Output directory");
  app->add_option("--threads", c.threads, "Worker threads (default: NSCOV_THREADS or all cores)")
      ->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "Random seed (overrides run.seed)")->check(CLI::NonNegativeNumber);
  app->add_option("--taper", c.taper, "FAMILY:DELTA, overrides the [taper] section");
}

void set_threads(int threads) {
  if (threads <= 0) {
    if (const char* env = std::getenv("NSCOV_THREADS")) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        throw ConfigError(std::string("NSCOV_THREADS: '") + env + "' is not an integer");
      }
      if (threads <= 0) throw ConfigError("NSCOV_THREADS must be positive");
    }
  }
  if (threads > 0) omp_set_num_threads(threads);
}

RunConfig load_run(const Common& c) {
  ConfigFile cfg = c.config.empty() ? ConfigFile::parse("", "<defaults>") : ConfigFile::load(c.config);
  if (!c.data.empty()) cfg.set("data", "file", c.data);
  if (c.seed) cfg.set("run", "seed", std::to_string(*c.seed));
  if (!c.taper.empty()) {
    const auto colon = c.taper.find(':');
    if (colon == std::string::npos) throw ConfigError("--taper: expected FAMILY:DELTA, got '" + c.taper + "'");
    cfg.set("taper", "family", c.taper.substr(0, colon));
    cfg.set("taper", "delta", c.taper.substr(colon + 1));
  }
  return resolve_config(cfg);
}

const std::string& require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string(what) + ": no file given");
  if (!fs::exists(path)) throw DataError(std::string(what) + ": file not found: " + path);
  return path;
}

fs::path out_dir(const Common& c) {
  fs::create_directories(c.out);
  return c.out;
}

int cmd_simulate(const Common& c) {
  const RunConfig run = load_run(c);
  ModelDesign design = run.design;
  const ModelParameters truth = truth_parameters(run, ParameterLayout(design));
  const SyntheticSample s = simulate_sample(run.simulate, design, truth, run.seed);
  const fs::path out = out_dir(c);
  write_csv(out / "simulated.csv", s.train);
  if (s.holdout.rows() > 0) write_csv(out / "holdout.csv", s.holdout);
  if (s.jitter_used) std::cerr << "warning: diagonal jitter was needed to factor the simulation covariance\n";
  std::cout << "wrote " << s.train.rows() << " training rows";
  if (s.holdout.rows() > 0) std::cout << " and " << s.holdout.rows() << " holdout rows";
  std::cout << " to " << out.string() << "\n";
  return 0;
}

int cmd_fit(const Common& c) {
  const RunConfig run = load_run(c);
  const CsvTable table = read_csv(require_file(run.data_file, "data.file"));
  auto model = std::make_shared<const Model>(make_dataset(table, run.data), run.design);
  const LikelihoodEvaluator eval(model);

  const auto t0 = std::chrono::steady_clock::now();
  const TwoStageResult r = two_stage_fit(eval, run.design.penalties, run.fit);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  double condition = std::numeric_limits<double>::quiet_NaN();
  try {
    condition = covariance_condition(*model, r.final.params);
  } catch (const NumericalError&) {
  }
  nlohmann::json report = fit_report(*model, r.final, condition);
  report["wall_seconds"] = wall;
  report["two_stage"] = {{"stage1", r.stage1.has_value()}, {"stage2_skipped", r.stage2_skipped}};
  report["active_set"] = nlohmann::json::array();
  for (std::size_t i = 0; i < model->layout().size(); ++i)
    if (r.active.mask[i]) report["active_set"].push_back(model->layout().label(i));

  const fs::path out = out_dir(c);
  write_json(out / "fit.json", report);
  write_parameter_file(out / "params.json",
                       ParameterFile{run.data, run.design, model->data().standardization, r.final.params});
  std::cout << "loglik " << format_double(r.final.loglik) << ", penalized " << format_double(r.final.penalized)
            << ", " << r.final.optim.iterations << " iterations"
            << (r.final.optim.converged ? "" : " (not converged: " + r.final.optim.message + ")") << "\n";
  if (!r.final.diagnostic.empty()) std::cerr << "warning: " << r.final.diagnostic << "\n";
  return 0;
}

int cmd_predict(const Common& c, const Extra& x) {
  const RunConfig run = load_run(c);
  const ParameterFile pf = read_parameter_file(require_file(x.params.empty() ? run.params_file : x.params, "--params"));
  const CsvTable train_table = read_csv(require_file(run.data_file, "data.file"));
  const CsvTable site_table = read_csv(require_file(x.sites.empty() ? run.sites_file : x.sites, "--sites"));

  SpatialDataset train = make_dataset(train_table, pf.data, pf.standardization);
  require_distinct_locations(train.locations);
  const Model model(std::move(train), pf.design);
  DatasetSpec site_spec = pf.data;
  if (!site_table.has(site_spec.response)) site_spec.response.clear();
  const SpatialDataset sites = make_dataset(site_table, site_spec, pf.standardization);

  const PredictiveDistribution pd = krige(model, pf.params, sites, PredictOptions{x.include_nugget, false});
  CsvTable out;
  out.names = {pf.data.x};
  if (sites.dim == 2) out.names.push_back(pf.data.y);
  out.names.push_back("mean");
  out.names.push_back("sd");
  const auto cols = static_cast<Eigen::Index>(out.names.size());
  out.values.resize(sites.size(), cols);
  out.values.leftCols(sites.dim) = sites.locations.leftCols(sites.dim);
  out.values.col(cols - 2) = pd.mean;
  out.values.col(cols - 1) = pd.sd;
  const fs::path dir = out_dir(c);
  write_csv(dir / "predictions.csv", out);
  std::cout << "wrote " << sites.size() << " predictions to " << (dir / "predictions.csv").string() << "\n";
  return 0;
}

int cmd_tune(const Common& c) {
  const RunConfig run = load_run(c);
  const CsvTable table = read_csv(require_file(run.data_file, "data.file"));
  const SpatialDataset all = make_dataset(table, run.data);
  const auto [train_rows, hold_rows] = split_rows(all.size(), run.grid.holdout_fraction, run.seed);
  auto model = std::make_shared<const Model>(all.subset(train_rows), run.design);
  const TuneResult r = tune(run.design.penalties, run.grid, default_cell_evaluator(model, all.subset(hold_rows), run.fit));

  const fs::path out = out_dir(c);
  std::ofstream csv(out / "tune.csv");
  csv << "lambda_r,lambda_mu,lambda_sigma,ok,crps,active_count,error\n";
  for (const auto& cell : r.cells) {
    std::string err = cell.error;
    for (char& ch : err)
      if (ch == '"' || ch == '\n') ch = '\'';
    csv << format_double(cell.lambda_r) << ',' << format_double(cell.lambda_mu) << ','
        << format_double(cell.lambda_sigma) << ',' << (cell.ok ? 1 : 0) << ','
        << (cell.ok ? format_double(cell.crps) : "") << ',' << cell.active_count << ",\"" << err << "\"\n";
  }
  const TuneCell& b = r.best();
  write_json(out / "chosen.json", {{"lambda_r", b.lambda_r},
                                   {"lambda_mu", b.lambda_mu},
                                   {"lambda_sigma", b.lambda_sigma},
                                   {"crps", b.crps},
                                   {"active_count", b.active_count},
                                   {"train_rows", train_rows.size()},
                                   {"holdout_rows", hold_rows.size()}});
  std::cout << "chosen lambda_r " << format_double(b.lambda_r) << ", lambda_mu " << format_double(b.lambda_mu)
            << ", lambda_sigma " << format_double(b.lambda_sigma) << " (CRPS " << format_double(b.crps) << ")\n";
  return 0;
}

int cmd_score(const Common& c, const Extra& x) {
  const RunConfig run = load_run(c);
  const CsvTable held = read_csv(require_file(run.data_file, "data.file"));
  const CsvTable pred = read_csv(require_file(x.predictions, "--predictions"));
  if (held.rows() != pred.rows()) {
    throw DataError("score: holdout has " + std::to_string(held.rows()) + " rows but predictions have " +
                    std::to_string(pred.rows()));
  }
  Eigen::MatrixX2d loc = Eigen::MatrixX2d::Zero(held.rows(), 2);
  loc.col(0) = held.values.col(held.column(run.data.x));
  if (!run.data.y.empty() && held.has(run.data.y)) loc.col(1) = held.values.col(held.column(run.data.y));
  const Eigen::VectorXd z = held.values.col(held.column(run.data.response));
  const Eigen::VectorXd mu = pred.values.col(pred.column("mean"));
  const Eigen::VectorXd sd = pred.values.col(pred.column("sd"));
  for (Eigen::Index i = 0; i < sd.size(); ++i) {
    if (!(sd(i) > 0.0)) throw DataError("score: predictions row " + std::to_string(i + 2) + ": sd must be positive");
  }
  const int k = static_cast<int>(std::min<Eigen::Index>(run.score_clusters, held.rows()));
  const auto clusters = cluster_holdout(loc, k, run.seed);
  const ScoreReport report = score_report(z, mu, sd, clusters, k, run.seed);

  const fs::path out = out_dir(c);
  const std::string text = format_report(report, x.study.empty() ? "model" : x.study);
  std::ofstream(out / "report.txt") << text;
  auto set_json = [](const ScoreSet& s) {
    return nlohmann::json{{"rmspe", s.rmspe},   {"crps", s.crps}, {"crps_q95", s.crps_q95},
                          {"logscore", s.logscore}, {"ks", s.ks}, {"cpi", s.cpi}};
  };
  nlohmann::json j = {{"k", report.k}, {"seed", report.seed}, {"aggregate", set_json(report.aggregate)},
                      {"pooled", set_json(report.pooled)}, {"notes", report.notes}};
  j["standard_error"] = report.standard_error ? set_json(*report.standard_error) : nlohmann::json(nullptr);
  j["clusters"] = nlohmann::json::array();
  for (const auto& cs : report.clusters) {
    j["clusters"].push_back({{"cluster", cs.cluster}, {"size", cs.size}, {"scores", set_json(cs.scores)}});
  }
  write_json(out / "report.json", j);
  std::cout << text;
  return 0;
}

int cmd_study(const Common& c, const Extra& x) {
  StudySpec spec;
  spec.id = parse_study_id(x.study);
  spec.replicates = x.replicates;
  spec.seed = c.seed ? static_cast<std::uint64_t>(*c.seed) : 1;
  spec.out = c.out;
  run_study(spec);
  std::cout << "wrote " << study_name(spec.id) << " outputs to " << spec.out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonstationary Gaussian-process fitting, prediction and scoring"};
  app.require_subcommand(1);
  Common common;
  Extra extra;

  auto* sim = app.add_subcommand("simulate", "Draw a synthetic dataset from the [truth] section");
  auto* fit = app.add_subcommand("fit", "Fit the configured model (two-stage when Lasso penalties are set)");
  auto* pred = app.add_subcommand("predict", "Krige at new sites from a parameter file");
  auto* tun = app.add_subcommand("tune", "Grid search over penalty parameters on a random split");
  auto* sco = app.add_subcommand("score", "Cluster-based scores of a prediction file against a holdout");
  auto* stu = app.add_subcommand("study", "Run a scripted study");
  for (auto* s : {sim, fit, pred, tun, sco, stu}) add_common(s, common);
  pred->add_option("--params", extra.params, "Parameter file written by fit");
  pred->add_option("--sites", extra.sites, "CSV of prediction sites");
  pred->add_flag("--include-nugget", extra.include_nugget, "Predict noisy observations");
  sco->add_option("--predictions", extra.predictions, "CSV with mean and sd columns, rows aligned with --data")
      ->required();
  sco->add_option("--name", extra.study, "Model name in the text table");
  stu->add_option("id", extra.study, "fig3_covariate_pathologies | fig6_regularization_path | nested_model_check")
      ->required();
  stu->add_option("--replicates", extra.replicates, "Replicate count (0: study default)")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    set_threads(common.threads);
    if (*sim) return cmd_simulate(common);
    if (*fit) return cmd_fit(common);
    if (*pred) return cmd_predict(common, extra);
    if (*tun) return cmd_tune(common);
    if (*sco) return cmd_score(common, extra);
    if (*stu) return cmd_study(common, extra);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
