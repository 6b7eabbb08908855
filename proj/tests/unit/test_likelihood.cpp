#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "nscov/errors.hpp"
#include "nscov/likelihood.hpp"
#include "oracle_data.hpp"

using namespace nscov;

namespace {

const nlohmann::json& lik() { return oracle::oracles()["likelihood"]; }

ModelDesign oracle_design(bool anisotropic) {
  ModelDesign d;
  for (Component c : kRegressionComponentList) {
    const std::string name(component_name(c));
    d[c].intercept = true;
    d[c].covariates = lik()["design"][name].get<std::vector<std::string>>();
  }
  if (!anisotropic) {
    d[Component::Aniso].intercept = false;
    d[Component::Tilt].intercept = false;
  }
  d.smoothness = {lik()["nu_bounds"][0], lik()["nu_bounds"][1]};
  return d;
}

SpatialDataset oracle_data() {
  DatasetSpec spec;
  spec.covariates = {"a", "b"};
  spec.log_columns = lik()["log"].get<std::vector<std::string>>();
  return make_dataset(oracle::table_from(lik()["table"]), spec);
}

ModelParameters oracle_params(const ModelDesign& d, const char* key = "coefficients") {
  ModelParameters p;
  for (Component c : kRegressionComponentList) {
    const std::string name(component_name(c));
    const auto& j = lik()[key];
    if (j.contains(name) && d[c].size() > 0) {
      const auto v = j[name].get<std::vector<double>>();
      p[c] = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    } else if (lik()["coefficients"].contains(name) && d[c].size() > 0) {
      const auto v = lik()["coefficients"][name].get<std::vector<double>>();
      p[c] = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    } else {
      p[c] = Eigen::VectorXd(0);
    }
  }
  if (d.nugget) p.log_nugget = lik()["log_nugget"].get<double>();
  return p;
}

std::shared_ptr<const Model> line_model(int n, const ModelDesign& d, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CsvTable t;
  t.names = {"x", "y", "c", "z"};
  t.values.resize(n, 4);
  for (int i = 0; i < n; ++i) t.values.row(i) << i / double(n), (i % 7) / 7.0, g(rng), g(rng);
  return std::make_shared<const Model>(make_dataset(t, DatasetSpec{}), d);
}

}  // namespace

TEST(Loglik, MatchesExplicitInverseOracle) {
  const ModelDesign d = oracle_design(true);
  const Model m(oracle_data(), d);
  const double want = lik()["loglik"];
  EXPECT_NEAR(loglik(m, oracle_params(d)), want, 1e-10 * std::abs(want));
}

TEST(Loglik, WithNugget) {
  ModelDesign d = oracle_design(true);
  d.nugget = true;
  const Model m(oracle_data(), d);
  const double want = lik()["loglik_nugget"];
  EXPECT_NEAR(loglik(m, oracle_params(d)), want, 1e-10 * std::abs(want));
}

TEST(Loglik, IsotropicAndTapered) {
  ModelDesign d = oracle_design(false);
  const Model dense(oracle_data(), d);
  const ModelParameters p = oracle_params(d, "isotropic_coefficients");
  const double iso = lik()["loglik_isotropic"];
  EXPECT_NEAR(loglik(dense, p), iso, 1e-10 * std::abs(iso));

  d.taper = TaperSpec{TaperFamily::Wendland1, lik()["taper_delta"].get<double>()};
  const Model tapered(oracle_data(), d);
  ASSERT_TRUE(tapered.sparse());
  const double want = lik()["loglik_tapered"];
  EXPECT_NEAR(loglik_tapered(tapered, p), want, 1e-10 * std::abs(want));
}

TEST(Loglik, TwoIndependentSitesAtTheirMean) {
  CsvTable t;
  t.names = {"x", "y", "z"};
  t.values.resize(2, 3);
  t.values << 0, 0, 0.7, 100, 0, 0.7;
  ModelDesign d;
  const Model m(make_dataset(t, DatasetSpec{}), d);
  ModelParameters p;
  p[Component::Mean] = Eigen::VectorXd::Constant(1, 0.7);
  p[Component::StdDev] = Eigen::VectorXd::Zero(1);
  p[Component::Scale] = Eigen::VectorXd::Constant(1, std::log(0.01));
  p[Component::Aniso] = p[Component::Tilt] = Eigen::VectorXd(0);
  p[Component::Smooth] = Eigen::VectorXd::Zero(1);
  EXPECT_NEAR(loglik(m, p), -std::log(2 * std::numbers::pi), 1e-14);
}

TEST(LoglikTapered, WideTaperEqualsDense) {
  ModelDesign d;
  d[Component::Mean].covariates = {"c"};
  d.taper = TaperSpec{TaperFamily::None, 100.0};
  auto m = line_model(60, d);
  const Eigen::VectorXd stored = (Eigen::VectorXd(5) << 0.1, 0.3, -0.2, std::log(0.1), 0.4).finished();
  const auto p = m->layout().decode(stored);
  const double dense = loglik(*m, p);
  EXPECT_NEAR(loglik_tapered(*m, p), dense, 1e-10 * std::abs(dense));
}

TEST(LoglikTapered, DiagonalPatternIsIndependentSum) {
  ModelDesign d;
  d.taper = TaperSpec{TaperFamily::Wendland1, 1e-6};
  auto m = line_model(30, d);
  const Eigen::VectorXd stored = (Eigen::VectorXd(4) << 0.2, std::log(2.0), std::log(0.1), 0.0).finished();
  const auto p = m->layout().decode(stored);
  double want = 0.0;
  for (Eigen::Index i = 0; i < 30; ++i) {
    const double r = m->data().response(i) - 0.2;
    want += -0.5 * std::log(2 * std::numbers::pi * 2.0) - 0.5 * r * r / 2.0;
  }
  EXPECT_NEAR(loglik_tapered(*m, p), want, 1e-11 * std::abs(want));
}

TEST(SmoothL1, SpecExamples) {
  EXPECT_NEAR(smooth_l1(0.0, 1e6), 2 * std::log(2.0) / 1e6, 1e-18);
  EXPECT_NEAR(smooth_l1(3.0, 1e6), 3.0, 1e-6);
  EXPECT_NEAR(smooth_l1(0.5, 10.0), 0.1 * (std::log1p(std::exp(5.0)) + std::log1p(std::exp(-5.0))), 1e-15);
  EXPECT_NEAR(smooth_l1(0.5, 10.0), 0.5013430696978237, 1e-15);
  EXPECT_TRUE(std::isfinite(smooth_l1(1e6, 1e6)));
  EXPECT_EQ(smooth_l1(-2.0, 7.0), smooth_l1(2.0, 7.0));
}

TEST(Penalties, MicroergodicArithmetic) {
  ModelDesign d;
  d.smoothness = {0.5, 1.5};
  auto m = line_model(100, d);
  const Eigen::VectorXd stored = (Eigen::VectorXd(4) << 0.0, 0.0, std::log(2.0), 0.0).finished();
  const auto p = m->layout().decode(stored);
  PenaltyConfig cfg;
  EXPECT_EQ(penalized_loglik(*m, p, cfg), loglik(*m, p));
  cfg.lambda_r = 0.01;
  EXPECT_NEAR(penalized_loglik(*m, p, cfg), loglik(*m, p) - 2.0, 1e-12);
  EXPECT_NEAR(microergodic_penalty(*m, p, cfg), 2.0, 1e-14);
}

TEST(Penalties, StageOneArithmetic) {
  ModelDesign d;
  d[Component::Mean].covariates = {"c"};
  d[Component::Scale].covariates = {"c"};
  auto m = line_model(100, d);
  Eigen::VectorXd stored = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m->layout().size()));
  stored(static_cast<Eigen::Index>(m->layout().offset(Component::Scale))) = std::log(0.1);
  const auto p0 = m->layout().decode(stored);
  PenaltyConfig cfg;
  EXPECT_EQ(stage1_objective(*m, p0, cfg), penalized_loglik(*m, p0, cfg));

  cfg.lambda_mu = 0.1;
  cfg.lambda_sigma = 0.1;
  const double zero_pen = 2 * 100 * 0.1 * 2 * std::log(2.0) / cfg.kappa;
  EXPECT_NEAR(penalized_loglik(*m, p0, cfg) - stage1_objective(*m, p0, cfg), zero_pen, 1e-12);

  stored(1) = 1.0;  // mean slope
  const auto p1 = m->layout().decode(stored);
  EXPECT_NEAR(penalized_loglik(*m, p1, cfg) - stage1_objective(*m, p1, cfg), 10.0, 1e-3);
}

TEST(Penalties, SlopeClassification) {
  EXPECT_TRUE(penalized_slope({Component::Mean, "c"}));
  EXPECT_TRUE(penalized_slope({Component::Smooth, "c"}));
  EXPECT_FALSE(penalized_slope({Component::Scale, std::string(kInterceptName)}));
  EXPECT_FALSE(penalized_slope({Component::Nugget, std::string(kInterceptName)}));
}

TEST(LikelihoodEvaluator, AgreesWithDirectAndCachesFactor) {
  ModelDesign d;
  d[Component::Mean].covariates = {"c"};
  auto m = line_model(80, d);
  const LikelihoodEvaluator eval(m);
  Eigen::VectorXd x = (Eigen::VectorXd(5) << 0.1, -0.2, 0.3, std::log(0.05), 0.2).finished();
  PenaltyConfig cfg;
  cfg.lambda_r = 0.05;
  const auto e = eval.evaluate(x, ObjectiveKind::Penalized, cfg, false);
  EXPECT_NEAR(e.loglik, loglik(*m, m->layout().decode(x)), 1e-10 * std::abs(e.loglik));
  EXPECT_NEAR(e.objective, penalized_loglik(*m, m->layout().decode(x), cfg), 1e-9 * std::abs(e.objective));
  const auto before = eval.factorizations();
  x(0) += 0.5;  // mean
  x(2) += 0.1;  // variance scale only
  (void)eval.evaluate(x, ObjectiveKind::Loglik, cfg, false);
  EXPECT_EQ(eval.factorizations(), before);
  x(3) += 0.1;
  (void)eval.evaluate(x, ObjectiveKind::Loglik, cfg, false);
  EXPECT_EQ(eval.factorizations(), before + 1);
}

TEST(LikelihoodEvaluator, FailureGivesMinusInfinity) {
  ModelDesign d;
  auto m = line_model(40, d);
  const LikelihoodEvaluator eval(m);
  // enormous range with maximal smoothness: numerically singular
  const Eigen::VectorXd x = (Eigen::VectorXd(4) << 0.0, 0.0, 12.0, 30.0).finished();
  EXPECT_EQ(eval.objective(x, ObjectiveKind::Loglik, PenaltyConfig{}, false),
            -std::numeric_limits<double>::infinity());
  EXPECT_THROW((void)eval.evaluate(x, ObjectiveKind::Loglik, PenaltyConfig{}, false), NumericalError);
}

TEST(Model, RequiresResponse) {
  CsvTable t;
  t.names = {"x", "y"};
  t.values = Eigen::MatrixXd::Random(5, 2);
  DatasetSpec spec;
  spec.response.clear();
  EXPECT_THROW(Model(make_dataset(t, spec), ModelDesign{}), DataError);
}
