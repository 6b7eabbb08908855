#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include <gtest/gtest.h>

#include "nscov/errors.hpp"
#include "nscov/selection.hpp"

using namespace nscov;

namespace {

// Mean depends strongly on c1, not on c2.
std::shared_ptr<const Model> signal_model(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  CsvTable t;
  t.names = {"x", "y", "c1", "c2", "z"};
  t.values.resize(n, 5);
  for (int i = 0; i < n; ++i) {
    const double c1 = g(rng), c2 = g(rng);
    t.values.row(i) << u(rng), u(rng), c1, c2, 2.0 * c1 + 0.3 * g(rng);
  }
  ModelDesign d;
  d[Component::Mean].covariates = {"c1", "c2"};
  d[Component::StdDev].covariates = {"c1"};
  d.smoothness = {1.5, 1.5};
  return std::make_shared<const Model>(make_dataset(t, DatasetSpec{}), d);
}

}  // namespace

TEST(ActiveSetTest, ThresholdKeepsIntercepts) {
  ModelDesign d;
  d[Component::Mean].covariates = {"a"};
  d[Component::Scale].covariates = {"a"};
  d.nugget = true;
  const ParameterLayout l(d);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(l.size()));
  x(1) = 0.5;
  const auto a = threshold(l, x, 1e-4);
  EXPECT_EQ(a.count(), l.size() - 1);  // only the scale slope drops
  EXPECT_FALSE(a.mask[*l.find(Component::Scale, "a")]);
  EXPECT_TRUE(a.mask[*l.find(Component::Mean, "a")]);
  EXPECT_TRUE(a.mask.back());  // nugget
  const auto pinned = a.pinned();
  EXPECT_EQ(std::count(pinned.begin(), pinned.end(), true), 1);
  EXPECT_TRUE(full_active_set(l).all());
}

TEST(Stage1, ZeroLambdaKeepsEverything) {
  const LikelihoodEvaluator eval(signal_model(80, 1));
  const auto s = stage1_fit(eval, PenaltyConfig{});
  EXPECT_TRUE(s.active.all());
}

TEST(Stage1, HugeEpsilonKeepsInterceptsOnly) {
  const LikelihoodEvaluator eval(signal_model(80, 2));
  PenaltyConfig cfg;
  cfg.lambda_mu = 0.01;
  cfg.epsilon = 1e6;
  const auto s = stage1_fit(eval, cfg);
  const auto& l = eval.model().layout();
  for (std::size_t i = 0; i < l.size(); ++i) EXPECT_EQ(s.active.mask[i], l.entry(i).intercept()) << l.label(i);
}

TEST(Stage1, StrongSignalRecovered) {
  const LikelihoodEvaluator eval(signal_model(150, 3));
  PenaltyConfig cfg;
  cfg.lambda_mu = 0.5;
  cfg.lambda_sigma = 0.5;
  const auto s = stage1_fit(eval, cfg);
  const auto& l = eval.model().layout();
  EXPECT_TRUE(s.active.mask[*l.find(Component::Mean, "c1")]);
  EXPECT_FALSE(s.active.mask[*l.find(Component::Mean, "c2")]);
}

TEST(Stage2, AllActiveEqualsDirectFit) {
  const LikelihoodEvaluator eval(signal_model(60, 4));
  const auto& l = eval.model().layout();
  const auto direct = fit(eval, PenaltyConfig{});
  const auto refit = stage2_refit(eval, full_active_set(l), PenaltyConfig{});
  EXPECT_NEAR(refit.objective, direct.objective, 1e-8);
}

TEST(Stage2, NotWorseThanThresholdedPoint) {
  const LikelihoodEvaluator eval(signal_model(100, 5));
  PenaltyConfig cfg;
  cfg.lambda_mu = 0.05;
  cfg.lambda_sigma = 0.05;
  const auto s1 = stage1_fit(eval, cfg);
  Eigen::VectorXd start = s1.fit.stored;
  for (Eigen::Index i = 0; i < start.size(); ++i)
    if (!s1.active.mask[static_cast<std::size_t>(i)]) start(i) = 0.0;
  const double at_start = eval.objective(start, ObjectiveKind::Penalized, cfg, true);
  FitOptions opts;
  opts.start = start;
  const auto s2 = stage2_refit(eval, s1.active, cfg, opts);
  EXPECT_GE(s2.objective, at_start - 1e-9);
  for (Eigen::Index i = 0; i < start.size(); ++i)
    if (!s1.active.mask[static_cast<std::size_t>(i)]) EXPECT_EQ(s2.stored(i), 0.0);
}

TEST(TwoStage, SkipsSecondStageWithoutLasso) {
  const LikelihoodEvaluator eval(signal_model(50, 6));
  PenaltyConfig cfg;
  cfg.lambda_r = 0.01;
  const auto r = two_stage_fit(eval, cfg);
  EXPECT_TRUE(r.stage2_skipped);
  EXPECT_FALSE(r.stage1.has_value());
  EXPECT_TRUE(r.active.all());
}

TEST(Tune, SingleCellGrid) {
  const auto r = tune(PenaltyConfig{}, TuneGrid{}, [](const PenaltyConfig&, std::size_t& active) {
    active = 3;
    return 0.5;
  });
  ASSERT_EQ(r.cells.size(), 1U);
  EXPECT_TRUE(r.best().ok);
  EXPECT_EQ(r.best().active_count, 3U);
}

TEST(Tune, FailingCellsExcluded) {
  TuneGrid g;
  g.lambda_r = {0.0, 0.1};
  g.lambda_mu = {0.0, 0.01};
  const auto r = tune(PenaltyConfig{}, g, [](const PenaltyConfig& c, std::size_t&) -> double {
    if (c.lambda_r > 0.0 && c.lambda_mu > 0.0) throw NumericalError("not positive definite");
    return 1.0 + c.lambda_mu - c.lambda_r;
  });
  ASSERT_EQ(r.cells.size(), 4U);
  EXPECT_EQ(std::count_if(r.cells.begin(), r.cells.end(), [](const TuneCell& c) { return !c.ok; }), 1);
  EXPECT_DOUBLE_EQ(r.best().lambda_r, 0.1);
  EXPECT_DOUBLE_EQ(r.best().lambda_mu, 0.0);
}

TEST(Tune, TiesPreferLargerPenalty) {
  TuneGrid g;
  g.lambda_mu = {0.0, 0.01, 0.1};
  const auto r = tune(PenaltyConfig{}, g, [](const PenaltyConfig&, std::size_t&) { return 1.0; });
  EXPECT_DOUBLE_EQ(r.best().lambda_mu, 0.1);
}

TEST(Tune, AllFailingThrows) {
  EXPECT_THROW((void)tune(PenaltyConfig{}, TuneGrid{},
                          [](const PenaltyConfig&, std::size_t&) -> double { throw NumericalError("x"); }),
               NumericalError);
}

TEST(SplitRows, PartitionsAndRepeats) {
  const auto [a, b] = split_rows(100, 0.3, 7);
  EXPECT_EQ(b.size(), 30U);
  EXPECT_EQ(a.size(), 70U);
  std::set<Eigen::Index> all(a.begin(), a.end());
  all.insert(b.begin(), b.end());
  EXPECT_EQ(all.size(), 100U);
  EXPECT_EQ(split_rows(100, 0.3, 7).second, b);
}
