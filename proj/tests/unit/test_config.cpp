#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "nscov/config.hpp"
#include "nscov/errors.hpp"

using namespace nscov;

namespace {

std::string error_of(const std::string& text) {
  try {
    (void)resolve_config(ConfigFile::parse(text, "test.ini"));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ConfigFileTest, ParsesSectionsListsAndComments) {
  const auto c = ConfigFile::parse(
      "# top\n[Data]\nFile = a.csv ; trailing\ncovariates = elev, slope ,aspect\n\n[taper]\ndelta = inf\n");
  EXPECT_EQ(c.get_string("data", "file", ""), "a.csv");
  EXPECT_EQ(c.get_list("data", "covariates"), (std::vector<std::string>{"elev", "slope", "aspect"}));
  EXPECT_TRUE(std::isinf(c.get_double("taper", "delta", 0.0)));
  EXPECT_DOUBLE_EQ(c.get_double("taper", "missing", 2.5), 2.5);
  EXPECT_TRUE(c.has_section("taper"));
  EXPECT_FALSE(c.has("data", "x"));
}

TEST(ConfigFileTest, DuplicateKeyNamesLine) {
  try {
    (void)ConfigFile::parse("[data]\nx = a\nx = b\n", "dup.ini");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("dup.ini"), std::string::npos);
    EXPECT_NE(msg.find("data.x"), std::string::npos);
    EXPECT_NE(msg.find('3'), std::string::npos);
  }
}

TEST(ConfigFileTest, UnknownKeyRejected) {
  EXPECT_NE(error_of("[penalties]\nlambda_q = 1\n").find("penalties.lambda_q"), std::string::npos);
  EXPECT_NE(error_of("[nonsense]\na = 1\n").find("nonsense"), std::string::npos);
}

TEST(ConfigFileTest, BadValueNamesField) {
  EXPECT_NE(error_of("[penalties]\nlambda_r = abc\n").find("penalties.lambda_r"), std::string::npos);
  EXPECT_NE(error_of("[design]\nnugget = perhaps\n").find("design.nugget"), std::string::npos);
  EXPECT_NE(error_of("[taper]\nfamily = gaussian\n").find("taper.family"), std::string::npos);
  EXPECT_NE(error_of("[run]\nseed = -1\n").find("run.seed"), std::string::npos);
}

TEST(ResolveConfig, Defaults) {
  const auto r = resolve_config(ConfigFile::parse(""));
  EXPECT_EQ(r.data.x, "x");
  EXPECT_EQ(r.data.response, "z");
  EXPECT_FALSE(r.design.nugget);
  EXPECT_FALSE(r.design.taper.sparse());
  EXPECT_TRUE(r.fit.standard_errors);
  EXPECT_TRUE(r.include_nugget);
  EXPECT_EQ(r.score_clusters, 100);
  EXPECT_EQ(r.grid.lambda_r.size(), 1U);
  EXPECT_EQ(r.seed, 1U);
}

TEST(ResolveConfig, FullDesign) {
  const auto r = resolve_config(ConfigFile::parse(R"(
[data]
file = train.csv
log = elev
[design]
nugget = yes
reparameterize = true
scaling = unit
[design.mean]
covariates = elev, slope
[design.scale]
intercept = true
covariates = elev
[design.smooth]
nu_min = 0.5
nu_max = 0.5
[taper]
family = wendland1
delta = 0.2
[penalties]
lambda_mu = 0.01
[tune]
lambda_r = 0, 0.1, 1
[run]
seed = 17
)"));
  EXPECT_EQ(r.data_file, "train.csv");
  EXPECT_EQ(r.data.log_columns, std::vector<std::string>{"elev"});
  EXPECT_TRUE(r.design.nugget);
  EXPECT_TRUE(r.design.reparameterize);
  EXPECT_EQ(r.design.scaling, MaternScaling::Unit);
  EXPECT_EQ(r.design[Component::Mean].covariates.size(), 2U);
  EXPECT_EQ(r.design[Component::Scale].covariates, std::vector<std::string>{"elev"});
  EXPECT_DOUBLE_EQ(r.design.smoothness.nu_max, 0.5);
  EXPECT_EQ(r.design.taper.family, TaperFamily::Wendland1);
  EXPECT_DOUBLE_EQ(r.design.taper.delta, 0.2);
  EXPECT_DOUBLE_EQ(r.design.penalties.lambda_mu, 0.01);
  EXPECT_EQ(r.grid.lambda_r, (std::vector<double>{0.0, 0.1, 1.0}));
  EXPECT_EQ(r.seed, 17U);
  EXPECT_EQ(r.design.seed, 17U);
}

TEST(ResolveConfig, ScalingNames) {
  EXPECT_EQ(parse_scaling("sqrt8nu"), MaternScaling::Sqrt8Nu);
  EXPECT_EQ(parse_scaling(to_string(MaternScaling::Unit)), MaternScaling::Unit);
  EXPECT_THROW((void)parse_scaling("other"), ConfigError);
}

TEST(TruthParameters, LaysOutComponents) {
  const auto r = resolve_config(ConfigFile::parse(
      "[design]\nnugget = true\n[design.mean]\ncovariates = a\n[truth]\nmean = 1, 2\nscale = -2\nnugget = -3\n"));
  const ParameterLayout l(r.design);
  const auto p = truth_parameters(r, l);
  EXPECT_EQ(p[Component::Mean], Eigen::Vector2d(1, 2));
  EXPECT_DOUBLE_EQ(p[Component::Scale](0), -2.0);
  EXPECT_DOUBLE_EQ(p[Component::StdDev](0), 0.0);
  EXPECT_DOUBLE_EQ(*p.log_nugget, -3.0);
}

TEST(TruthParameters, CountMismatch) {
  const auto r = resolve_config(ConfigFile::parse("[truth]\nmean = 1, 2\n"));
  EXPECT_THROW((void)truth_parameters(r, ParameterLayout(r.design)), ConfigError);
  const auto n = resolve_config(ConfigFile::parse("[design]\nnugget = true\n"));
  EXPECT_THROW((void)truth_parameters(n, ParameterLayout(n.design)), ConfigError);
}
