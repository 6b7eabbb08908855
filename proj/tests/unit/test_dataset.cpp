#include <cmath>
#include <filesystem>
#include <numbers>

#include <gtest/gtest.h>

#include "nscov/csv.hpp"
#include "nscov/dataset.hpp"
#include "nscov/errors.hpp"

using namespace nscov;

TEST(Csv, ParsesHeaderAndValues) {
  const auto t = parse_csv("x,y,z\n1,2,3\n4.5,-1e-3,6\n");
  ASSERT_EQ(t.names.size(), 3u);
  EXPECT_EQ(t.rows(), 2);
  EXPECT_DOUBLE_EQ(t.values(1, 1), -1e-3);
  EXPECT_EQ(t.column("z"), 2);
  EXPECT_THROW((void)t.column("w"), DataError);
}

TEST(Csv, ErrorsNameRowAndColumn) {
  try {
    (void)parse_csv("x,y\n1,2\n3,abc\n", "f.csv");
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("y"), std::string::npos) << msg;
  }
  EXPECT_THROW((void)parse_csv("x,y\n1\n"), DataError);
  EXPECT_THROW((void)parse_csv(""), DataError);
}

TEST(Csv, RoundTripsDoublesExactly) {
  CsvTable t;
  t.names = {"a", "b"};
  t.values.resize(2, 2);
  t.values << 0.1, 1.0 / 3.0, std::numbers::pi, -2.5e-300;
  const auto path = std::filesystem::temp_directory_path() / "nscov_csv_roundtrip.csv";
  write_csv(path, t);
  const auto back = read_csv(path);
  EXPECT_EQ(back.values, t.values);
  std::filesystem::remove(path);
}

TEST(Standardize, SampleSdConvention) {
  Eigen::MatrixXd raw(3, 1);
  raw << 1, 2, 3;
  const auto rec = fit_standardization(raw, {"c"}, {});
  const auto out = apply_standardization(raw, {"c"}, rec);
  EXPECT_NEAR(out(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(out(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(out(2, 0), 1.0, 1e-15);
}

TEST(Standardize, LogFlag) {
  Eigen::MatrixXd raw(3, 1);
  raw << 1, std::numbers::e, std::exp(2.0);
  const auto rec = fit_standardization(raw, {"c"}, {"c"});
  const auto out = apply_standardization(raw, {"c"}, rec);
  EXPECT_NEAR(out(0, 0), -1.0, 1e-14);
  EXPECT_NEAR(out(1, 0), 0.0, 1e-14);
  EXPECT_NEAR(out(2, 0), 1.0, 1e-14);
  EXPECT_TRUE(rec.columns[0].log);
}

TEST(Standardize, Rejections) {
  Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(4, 1, 2.0);
  EXPECT_THROW((void)fit_standardization(constant, {"c"}, {}), DataError);
  Eigen::MatrixXd neg(3, 1);
  neg << 1, -2, 3;
  EXPECT_THROW((void)fit_standardization(neg, {"c"}, {"c"}), DataError);
}

TEST(Dataset, StandardizedColumnsHaveUnitMoments) {
  const auto t = parse_csv("x,y,a,b,z\n0,0,1,5,0.1\n1,0,4,7,0.2\n0,1,2,6,0.3\n1,1,8,9,0.4\n0.5,0.5,3,1,0.5\n");
  DatasetSpec spec;
  spec.log_columns = {"a"};
  const auto ds = make_dataset(t, spec);
  ASSERT_EQ(ds.covariate_names, (std::vector<std::string>{"a", "b"}));
  for (Eigen::Index k = 0; k < 2; ++k) {
    const auto c = ds.covariates.col(k);
    const double m = c.mean();
    const double sd = std::sqrt((c.array() - m).square().sum() / (c.size() - 1));
    EXPECT_LT(std::abs(m), 1e-8);
    EXPECT_LT(std::abs(sd - 1.0), 1e-8);
  }
  EXPECT_EQ(ds.response.size(), 5);
}

TEST(Dataset, PredictionUsesStoredRecord) {
  const auto train = parse_csv("x,y,a,z\n0,0,1,0\n1,0,2,0\n0,1,3,0\n");
  const auto test = parse_csv("x,y,a\n0.5,0.5,4\n");
  DatasetSpec spec;
  const auto tr = make_dataset(train, spec);
  DatasetSpec ps = spec;
  ps.response.clear();
  const auto te = make_dataset(test, ps, tr.standardization);
  EXPECT_NEAR(te.covariates(0, 0), 2.0, 1e-15);  // (4 - 2) / 1
  EXPECT_FALSE(te.has_response());
}

TEST(Dataset, RejectsDuplicateLocations) {
  const auto t = parse_csv("x,y,z\n0,0,1\n1,1,2\n0,0,3\n");
  EXPECT_THROW((void)make_dataset(t, DatasetSpec{}), DataError);
}

TEST(Dataset, OneDimensional) {
  const auto t = parse_csv("x,z\n0,1\n0.5,2\n1,3\n");
  DatasetSpec spec;
  spec.y.clear();
  const auto ds = make_dataset(t, spec);
  EXPECT_EQ(ds.dim, 1);
  EXPECT_TRUE(ds.locations.col(1).isZero());
}

TEST(Dataset, SubsetKeepsRecord) {
  const auto t = parse_csv("x,y,a,z\n0,0,1,0\n1,0,2,1\n0,1,3,2\n");
  const auto ds = make_dataset(t, DatasetSpec{});
  const auto sub = ds.subset({2, 0});
  EXPECT_EQ(sub.size(), 2);
  EXPECT_DOUBLE_EQ(sub.response(0), 2.0);
  EXPECT_DOUBLE_EQ(sub.standardization.columns[0].mean, ds.standardization.columns[0].mean);
}

TEST(Dataset, Diameter) {
  Eigen::MatrixX2d loc(3, 2);
  loc << 0, 0, 3, 4, 1, 1;
  EXPECT_DOUBLE_EQ(domain_diameter(loc), 5.0);
}
