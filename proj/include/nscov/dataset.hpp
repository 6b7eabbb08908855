#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nscov/csv.hpp"

namespace nscov {

/// How one raw covariate column was transformed: optional log, then centering
/// and scaling by the sample standard deviation (n - 1 denominator).
struct ColumnTransform {
  std::string name;
  bool log = false;
  double mean = 0.0;
  double sd = 1.0;

  [[nodiscard]] double apply(double raw) const;
};

struct Standardization {
  std::vector<ColumnTransform> columns;

  [[nodiscard]] const ColumnTransform& find(std::string_view name) const;
};

/// Observation (or prediction) sites with responses and standardized covariates.
/// One-dimensional data is stored with a zero second coordinate.
struct SpatialDataset {
  int dim = 2;
  Eigen::MatrixX2d locations;
  Eigen::VectorXd response;  // empty at prediction sites without observations
  std::vector<std::string> covariate_names;
  Eigen::MatrixXd covariates;  // standardized, n x p
  Standardization standardization;

  [[nodiscard]] Eigen::Index size() const noexcept { return locations.rows(); }
  [[nodiscard]] bool has_response() const noexcept { return response.size() == size(); }
  /// Throws DataError when the covariate is absent.
  [[nodiscard]] Eigen::Index covariate_index(std::string_view name) const;
  [[nodiscard]] Eigen::Vector2d site(Eigen::Index i) const { return locations.row(i).transpose(); }

  /// Rows selected by index, standardization record shared.
  [[nodiscard]] SpatialDataset subset(const std::vector<Eigen::Index>& rows) const;
};

/// Which CSV columns hold what.
struct DatasetSpec {
  std::string x = "x";
  std::string y = "y";            // empty for one-dimensional data
  std::string response = "z";     // empty when the file carries no response
  std::vector<std::string> covariates;  // empty: every remaining column
  std::vector<std::string> log_columns;
};

/// Log-transform (where flagged) and standardize columns, returning the record.
/// Throws DataError for non-positive values under a log flag or zero variance.
[[nodiscard]] Standardization fit_standardization(const Eigen::MatrixXd& raw,
                                                  const std::vector<std::string>& names,
                                                  const std::vector<std::string>& log_columns);

/// Applies a stored record column by column.
[[nodiscard]] Eigen::MatrixXd apply_standardization(const Eigen::MatrixXd& raw,
                                                    const std::vector<std::string>& names,
                                                    const Standardization& record);

/// Training data: estimates the standardization and enforces distinct locations.
[[nodiscard]] SpatialDataset make_dataset(const CsvTable& table, const DatasetSpec& spec);

/// Prediction or holdout data: re-applies the stored training record.
[[nodiscard]] SpatialDataset make_dataset(const CsvTable& table, const DatasetSpec& spec,
                                          const Standardization& record);

/// Throws DataError naming the first pair of coincident sites.
void require_distinct_locations(const Eigen::MatrixX2d& locations);

/// Largest distance between any two sites (exact for n <= 4000, else a bound
/// from the bounding box).
[[nodiscard]] double domain_diameter(const Eigen::MatrixX2d& locations);

}  // namespace nscov
