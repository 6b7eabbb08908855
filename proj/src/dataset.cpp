#include "nscov/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nscov/errors.hpp"

namespace nscov {
namespace {

bool contains(const std::vector<std::string>& v, std::string_view s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::vector<std::string> covariate_columns(const CsvTable& table, const DatasetSpec& spec) {
  if (!spec.covariates.empty()) return spec.covariates;
  std::vector<std::string> out;
  for (const auto& n : table.names) {
    if (n == spec.x || n == spec.y || n == spec.response) continue;
    out.push_back(n);
  }
  return out;
}

SpatialDataset base_dataset(const CsvTable& table, const DatasetSpec& spec,
                            std::vector<std::string>& names, Eigen::MatrixXd& raw) {
  SpatialDataset ds;
  const Eigen::Index n = table.rows();
  ds.dim = spec.y.empty() ? 1 : 2;
  ds.locations = Eigen::MatrixX2d::Zero(n, 2);
  ds.locations.col(0) = table.values.col(table.column(spec.x));
  if (ds.dim == 2) ds.locations.col(1) = table.values.col(table.column(spec.y));
  if (!spec.response.empty() && table.has(spec.response)) {
    ds.response = table.values.col(table.column(spec.response));
  }
  names = covariate_columns(table, spec);
  raw.resize(n, static_cast<Eigen::Index>(names.size()));
  for (std::size_t c = 0; c < names.size(); ++c) {
    raw.col(static_cast<Eigen::Index>(c)) = table.values.col(table.column(names[c]));
  }
  for (Eigen::Index r = 0; r < n; ++r) {
    if (!std::isfinite(ds.locations(r, 0)) || !std::isfinite(ds.locations(r, 1))) {
      throw DataError("row " + std::to_string(r + 2) + ": non-finite location");
    }
    if (ds.response.size() == n && !std::isfinite(ds.response(r))) {
      throw DataError("row " + std::to_string(r + 2) + ", column '" + spec.response +
                      "': non-finite response");
    }
  }
  return ds;
}

}  // namespace

double ColumnTransform::apply(double raw) const {
  double v = raw;
  if (log) {
    if (!(raw > 0.0)) {
      throw DataError("column '" + name + "': value " + std::to_string(raw) +
                      " is not positive but the column is log-transformed");
    }
    v = std::log(raw);
  }
  return (v - mean) / sd;
}

const ColumnTransform& Standardization::find(std::string_view name) const {
  for (const auto& c : columns) {
    if (c.name == name) return c;
  }
  throw DataError("no standardization record for covariate '" + std::string(name) + "'");
}

Eigen::Index SpatialDataset::covariate_index(std::string_view name) const {
  for (std::size_t i = 0; i < covariate_names.size(); ++i) {
    if (covariate_names[i] == name) return static_cast<Eigen::Index>(i);
  }
  throw DataError("unknown covariate '" + std::string(name) + "'");
}

SpatialDataset SpatialDataset::subset(const std::vector<Eigen::Index>& rows) const {
  SpatialDataset out;
  out.dim = dim;
  out.covariate_names = covariate_names;
  out.standardization = standardization;
  const auto m = static_cast<Eigen::Index>(rows.size());
  out.locations.resize(m, 2);
  out.covariates.resize(m, covariates.cols());
  if (has_response()) out.response.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index r = rows[static_cast<std::size_t>(k)];
    out.locations.row(k) = locations.row(r);
    out.covariates.row(k) = covariates.row(r);
    if (has_response()) out.response(k) = response(r);
  }
  return out;
}

Standardization fit_standardization(const Eigen::MatrixXd& raw,
                                    const std::vector<std::string>& names,
                                    const std::vector<std::string>& log_columns) {
  for (const auto& l : log_columns) {
    if (!contains(names, l)) throw DataError("log-transformed column '" + l + "' is not a covariate");
  }
  Standardization rec;
  const Eigen::Index n = raw.rows();
  if (n < 2) throw DataError("standardization needs at least two rows");
  for (std::size_t c = 0; c < names.size(); ++c) {
    ColumnTransform t;
    t.name = names[c];
    t.log = contains(log_columns, names[c]);
    Eigen::VectorXd col = raw.col(static_cast<Eigen::Index>(c));
    for (Eigen::Index r = 0; r < n; ++r) {
      if (!std::isfinite(col(r))) {
        throw DataError("row " + std::to_string(r + 2) + ", column '" + t.name + "': missing value");
      }
      if (t.log) {
        if (!(col(r) > 0.0)) {
          throw DataError("row " + std::to_string(r + 2) + ", column '" + t.name +
                          "': non-positive value under log transform");
        }
        col(r) = std::log(col(r));
      }
    }
    t.mean = col.mean();
    const double ss = (col.array() - t.mean).square().sum();
    t.sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(t.sd > 1e-12 * std::max(1.0, std::abs(t.mean)))) {
      throw DataError("column '" + t.name + "' has zero variance");
    }
    rec.columns.push_back(t);
  }
  return rec;
}

Eigen::MatrixXd apply_standardization(const Eigen::MatrixXd& raw,
                                      const std::vector<std::string>& names,
                                      const Standardization& record) {
  Eigen::MatrixXd out(raw.rows(), raw.cols());
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto& t = record.find(names[c]);
    for (Eigen::Index r = 0; r < raw.rows(); ++r) {
      try {
        out(r, static_cast<Eigen::Index>(c)) = t.apply(raw(r, static_cast<Eigen::Index>(c)));
      } catch (const DataError& e) {
        throw DataError("row " + std::to_string(r + 2) + ": " + e.what());
      }
    }
  }
  return out;
}

SpatialDataset make_dataset(const CsvTable& table, const DatasetSpec& spec) {
  std::vector<std::string> names;
  Eigen::MatrixXd raw;
  SpatialDataset ds = base_dataset(table, spec, names, raw);
  if (!spec.response.empty() && !ds.has_response()) {
    throw DataError("missing response column '" + spec.response + "'");
  }
  require_distinct_locations(ds.locations);
  ds.standardization = fit_standardization(raw, names, spec.log_columns);
  ds.covariates = apply_standardization(raw, names, ds.standardization);
  ds.covariate_names = std::move(names);
  return ds;
}

SpatialDataset make_dataset(const CsvTable& table, const DatasetSpec& spec,
                            const Standardization& record) {
  std::vector<std::string> names;
  Eigen::MatrixXd raw;
  DatasetSpec s = spec;
  if (s.covariates.empty()) {
    for (const auto& c : record.columns) s.covariates.push_back(c.name);
  }
  SpatialDataset ds = base_dataset(table, s, names, raw);
  ds.standardization = record;
  ds.covariates = apply_standardization(raw, names, record);
  ds.covariate_names = std::move(names);
  return ds;
}

void require_distinct_locations(const Eigen::MatrixX2d& locations) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(locations.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (locations(a, 0) != locations(b, 0)) return locations(a, 0) < locations(b, 0);
    if (locations(a, 1) != locations(b, 1)) return locations(a, 1) < locations(b, 1);
    return a < b;
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto a = order[k - 1];
    const auto b = order[k];
    if (locations(a, 0) == locations(b, 0) && locations(a, 1) == locations(b, 1)) {
      throw DataError("duplicate location at rows " + std::to_string(a + 2) + " and " +
                      std::to_string(b + 2));
    }
  }
}

double domain_diameter(const Eigen::MatrixX2d& locations) {
  const Eigen::Index n = locations.rows();
  if (n > 4000) {
    const Eigen::Vector2d span = locations.colwise().maxCoeff() - locations.colwise().minCoeff();
    return span.norm();
  }
  double best = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      best = std::max(best, (locations.row(i) - locations.row(j)).squaredNorm());
    }
  }
  return std::sqrt(best);
}

}  // namespace nscov
