#pragma once

#include <fstream>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "nscov/csv.hpp"

namespace nscov::oracle {

inline const nlohmann::json& oracles() {
  static const nlohmann::json j = [] {
    std::ifstream in(std::string(NSCOV_TEST_DATA) + "/oracles.json");
    return nlohmann::json::parse(in);
  }();
  return j;
}

inline nlohmann::json golden_stationary() {
  std::ifstream in(std::string(NSCOV_TEST_DATA) + "/stationary200_golden.json");
  return nlohmann::json::parse(in);
}

inline Eigen::Matrix2d mat2(const nlohmann::json& j) {
  Eigen::Matrix2d m;
  m << j[0][0].get<double>(), j[0][1].get<double>(), j[1][0].get<double>(), j[1][1].get<double>();
  return m;
}

inline CsvTable table_from(const nlohmann::json& j) {
  CsvTable t;
  t.names = j.at("names").get<std::vector<std::string>>();
  const auto& rows = j.at("rows");
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < t.names.size(); ++k)
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k].get<double>();
  return t;
}

}  // namespace nscov::oracle
