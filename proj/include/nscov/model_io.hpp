#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "nscov/dataset.hpp"
#include "nscov/fit.hpp"
#include "nscov/parameters.hpp"

namespace nscov {

/// Everything needed to rebuild a fitted model from its training CSV.
struct ParameterFile {
  DatasetSpec data;
  ModelDesign design;
  Standardization standardization;
  ModelParameters params;
};

[[nodiscard]] nlohmann::json to_json(const ModelDesign& design);
[[nodiscard]] ModelDesign design_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const Standardization& s);
[[nodiscard]] Standardization standardization_from_json(const nlohmann::json& j);

/// Natural-coordinate coefficients labelled by component and covariate.
[[nodiscard]] nlohmann::json to_json(const ModelParameters& p, const ParameterLayout& layout);
[[nodiscard]] ModelParameters parameters_from_json(const nlohmann::json& j, const ParameterLayout& layout);

[[nodiscard]] nlohmann::json to_json(const ParameterFile& f);
[[nodiscard]] ParameterFile parameter_file_from_json(const nlohmann::json& j);

/// Throws ConfigError on malformed content.
void write_parameter_file(const std::filesystem::path& path, const ParameterFile& f);
[[nodiscard]] ParameterFile read_parameter_file(const std::filesystem::path& path);

/// Estimates, standard errors, likelihoods, optimizer summary, condition
/// estimate and active set.
[[nodiscard]] nlohmann::json fit_report(const Model& model, const FitResult& fit, double condition);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
[[nodiscard]] nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace nscov
