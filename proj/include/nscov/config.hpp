#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nscov/dataset.hpp"
#include "nscov/fit.hpp"
#include "nscov/parameters.hpp"
#include "nscov/selection.hpp"
#include "nscov/synthetic.hpp"

namespace nscov {

/// Sectioned key = value text:
///
///   # comment
///   [design.mean]
///   covariates = elevation, slope
///
/// Keys are unique within a section. Every accessor error names
/// "section.key" and the line.
class ConfigFile {
 public:
  [[nodiscard]] static ConfigFile parse(std::string_view text, const std::string& source = "config");
  [[nodiscard]] static ConfigFile load(const std::filesystem::path& path);

  [[nodiscard]] bool has(const std::string& section, const std::string& key) const;
  [[nodiscard]] bool has_section(const std::string& section) const;
  [[nodiscard]] std::optional<std::string> get(const std::string& section, const std::string& key) const;
  [[nodiscard]] std::string get_string(const std::string& section, const std::string& key,
                                       const std::string& fallback) const;
  [[nodiscard]] double get_double(const std::string& section, const std::string& key, double fallback) const;
  [[nodiscard]] long long get_int(const std::string& section, const std::string& key, long long fallback) const;
  [[nodiscard]] bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  /// Comma-separated; empty value gives an empty list.
  [[nodiscard]] std::vector<std::string> get_list(const std::string& section, const std::string& key) const;
  [[nodiscard]] std::vector<double> get_doubles(const std::string& section, const std::string& key) const;

  void set(const std::string& section, const std::string& key, const std::string& value);
  [[nodiscard]] std::vector<std::string> sections() const;
  [[nodiscard]] std::vector<std::string> keys(const std::string& section) const;

  /// Throws ConfigError for sections or keys outside the schema.
  void check_schema() const;

 private:
  struct Value {
    std::string text;
    int line = 0;
  };
  [[nodiscard]] std::string where(const std::string& section, const std::string& key) const;

  std::string source_;
  std::map<std::string, std::map<std::string, Value>> data_;
};

/// Everything a run needs, resolved from a ConfigFile.
struct RunConfig {
  DatasetSpec data;
  std::string data_file;
  std::string holdout_file;
  std::string sites_file;
  std::string params_file;
  ModelDesign design;
  FitOptions fit;
  TuneGrid grid;
  int score_clusters = 100;
  bool include_nugget = false;
  SimulateSettings simulate;
  std::map<std::string, std::vector<double>> truth;  // component name -> coefficients
  std::uint64_t seed = 1;
};

[[nodiscard]] RunConfig resolve_config(const ConfigFile& cfg);

/// Parses "none", "sqrt8nu" or "unit".
[[nodiscard]] MaternScaling parse_scaling(std::string_view text);
[[nodiscard]] std::string to_string(MaternScaling s);

/// Coefficients from the [truth] section laid out for `design`: each listed
/// component takes intercept (when enabled) then covariates in order;
/// missing components are zero.
[[nodiscard]] ModelParameters truth_parameters(const RunConfig& run, const ParameterLayout& layout);

}  // namespace nscov
