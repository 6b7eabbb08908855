#include "nscov/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "nscov/errors.hpp"

namespace nscov {
namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::set<std::string> component{"intercept", "covariates"};
  static const std::map<std::string, std::set<std::string>> s = {
      {"data", {"file", "x", "y", "response", "covariates", "log", "holdout", "sites", "params"}},
      {"design", {"nugget", "reparameterize", "scaling"}},
      {"design.mean", component},
      {"design.std_dev", component},
      {"design.scale", component},
      {"design.aniso", component},
      {"design.tilt", component},
      {"design.smooth", {"intercept", "covariates", "nu_min", "nu_max"}},
      {"taper", {"family", "delta"}},
      {"penalties", {"lambda_r", "lambda_mu", "lambda_sigma", "kappa", "epsilon"}},
      {"optimizer",
       {"max_iterations", "gradient_tolerance", "objective_tolerance", "standard_errors", "jitter"}},
      {"tune", {"lambda_r", "lambda_mu", "lambda_sigma", "holdout_fraction"}},
      {"score", {"clusters", "include_nugget"}},
      {"simulate", {"n", "holdout", "covariates", "dim", "random_share", "stripes", "clusters"}},
      {"truth", {"mean", "std_dev", "scale", "aniso", "tilt", "smooth", "nugget"}},
      {"run", {"seed"}},
  };
  return s;
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text, const std::string& source) {
  ConfigFile cfg;
  cfg.source_ = source;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find_first_of("#;");
    if (hash != std::string::npos) s.erase(hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(source + ":" + std::to_string(line) + ": malformed section header");
      section = lower(trim(std::string_view(s).substr(1, s.size() - 2)));
      if (section.empty()) throw ConfigError(source + ":" + std::to_string(line) + ": empty section name");
      cfg.data_[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(source + ":" + std::to_string(line) + ": expected key = value");
    if (section.empty()) throw ConfigError(source + ":" + std::to_string(line) + ": key outside of any section");
    const std::string key = lower(trim(std::string_view(s).substr(0, eq)));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(line) + ": empty key");
    auto& sec = cfg.data_[section];
    if (sec.count(key)) {
      throw ConfigError(source + ":" + std::to_string(line) + ": duplicate key " + section + "." + key);
    }
    sec[key] = {trim(std::string_view(s).substr(eq + 1)), line};
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

bool ConfigFile::has(const std::string& section, const std::string& key) const { return get(section, key).has_value(); }

bool ConfigFile::has_section(const std::string& section) const { return data_.count(section) > 0; }

std::optional<std::string> ConfigFile::get(const std::string& section, const std::string& key) const {
  const auto s = data_.find(section);
  if (s == data_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second.text;
}

std::string ConfigFile::where(const std::string& section, const std::string& key) const {
  std::string w = source_ + ": " + section + "." + key;
  const auto s = data_.find(section);
  if (s != data_.end()) {
    const auto k = s->second.find(key);
    if (k != s->second.end() && k->second.line > 0) w += " (line " + std::to_string(k->second.line) + ")";
  }
  return w;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  return get(section, key).value_or(fallback);
}

double ConfigFile::get_double(const std::string& section, const std::string& key, double fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  const std::string t = lower(*v);
  if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
  if (res.ec != std::errc() || res.ptr != v->data() + v->size()) {
    throw ConfigError(where(section, key) + ": '" + *v + "' is not a number");
  }
  return out;
}

long long ConfigFile::get_int(const std::string& section, const std::string& key, long long fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  long long out = 0;
  const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
  if (res.ec != std::errc() || res.ptr != v->data() + v->size()) {
    throw ConfigError(where(section, key) + ": '" + *v + "' is not an integer");
  }
  return out;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  const std::string t = lower(*v);
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw ConfigError(where(section, key) + ": '" + *v + "' is not a boolean");
}

std::vector<std::string> ConfigFile::get_list(const std::string& section, const std::string& key) const {
  std::vector<std::string> out;
  const auto v = get(section, key);
  if (!v) return out;
  std::string item;
  std::istringstream in(*v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> ConfigFile::get_doubles(const std::string& section, const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : get_list(section, key)) {
    double d = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), d);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ConfigError(where(section, key) + ": '" + s + "' is not a number");
    }
    out.push_back(d);
  }
  return out;
}

void ConfigFile::set(const std::string& section, const std::string& key, const std::string& value) {
  data_[section][key] = {value, 0};
}

std::vector<std::string> ConfigFile::sections() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : data_) out.push_back(k);
  return out;
}

std::vector<std::string> ConfigFile::keys(const std::string& section) const {
  std::vector<std::string> out;
  const auto s = data_.find(section);
  if (s != data_.end())
    for (const auto& [k, v] : s->second) out.push_back(k);
  return out;
}

void ConfigFile::check_schema() const {
  for (const auto& [section, keys] : data_) {
    const auto s = schema().find(section);
    if (s == schema().end()) throw ConfigError(source_ + ": unknown section [" + section + "]");
    for (const auto& [key, value] : keys) {
      if (!s->second.count(key)) throw ConfigError(where(section, key) + ": unknown key");
    }
  }
}

MaternScaling parse_scaling(std::string_view text) {
  const std::string t = lower(std::string(text));
  if (t == "sqrt8nu" || t.empty()) return MaternScaling::Sqrt8Nu;
  if (t == "unit") return MaternScaling::Unit;
  throw ConfigError("design.scaling: expected sqrt8nu or unit, got '" + std::string(text) + "'");
}

std::string to_string(MaternScaling s) { return s == MaternScaling::Unit ? "unit" : "sqrt8nu"; }

RunConfig resolve_config(const ConfigFile& cfg) {
  cfg.check_schema();
  RunConfig run;
  run.data.x = cfg.get_string("data", "x", "x");
  run.data.y = cfg.get_string("data", "y", "y");
  run.data.response = cfg.get_string("data", "response", "z");
  run.data.covariates = cfg.get_list("data", "covariates");
  run.data.log_columns = cfg.get_list("data", "log");
  run.data_file = cfg.get_string("data", "file", "");
  run.holdout_file = cfg.get_string("data", "holdout", "");
  run.sites_file = cfg.get_string("data", "sites", "");
  run.params_file = cfg.get_string("data", "params", "");

  ModelDesign& d = run.design;
  d.nugget = cfg.get_bool("design", "nugget", false);
  d.reparameterize = cfg.get_bool("design", "reparameterize", false);
  d.scaling = parse_scaling(cfg.get_string("design", "scaling", "sqrt8nu"));
  for (Component c : kRegressionComponentList) {
    const std::string sec = "design." + std::string(component_name(c));
    auto& comp = d[c];
    comp.intercept = cfg.get_bool(sec, "intercept", comp.intercept);
    comp.covariates = cfg.get_list(sec, "covariates");
  }
  d.smoothness.nu_min = cfg.get_double("design.smooth", "nu_min", d.smoothness.nu_min);
  d.smoothness.nu_max = cfg.get_double("design.smooth", "nu_max", d.smoothness.nu_max);
  try {
    d.taper.family = parse_taper_family(cfg.get_string("taper", "family", "none"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("taper.family: ") + e.what());
  }
  d.taper.delta = cfg.get_double("taper", "delta", d.taper.delta);
  auto& p = d.penalties;
  p.lambda_r = cfg.get_double("penalties", "lambda_r", p.lambda_r);
  p.lambda_mu = cfg.get_double("penalties", "lambda_mu", p.lambda_mu);
  p.lambda_sigma = cfg.get_double("penalties", "lambda_sigma", p.lambda_sigma);
  p.kappa = cfg.get_double("penalties", "kappa", p.kappa);
  p.epsilon = cfg.get_double("penalties", "epsilon", p.epsilon);
  p.validate();
  try {
    d.smoothness.validate();
    d.taper.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  auto& f = run.fit;
  f.max_iterations = static_cast<int>(cfg.get_int("optimizer", "max_iterations", f.max_iterations));
  f.gradient_tolerance = cfg.get_double("optimizer", "gradient_tolerance", f.gradient_tolerance);
  f.objective_tolerance = cfg.get_double("optimizer", "objective_tolerance", f.objective_tolerance);
  f.standard_errors = cfg.get_bool("optimizer", "standard_errors", true);
  f.allow_jitter = cfg.get_bool("optimizer", "jitter", f.allow_jitter);
  if (f.max_iterations < 0) throw ConfigError("optimizer.max_iterations must be non-negative");
  if (!(f.gradient_tolerance > 0.0) || !(f.objective_tolerance > 0.0)) {
    throw ConfigError("optimizer: tolerances must be positive");
  }

  if (cfg.has("tune", "lambda_r")) run.grid.lambda_r = cfg.get_doubles("tune", "lambda_r");
  if (cfg.has("tune", "lambda_mu")) run.grid.lambda_mu = cfg.get_doubles("tune", "lambda_mu");
  if (cfg.has("tune", "lambda_sigma")) run.grid.lambda_sigma = cfg.get_doubles("tune", "lambda_sigma");
  run.grid.holdout_fraction = cfg.get_double("tune", "holdout_fraction", run.grid.holdout_fraction);
  run.grid.validate();

  run.score_clusters = static_cast<int>(cfg.get_int("score", "clusters", run.score_clusters));
  run.include_nugget = cfg.get_bool("score", "include_nugget", true);
  if (run.score_clusters < 1) throw ConfigError("score.clusters must be positive");

  auto& s = run.simulate;
  s.n = cfg.get_int("simulate", "n", s.n);
  s.holdout = cfg.get_int("simulate", "holdout", s.holdout);
  s.covariates = static_cast<int>(cfg.get_int("simulate", "covariates", s.covariates));
  s.dim = static_cast<int>(cfg.get_int("simulate", "dim", s.dim));
  s.holdout_random_share = cfg.get_double("simulate", "random_share", s.holdout_random_share);
  s.stripes = static_cast<int>(cfg.get_int("simulate", "stripes", s.stripes));
  s.clusters = static_cast<int>(cfg.get_int("simulate", "clusters", s.clusters));
  if (s.n < 2 || s.holdout < 0 || s.covariates < 0 || (s.dim != 1 && s.dim != 2)) {
    throw ConfigError("simulate: need n >= 2, holdout >= 0, covariates >= 0 and dim 1 or 2");
  }
  for (const auto& key : cfg.keys("truth")) run.truth[key] = cfg.get_doubles("truth", key);

  const long long seed = cfg.get_int("run", "seed", 1);
  if (seed < 0) throw ConfigError("run.seed must be non-negative");
  run.seed = static_cast<std::uint64_t>(seed);
  d.seed = run.seed;
  return run;
}

ModelParameters truth_parameters(const RunConfig& run, const ParameterLayout& layout) {
  ModelParameters p;
  for (Component c : kRegressionComponentList) {
    const auto n = static_cast<Eigen::Index>(layout.count(c));
    p[c] = Eigen::VectorXd::Zero(n);
    const auto it = run.truth.find(std::string(component_name(c)));
    if (it == run.truth.end()) continue;
    if (static_cast<Eigen::Index>(it->second.size()) != n) {
      throw ConfigError("truth." + std::string(component_name(c)) + ": expected " + std::to_string(n) +
                        " values (intercept then covariates), got " + std::to_string(it->second.size()));
    }
    for (Eigen::Index i = 0; i < n; ++i) p[c](i) = it->second[static_cast<std::size_t>(i)];
  }
  if (layout.count(Component::Nugget) == 1) {
    const auto it = run.truth.find("nugget");
    if (it == run.truth.end() || it->second.size() != 1) {
      throw ConfigError("truth.nugget: one log-variance value is required when the nugget is enabled");
    }
    p.log_nugget = it->second[0];
  }
  return p;
}

}  // namespace nscov
