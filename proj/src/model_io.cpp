#include "nscov/model_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "nscov/config.hpp"
#include "nscov/errors.hpp"

namespace nscov {

using nlohmann::json;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_inf(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

json to_json(const ModelDesign& d) {
  json comps = json::object();
  for (Component c : kRegressionComponentList) {
    comps[std::string(component_name(c))] = {{"intercept", d[c].intercept}, {"covariates", d[c].covariates}};
  }
  return {
      {"components", comps},
      {"smoothness", {{"nu_min", d.smoothness.nu_min}, {"nu_max", d.smoothness.nu_max}}},
      {"taper", {{"family", to_string(d.taper.family)}, {"delta", finite_or_null(d.taper.delta)}}},
      {"penalties",
       {{"lambda_r", d.penalties.lambda_r},
        {"lambda_mu", d.penalties.lambda_mu},
        {"lambda_sigma", d.penalties.lambda_sigma},
        {"kappa", d.penalties.kappa},
        {"epsilon", d.penalties.epsilon}}},
      {"nugget", d.nugget},
      {"reparameterize", d.reparameterize},
      {"scaling", to_string(d.scaling)},
      {"seed", d.seed},
  };
}

ModelDesign design_from_json(const json& j) {
  return guarded("design", [&] {
    ModelDesign d;
    for (Component c : kRegressionComponentList) {
      const auto& cj = j.at("components").at(std::string(component_name(c)));
      d[c].intercept = cj.at("intercept").get<bool>();
      d[c].covariates = cj.at("covariates").get<std::vector<std::string>>();
    }
    d.smoothness.nu_min = j.at("smoothness").at("nu_min").get<double>();
    d.smoothness.nu_max = j.at("smoothness").at("nu_max").get<double>();
    d.taper.family = parse_taper_family(j.at("taper").at("family").get<std::string>());
    d.taper.delta = number_or_inf(j.at("taper").at("delta"));
    const auto& pj = j.at("penalties");
    d.penalties.lambda_r = pj.at("lambda_r").get<double>();
    d.penalties.lambda_mu = pj.at("lambda_mu").get<double>();
    d.penalties.lambda_sigma = pj.at("lambda_sigma").get<double>();
    d.penalties.kappa = pj.at("kappa").get<double>();
    d.penalties.epsilon = pj.at("epsilon").get<double>();
    d.nugget = j.at("nugget").get<bool>();
    d.reparameterize = j.at("reparameterize").get<bool>();
    d.scaling = parse_scaling(j.at("scaling").get<std::string>());
    d.seed = j.value("seed", std::uint64_t{0});
    d.smoothness.validate();
    d.taper.validate();
    d.penalties.validate();
    return d;
  });
}

json to_json(const Standardization& s) {
  json out = json::array();
  for (const auto& c : s.columns) {
    out.push_back({{"name", c.name}, {"log", c.log}, {"mean", c.mean}, {"sd", c.sd}});
  }
  return out;
}

Standardization standardization_from_json(const json& j) {
  return guarded("standardization", [&] {
    Standardization s;
    for (const auto& cj : j) {
      ColumnTransform c;
      c.name = cj.at("name").get<std::string>();
      c.log = cj.at("log").get<bool>();
      c.mean = cj.at("mean").get<double>();
      c.sd = cj.at("sd").get<double>();
      s.columns.push_back(c);
    }
    return s;
  });
}

json to_json(const ModelParameters& p, const ParameterLayout& layout) {
  json coef = json::array();
  for (const auto& e : layout.entries()) {
    if (e.component == Component::Nugget) continue;
    const auto& block = p[e.component];
    const std::size_t k = *layout.find(e.component, e.covariate) - layout.offset(e.component);
    coef.push_back({{"component", std::string(component_name(e.component))},
                    {"covariate", e.covariate},
                    {"value", block(static_cast<Eigen::Index>(k))}});
  }
  return {{"coefficients", coef}, {"log_nugget", p.log_nugget ? json(*p.log_nugget) : json(nullptr)}};
}

ModelParameters parameters_from_json(const json& j, const ParameterLayout& layout) {
  return guarded("parameters", [&] {
    ModelParameters p;
    for (Component c : kRegressionComponentList) {
      p[c] = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(layout.count(c)),
                                       std::numeric_limits<double>::quiet_NaN());
    }
    for (const auto& cj : j.at("coefficients")) {
      const Component c = parse_component(cj.at("component").get<std::string>());
      const auto name = cj.at("covariate").get<std::string>();
      const auto slot = layout.find(c, name);
      if (!slot || c == Component::Nugget) {
        throw ConfigError("parameters: coefficient " + std::string(component_name(c)) + "/" + name +
                          " is not part of the design");
      }
      p[c](static_cast<Eigen::Index>(*slot - layout.offset(c))) = cj.at("value").get<double>();
    }
    for (Component c : kRegressionComponentList) {
      if (!p[c].allFinite()) {
        throw ConfigError("parameters: missing or non-finite coefficient in " + std::string(component_name(c)));
      }
    }
    const auto& nj = j.at("log_nugget");
    if (layout.count(Component::Nugget) == 1) {
      if (nj.is_null()) throw ConfigError("parameters: design has a nugget but log_nugget is null");
      p.log_nugget = nj.get<double>();
    } else if (!nj.is_null()) {
      throw ConfigError("parameters: log_nugget given for a design without nugget");
    }
    return p;
  });
}

json to_json(const ParameterFile& f) {
  const ParameterLayout layout(f.design);
  json j = {
      {"format", "nscov-parameters"},
      {"version", 1},
      {"data",
       {{"x", f.data.x},
        {"y", f.data.y},
        {"response", f.data.response},
        {"covariates", f.data.covariates},
        {"log", f.data.log_columns}}},
      {"design", to_json(f.design)},
      {"standardization", to_json(f.standardization)},
      {"parameters", to_json(f.params, layout)},
  };
  return j;
}

ParameterFile parameter_file_from_json(const json& j) {
  return guarded("parameter file", [&] {
    if (j.value("format", std::string()) != "nscov-parameters") {
      throw ConfigError("parameter file: format tag missing or wrong");
    }
    if (j.at("version").get<int>() != 1) throw ConfigError("parameter file: unsupported version");
    ParameterFile f;
    const auto& dj = j.at("data");
    f.data.x = dj.at("x").get<std::string>();
    f.data.y = dj.at("y").get<std::string>();
    f.data.response = dj.at("response").get<std::string>();
    f.data.covariates = dj.at("covariates").get<std::vector<std::string>>();
    f.data.log_columns = dj.at("log").get<std::vector<std::string>>();
    f.design = design_from_json(j.at("design"));
    f.standardization = standardization_from_json(j.at("standardization"));
    f.params = parameters_from_json(j.at("parameters"), ParameterLayout(f.design));
    return f;
  });
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("write failed for " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_parameter_file(const std::filesystem::path& path, const ParameterFile& f) { write_json(path, to_json(f)); }

ParameterFile read_parameter_file(const std::filesystem::path& path) {
  return parameter_file_from_json(read_json(path));
}

json fit_report(const Model& model, const FitResult& fit, double condition) {
  const auto& layout = model.layout();
  json est = json::array();
  const ParameterLayout& l = layout;
  for (std::size_t i = 0; i < l.size(); ++i) {
    const auto& e = l.entry(i);
    const auto idx = static_cast<Eigen::Index>(i);
    double natural = 0.0;
    if (e.component == Component::Nugget) {
      natural = *fit.params.log_nugget;
    } else {
      natural = fit.params[e.component](static_cast<Eigen::Index>(i - l.offset(e.component)));
    }
    json row = {{"label", l.label(i)},
                {"component", std::string(component_name(e.component))},
                {"covariate", e.covariate},
                {"estimate", natural},
                {"stored", fit.stored(idx)},
                {"active", fit.active.empty() ? true : static_cast<bool>(fit.active[i])}};
    row["se"] = fit.standard_errors ? finite_or_null((*fit.standard_errors)(idx)) : json(nullptr);
    est.push_back(row);
  }
  const auto& o = fit.optim;
  return {
      {"n", model.n()},
      {"parameters", l.size()},
      {"estimates", est},
      {"loglik", fit.loglik},
      {"penalized_loglik", fit.penalized},
      {"objective", fit.objective},
      {"condition_estimate", finite_or_null(condition)},
      {"jitter_used", fit.jitter_used},
      {"diagnostic", fit.diagnostic},
      {"optimizer",
       {{"iterations", o.iterations},
        {"evaluations", o.evaluations},
        {"converged", o.converged},
        {"message", o.message},
        {"hessian_note", o.hessian_note},
        {"wall_seconds", o.wall_seconds}}},
      {"sparse", model.sparse()},
      {"factor_nnz", model.sparse() ? json(model.pattern()->factor_nnz()) : json(nullptr)},
  };
}

}  // namespace nscov
