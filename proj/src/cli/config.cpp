#include "hnm/cli.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hnm::cli {

using nlohmann::json;

namespace {

double number(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string("key '") + key + "' must be a number");
  return v.get<double>();
}

FormFactor shorthand(const std::string& name, double delay) {
  if (name == "one-point") return FormFactor::one_point();
  if (name == "two-point") return FormFactor::two_point(delay);
  if (name.rfind("comb:", 0) == 0) {
    int n = 0;
    try {
      n = std::stoi(name.substr(5));
    } catch (const std::exception&) {
      n = 0;
    }
    if (n < 1) throw ConfigError("bad comb size in '" + name + "'");
    return FormFactor::uniform_comb(static_cast<std::size_t>(n), delay);
  }
  throw ConfigError("unknown form factor '" + name + "' (one-point, two-point, comb:N or a list)");
}

std::vector<CouplingPoint> explicit_points(const json& list) {
  std::vector<CouplingPoint> pts;
  for (const auto& e : list) {
    if (!e.is_array() || e.size() < 2 || e.size() > 3) throw ConfigError("form_factor entries must be [x, re_c, im_c]");
    for (const auto& v : e)
      if (!v.is_number()) throw ConfigError("form_factor entries must be numeric");
    pts.push_back({e[0].get<double>(), cplx{e[1].get<double>(), e.size() == 3 ? e[2].get<double>() : 0.0}});
  }
  return pts;
}

} // namespace

RunConfig resolve_config(const std::optional<std::string>& json_text, const Overrides& ov) {
  json j = json::object();
  if (json_text) {
    try {
      j = json::parse(*json_text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("malformed config: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
  }
  static const char* known[] = {"gamma", "omega0", "epsilon0", "T", "form_factor", "dt", "emax", "t_max", "dx", "jobs"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(std::begin(known), std::end(known), it.key()) == std::end(known))
      throw ConfigError("unknown config key '" + it.key() + "'");

  RunConfig cfg;
  double gamma = 1.0, omega0 = 1.0, delay = 2.0;
  std::optional<double> eps0;
  try {
    if (j.contains("gamma")) gamma = number(j, "gamma");
    if (j.contains("omega0")) omega0 = number(j, "omega0");
    if (j.contains("epsilon0")) eps0 = number(j, "epsilon0");
    if (j.contains("T")) delay = number(j, "T");
    if (j.contains("dt")) cfg.dt = number(j, "dt");
    if (j.contains("t_max")) cfg.t_max = number(j, "t_max");
    if (j.contains("dx")) cfg.dx = number(j, "dx");
    if (j.contains("emax")) {
      if (!j["emax"].is_number_integer()) throw ConfigError("key 'emax' must be an integer");
      cfg.e_max = j["emax"].get<int>();
    }
    if (j.contains("jobs")) {
      if (!j["jobs"].is_number_integer()) throw ConfigError("key 'jobs' must be an integer");
      cfg.jobs = j["jobs"].get<int>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  const bool dt_given = j.contains("dt") || ov.dt;
  const bool tmax_given = j.contains("t_max") || ov.t_max;
  const bool dx_given = j.contains("dx") || ov.dx;

  if (ov.gamma) gamma = *ov.gamma;
  if (ov.omega0) omega0 = *ov.omega0;
  if (ov.epsilon0) eps0 = *ov.epsilon0;
  if (ov.delay) delay = *ov.delay;
  if (ov.dt) cfg.dt = *ov.dt;
  if (ov.t_max) cfg.t_max = *ov.t_max;
  if (ov.dx) cfg.dx = *ov.dx;
  if (ov.e_max) cfg.e_max = *ov.e_max;
  if (ov.jobs) cfg.jobs = *ov.jobs;
  if (ov.out) cfg.out = *ov.out;
  cfg.timestamp = !ov.no_timestamp;

  try {
    cfg.params = ModelParams::make(gamma, omega0, delay, eps0);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!dt_given) cfg.dt = delay / 200.0;
  if (!tmax_given) cfg.t_max = 4.0 * delay;
  if (!dx_given) cfg.dx = delay / 200.0;
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ConfigError("dt must be positive");
  if (!(cfg.dx > 0.0) || !std::isfinite(cfg.dx)) throw ConfigError("dx must be positive");
  if (!(cfg.t_max >= 0.0) || !std::isfinite(cfg.t_max)) throw ConfigError("t_max must be non-negative");
  if (cfg.e_max < 1) throw CutoffError("emax must be at least 1");
  if (cfg.jobs < 1) throw ConfigError("jobs must be at least 1");

  if (ov.form_factor) {
    cfg.form_factor_source = *ov.form_factor;
    cfg.form_factor = shorthand(*ov.form_factor, delay);
  } else if (j.contains("form_factor")) {
    const auto& ff = j["form_factor"];
    if (ff.is_string()) {
      cfg.form_factor_source = ff.get<std::string>();
      cfg.form_factor = shorthand(cfg.form_factor_source, delay);
    } else if (ff.is_array()) {
      cfg.form_factor_source = "explicit";
      cfg.form_factor = FormFactor(explicit_points(ff));
    } else {
      throw ConfigError("form_factor must be a name or a list of [x, re_c, im_c]");
    }
  } else {
    cfg.form_factor = FormFactor::two_point(delay);
  }
  cfg.form_factor = validate_form_factor(cfg.form_factor, cfg.params);
  return cfg;
}

RunConfig load_config(const std::optional<std::string>& path, const Overrides& overrides) {
  if (!path) return resolve_config(std::nullopt, overrides);
  std::ifstream in(*path);
  if (!in) throw ConfigError("cannot read config file '" + *path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return resolve_config(ss.str(), overrides);
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->category()) {
    case ErrorCategory::Config: return 2;
    case ErrorCategory::Precondition: return 3;
    case ErrorCategory::Resource: return 4;
    }
  }
  return 1;
}

} // namespace hnm::cli
