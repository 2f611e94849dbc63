#pragma once

// Runner configuration: flat `key = value` text with `#` comments, plus
// KEY=VALUE overrides applied on top.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stiefelflow/integrate.hpp"
#include "stiefelflow/laxspec.hpp"

namespace stiefelflow::cli {

enum class Scenario { sphere, ellipsoid, rigid_body, mclachlan_scovel, general_vp, general_oc, discrete_mv };

inline const std::vector<std::pair<std::string, Scenario>>& scenario_names() {
  static const std::vector<std::pair<std::string, Scenario>> v{
      {"sphere", Scenario::sphere},
      {"ellipsoid", Scenario::ellipsoid},
      {"rigid_body", Scenario::rigid_body},
      {"mclachlan_scovel", Scenario::mclachlan_scovel},
      {"general_vp", Scenario::general_vp},
      {"general_oc", Scenario::general_oc},
      {"discrete_mv", Scenario::discrete_mv},
  };
  return v;
}

inline std::string to_string(Scenario s) {
  for (const auto& [name, v] : scenario_names())
    if (v == s) return name;
  return "?";
}

inline constexpr const char* kOutDirEnv = "STIEFELFLOW_OUT";

struct ScenarioConfig {
  Scenario scenario = Scenario::general_vp;
  int n = 2;
  int N = 4;
  std::optional<std::vector<double>> lambda;  // defaults to 1, 2, ..., N
  double t_end = 1.0;
  double step = 1e-3;
  Method method = Method::rk4;
  bool project = false;
  std::uint64_t seed = 1;
  std::vector<double> lax_params = default_pencil_params();
  std::vector<int> powers = default_powers();
  std::string out_dir = "out";

  std::vector<double> lambda_values() const {
    if (lambda) return *lambda;
    std::vector<double> v;
    for (int i = 1; i <= N; ++i) v.push_back(i);
    return v;
  }

  Metric metric() const {
    const auto v = lambda_values();
    return Metric(Vec(Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()))));
  }

  IntegratorOptions integrator() const {
    IntegratorOptions o;
    o.step = step;
    o.t_end = t_end;
    o.method = method;
    o.project = project;
    return o;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& field, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(field, "expected a real number, got '" + v + "'");
  }
}

inline long long parse_int(const std::string& field, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(field, "expected an integer, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& field, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(field, "expected true or false, got '" + v + "'");
}

}  // namespace detail

/// Applies one key/value pair. Unknown keys are rejected.
inline void apply_setting(ScenarioConfig& c, const std::string& key_in, const std::string& value_in) {
  const std::string key = detail::trim(key_in);
  const std::string value = detail::trim(value_in);
  if (key == "scenario") {
    for (const auto& [name, s] : scenario_names()) {
      if (name == value) {
        c.scenario = s;
        return;
      }
    }
    throw ConfigError("scenario", "unknown scenario '" + value + "'");
  } else if (key == "n") {
    c.n = static_cast<int>(detail::parse_int(key, value));
  } else if (key == "N") {
    c.N = static_cast<int>(detail::parse_int(key, value));
  } else if (key == "lambda") {
    std::vector<double> v;
    for (const auto& s : detail::split(value, ',')) v.push_back(detail::parse_double(key, s));
    c.lambda = v;
  } else if (key == "t_end") {
    c.t_end = detail::parse_double(key, value);
  } else if (key == "step") {
    c.step = detail::parse_double(key, value);
  } else if (key == "method") {
    if (value == "rk4")
      c.method = Method::rk4;
    else if (value == "rkf45")
      c.method = Method::rkf45;
    else
      throw ConfigError("method", "expected rk4 or rkf45, got '" + value + "'");
  } else if (key == "project") {
    c.project = detail::parse_bool(key, value);
  } else if (key == "seed") {
    const long long s = detail::parse_int(key, value);
    if (s < 0) throw ConfigError("seed", "must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "lax_params") {
    std::vector<double> v;
    for (const auto& s : detail::split(value, ',')) v.push_back(detail::parse_double(key, s));
    c.lax_params = v;
  } else if (key == "powers") {
    std::vector<int> v;
    for (const auto& s : detail::split(value, ','))
      v.push_back(static_cast<int>(detail::parse_int(key, s)));
    c.powers = v;
  } else if (key == "out_dir") {
    c.out_dir = value;
  } else {
    throw ConfigError(key, "unknown configuration key");
  }
}

/// "key=value" as given on the command line.
inline void apply_override(ScenarioConfig& c, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw ConfigError(detail::trim(kv), "override must have the form KEY=VALUE");
  apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
}

inline void apply_config_text(ScenarioConfig& c, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line, "line " + std::to_string(lineno) + " is not of the form key = value");
    apply_setting(c, line.substr(0, eq), line.substr(eq + 1));
  }
}

inline void apply_config_file(ScenarioConfig& c, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config", "cannot read '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  apply_config_text(c, ss.str());
}

/// Throws ConfigError naming the first offending field.
inline void validate(const ScenarioConfig& c) {
  if (c.N < 1) throw ConfigError("N", "must be at least 1");
  if (c.n < 1) throw ConfigError("n", "must be at least 1");
  if (c.n > c.N) throw ConfigError("n", "must not exceed N");
  switch (c.scenario) {
    case Scenario::sphere:
    case Scenario::ellipsoid:
      if (c.n != 1) throw ConfigError("n", to_string(c.scenario) + " requires n = 1");
      if (c.N < 2) throw ConfigError("N", to_string(c.scenario) + " requires N >= 2");
      break;
    case Scenario::rigid_body:
    case Scenario::mclachlan_scovel:
      if (c.n != c.N) throw ConfigError("n", to_string(c.scenario) + " requires n = N");
      break;
    default:
      break;
  }
  const auto lam = c.lambda_values();
  if (static_cast<int>(lam.size()) != c.N)
    throw ConfigError("lambda", "expected " + std::to_string(c.N) + " entries, got " + std::to_string(lam.size()));
  for (double v : lam)
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("lambda", "entries must be positive and finite");
  if (!(c.step > 0.0) || !std::isfinite(c.step)) throw ConfigError("step", "must be positive");
  if (!(c.t_end >= c.step) || !std::isfinite(c.t_end)) throw ConfigError("t_end", "must be at least step");
  if (c.lax_params.empty()) throw ConfigError("lax_params", "must not be empty");
  for (double s : c.lax_params)
    if (s == 0.0 && c.scenario == Scenario::ellipsoid)
      throw ConfigError("lax_params", "ellipsoid pencil parameters must be nonzero");
  if (c.powers.size() < 2) throw ConfigError("powers", "need at least two powers");
  for (int k : c.powers)
    if (k < 1) throw ConfigError("powers", "must be positive");
  if (c.out_dir.empty()) throw ConfigError("out_dir", "must not be empty");
}

inline nlohmann::ordered_json to_json(const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  j["scenario"] = to_string(c.scenario);
  j["n"] = c.n;
  j["N"] = c.N;
  j["lambda"] = c.lambda_values();
  j["t_end"] = c.t_end;
  j["step"] = c.step;
  j["method"] = to_string(c.method);
  j["project"] = c.project;
  j["seed"] = c.seed;
  j["lax_params"] = c.lax_params;
  j["powers"] = c.powers;
  return j;
}

}  // namespace stiefelflow::cli
