#pragma once

// CSV trajectories and JSON reports. Doubles are printed with 17
// significant digits so that files round-trip exactly.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "stiefelflow/cli/scenarios.hpp"

namespace stiefelflow::cli {

using Json = nlohmann::ordered_json;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(const std::filesystem::path& path, const RunOutput& out) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  for (std::size_t i = 0; i < out.columns.size(); ++i) f << (i ? "," : "") << out.columns[i];
  f << '\n';
  for (const auto& row : out.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << format_double(row[i]);
    f << '\n';
  }
}

inline Json to_json(const DriftReport& d) {
  Json j;
  j["name"] = d.name;
  j["initial"] = d.initial;
  j["max_abs"] = d.max_abs;
  j["max_rel"] = d.max_rel;
  j["t_at_max"] = d.t_at_max;
  return j;
}

inline Json to_json(const Check& c) {
  Json j;
  j["name"] = c.name;
  j["value"] = c.value;
  j["tolerance"] = c.tolerance;
  j["pass"] = c.pass;
  return j;
}

inline Json to_json(const RunCounts& c) {
  Json j;
  j["steps"] = c.steps;
  j["rhs_evaluations"] = c.rhs_evaluations;
  j["rejected_steps"] = c.rejected_steps;
  j["newton_iterations"] = c.newton_iterations;
  j["newton_fallbacks"] = c.newton_fallbacks;
  return j;
}

inline Json checks_json(const std::vector<Check>& checks) {
  Json a = Json::array();
  for (const auto& c : checks) a.push_back(to_json(c));
  return a;
}

inline Json run_report_json(const ScenarioConfig& cfg, const RunOutput& out) {
  Json j;
  j["config"] = to_json(cfg);
  Json d = Json::array();
  for (const auto& r : out.drifts) d.push_back(to_json(r));
  j["drifts"] = d;
  j["checks"] = checks_json(out.checks);
  j["timing"] = to_json(out.counts);
  return j;
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

inline bool all_pass(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

}  // namespace stiefelflow::cli
