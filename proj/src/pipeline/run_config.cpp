#include "stairloc/pipeline/run_config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stairloc/error.hpp"

namespace stairloc::pipeline {

using Json = nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

Json key_values(std::string_view text) {
  Json out = Json::object();
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find_first_of("=:");
    if (eq == std::string::npos) throw Error(ErrorCode::SpecError, "line " + std::to_string(n) + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    Json v = Json::parse(value, nullptr, false);
    out[key] = v.is_discarded() ? Json(value) : v;
  }
  return out;
}

double num(const Json& v, const std::string& key) {
  if (!v.is_number()) throw Error(ErrorCode::SpecError, "'" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t count(const Json& v, const std::string& key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw Error(ErrorCode::SpecError, "'" + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string str(const Json& v, const std::string& key) {
  if (!v.is_string()) throw Error(ErrorCode::SpecError, "'" + key + "' must be a string");
  return v.get<std::string>();
}

void apply_settings(const Json& doc, RunConfig& c) {
  if (!doc.is_object()) throw Error(ErrorCode::SpecError, "run config must be an object");
  for (const auto& [key, v] : doc.items()) {
    if (key == "camera_height") {
      c.extrinsics.camera_in_base = {0.0, -num(v, key), 0.0};
    } else if (key == "gravity") {
      if (!v.is_array() || v.size() != 3) throw Error(ErrorCode::SpecError, "'gravity' must be [x, y, z]");
      c.extrinsics.gravity = {num(v[0], key), num(v[1], key), num(v[2], key)};
      c.registry.gravity = c.extrinsics.gravity;
    } else if (key == "epsilon") {
      c.extrinsics.epsilon = num(v, key);
    } else if (key == "slope_tol") {
      c.params.slope.tol = num(v, key);
    } else if (key == "slope_min_inlier_frac") {
      c.params.slope.min_inlier_frac = num(v, key);
    } else if (key == "slope_max_iterations") {
      c.params.slope.max_iterations = count(v, key);
    } else if (key == "min_segment_length") {
      c.params.min_segment_length = num(v, key);
    } else if (key == "min_points") {
      c.params.min_points = count(v, key);
    } else if (key == "ground_mode") {
      const std::string m = str(v, key);
      if (m == "whole_lines") c.params.ground_mode = GroundOutlierMode::WholeLines;
      else if (m == "points") c.params.ground_mode = GroundOutlierMode::Points;
      else throw Error(ErrorCode::SpecError, "'ground_mode' must be whole_lines or points");
    } else if (key == "ground_inlier_tol") {
      c.params.ground_inlier_tol = num(v, key);
    } else if (key == "ground_residual_tol") {
      c.params.ground_residual_tol = num(v, key);
    } else if (key == "ground_tol") {
      c.params.ground.tol = num(v, key);
    } else if (key == "ground_min_inlier_frac") {
      c.params.ground.min_inlier_frac = num(v, key);
    } else if (key == "x_axis") {
      const std::string a = str(v, key);
      if (a == "right") c.params.x_axis = XAxis::Right;
      else if (a == "left") c.params.x_axis = XAxis::Left;
      else throw Error(ErrorCode::SpecError, "'x_axis' must be right or left");
    } else if (key == "registry_window") {
      c.registry.window = count(v, key);
    } else if (key == "registry_sigma_pos") {
      c.registry.sigma_pos = num(v, key);
    } else if (key == "registry_sigma_theta") {
      c.registry.sigma_theta = num(v, key);
    } else if (key == "registry_radius") {
      c.registry.rejection_radius = num(v, key);
    } else if (key == "registry_staleness") {
      c.registry.staleness = num(v, key);
    } else if (key == "frame_period") {
      c.frame_period = num(v, key);
    } else if (key == "seed") {
      c.seed = count(v, key);
    } else {
      throw Error(ErrorCode::SpecError, "unknown run config key '" + key + "'");
    }
  }
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  RunConfig cfg;
  const std::string t = trim(text);
  apply_settings(!t.empty() && t.front() == '{' ? Json::parse(t, nullptr, false) : key_values(text), cfg);
  validate(cfg);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

void validate(const RunConfig& cfg) {
  try {
    cfg.extrinsics.validate();
    cfg.registry.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::SpecError, e.what());
  }
  const auto& p = cfg.params;
  if (!(p.slope.tol > 0.0) || !(p.slope.min_inlier_frac > 0.0 && p.slope.min_inlier_frac <= 1.0))
    throw Error(ErrorCode::SpecError, "slope consensus needs tol > 0 and min_inlier_frac in (0, 1]");
  if (!(p.ground.tol > 0.0) || !(p.ground.min_inlier_frac >= 0.0 && p.ground.min_inlier_frac <= 1.0))
    throw Error(ErrorCode::SpecError, "ground consensus needs tol > 0 and min_inlier_frac in [0, 1]");
  if (!(p.min_segment_length >= 0.0) || p.min_points < 2 || !(p.ground_residual_tol > 0.0) ||
      !(p.ground_inlier_tol > 0.0))
    throw Error(ErrorCode::SpecError, "invalid localizer thresholds");
  if (!(cfg.frame_period > 0.0)) throw Error(ErrorCode::SpecError, "frame_period must be > 0");
}

}  // namespace stairloc::pipeline
