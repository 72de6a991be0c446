#include "stairloc/pipeline/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stairloc/angles.hpp"
#include "stairloc/error.hpp"
#include "stairloc/io/pfm.hpp"

namespace stairloc::pipeline {

namespace fs = std::filesystem;

namespace {

Json parse_object(const std::string& text, const char* what) {
  Json doc = Json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorCode::SpecError, std::string(what) + ": expected a JSON object");
  return doc;
}

double num_or(const Json& obj, const char* key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw Error(ErrorCode::SpecError, std::string("'") + key + "' must be a number");
  return it->get<double>();
}

double required(const Json& obj, const char* key, ErrorCode code) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) throw Error(code, std::string("'") + key + "' must be a number");
  return it->get<double>();
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size())))
    throw Error(ErrorCode::IoError, "cannot write " + path);
}

SynthSpec parse_synth_spec(const std::string& json_text) {
  const Json doc = parse_object(json_text, "synth spec");
  SynthSpec s;
  if (auto it = doc.find("intrinsics"); it != doc.end()) {
    const Json& k = *it;
    try {
      s.intrinsics = Intrinsics(required(k, "fx", ErrorCode::SpecError), required(k, "fy", ErrorCode::SpecError),
                                required(k, "cx", ErrorCode::SpecError), required(k, "cy", ErrorCode::SpecError),
                                static_cast<int>(required(k, "width", ErrorCode::SpecError)),
                                static_cast<int>(required(k, "height", ErrorCode::SpecError)));
    } catch (const Error& e) {
      throw Error(ErrorCode::SpecError, e.what());
    }
  }
  s.camera_height = num_or(doc, "camera_height", s.camera_height);
  s.options.extrinsics.camera_in_base = {0.0, -s.camera_height, 0.0};
  auto configs = doc.find("configs");
  if (configs == doc.end() || !configs->is_array()) throw Error(ErrorCode::SpecError, "'configs' must be an array");
  for (const Json& c : *configs) {
    if (!c.is_object()) throw Error(ErrorCode::SpecError, "config entries must be objects");
    SceneConfig sc;
    auto name = c.find("name");
    if (name == c.end() || !name->is_string()) throw Error(ErrorCode::SpecError, "config needs a 'name'");
    sc.name = name->get<std::string>();
    Direction dir = Direction::Up;
    if (auto d = c.find("direction"); d != c.end()) {
      if (!d->is_string()) throw Error(ErrorCode::SpecError, "'direction' must be a string");
      dir = parse_direction(d->get<std::string>());
    }
    sc.stair = StaircaseSpec::on_floor(num_or(c, "distance", 3.0), num_or(c, "lateral", 0.0),
                                       num_or(c, "yaw_deg", 0.0) * kPi / 180.0, s.camera_height, dir);
    sc.stair.steps = static_cast<int>(num_or(c, "steps", sc.stair.steps));
    const double rise = num_or(c, "rise", sc.stair.rise);
    if (dir == Direction::Up) sc.stair.position.y += sc.stair.rise - rise;
    sc.stair.rise = rise;
    sc.stair.run = num_or(c, "run", sc.stair.run);
    sc.stair.width = num_or(c, "width", sc.stair.width);
    sc.stair.validate();
    s.configs.push_back(sc);
  }
  if (s.configs.empty()) throw Error(ErrorCode::SpecError, "synth spec lists no configs");
  return s;
}

SynthSpec load_synth_spec(const std::string& path) { return parse_synth_spec(read_text(path)); }

CorruptionSpec CorruptionConfig::for_scene(std::size_t nosings) const {
  CorruptionSpec s = spec;
  if (outlier_fraction) s.outlier_segments = outliers_for_fraction(nosings, *outlier_fraction);
  return s;
}

CorruptionConfig parse_corruption(const std::string& json_text) {
  const Json doc = parse_object(json_text, "corruption spec");
  CorruptionConfig c;
  for (const auto& [key, v] : doc.items()) {
    if (key == "occluders") {
      if (!v.is_array()) throw Error(ErrorCode::SpecError, "'occluders' must be an array");
      for (const Json& o : v) {
        if (!o.is_array() || o.size() != 5) throw Error(ErrorCode::SpecError, "occluder is [u_min, v_min, u_max, v_max, depth]");
        c.spec.occluders.push_back({o[0].get<double>(), o[1].get<double>(), o[2].get<double>(), o[3].get<double>(),
                                    o[4].get<double>()});
      }
      continue;
    }
    if (!v.is_number()) throw Error(ErrorCode::SpecError, "'" + key + "' must be a number");
    const double x = v.get<double>();
    if (key == "depth_noise") c.spec.depth_noise = x;
    else if (key == "segment_jitter") c.spec.segment_jitter = x;
    else if (key == "outlier_segments") c.spec.outlier_segments = static_cast<int>(x);
    else if (key == "outlier_fraction") c.outlier_fraction = x;
    else if (key == "outlier_angle_min") c.spec.outlier_angle_min = x;
    else if (key == "outlier_angle_max") c.spec.outlier_angle_max = x;
    else if (key == "dropout") c.spec.dropout = x;
    else throw Error(ErrorCode::SpecError, "unknown corruption key '" + key + "'");
  }
  c.spec.validate();
  if (c.outlier_fraction) outliers_for_fraction(1, *c.outlier_fraction);
  return c;
}

CorruptionConfig load_corruption(const std::string& path) { return parse_corruption(read_text(path)); }

Json pose_to_json(const StairPose& p) {
  Json j;
  j["position"] = {p.position.x, p.position.y, p.position.z};
  j["theta_rad"] = p.angle;
  j["quaternion"] = {p.orientation.w, p.orientation.x, p.orientation.y, p.orientation.z};
  j["height_m"] = p.height;
  j["direction"] = std::string(to_string(p.direction));
  j["n_points"] = p.n_points;
  j["n_lines"] = p.n_lines;
  j["residual_mse"] = p.residual_mse;
  return j;
}

StairPose pose_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "pose: expected an object");
  StairPose p;
  auto pos = j.find("position");
  if (pos == j.end() || !pos->is_array() || pos->size() != 3) throw Error(ErrorCode::SchemaError, "pose: 'position' must be [x, y, z]");
  p.position = {(*pos)[0].get<double>(), (*pos)[1].get<double>(), (*pos)[2].get<double>()};
  p.angle = required(j, "theta_rad", ErrorCode::SchemaError);
  if (auto q = j.find("quaternion"); q != j.end() && q->is_array() && q->size() == 4)
    p.orientation = {(*q)[0].get<double>(), (*q)[1].get<double>(), (*q)[2].get<double>(), (*q)[3].get<double>()};
  p.height = num_or(j, "height_m", 0.0);
  if (auto d = j.find("direction"); d != j.end() && d->is_string()) p.direction = parse_direction(d->get<std::string>());
  p.n_points = static_cast<std::size_t>(num_or(j, "n_points", 0));
  p.n_lines = static_cast<std::size_t>(num_or(j, "n_lines", 0));
  p.residual_mse = num_or(j, "residual_mse", 0.0);
  return p;
}

std::string manifest_line(const ManifestEntry& e) {
  Json j;
  j["frame"] = e.frame;
  j["config"] = e.config;
  j["bundle"] = e.bundle;
  if (e.truth) j["truth"] = pose_to_json(*e.truth);
  return j.dump() + "\n";
}

std::vector<ManifestEntry> load_manifest(const std::string& root) {
  const std::string text = read_text((fs::path(root) / "manifest.jsonl").string());
  std::vector<ManifestEntry> out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const Json j = Json::parse(line, nullptr, false);
    const std::string where = "manifest line " + std::to_string(n);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::SchemaError, where + ": expected a JSON object");
    ManifestEntry e;
    for (const char* key : {"frame", "config", "bundle"}) {
      auto it = j.find(key);
      if (it == j.end() || !it->is_string()) throw Error(ErrorCode::SchemaError, where + ": '" + key + "' must be a string");
    }
    e.frame = j["frame"].get<std::string>();
    e.config = j["config"].get<std::string>();
    e.bundle = j["bundle"].get<std::string>();
    if (auto t = j.find("truth"); t != j.end() && !t->is_null()) e.truth = pose_from_json(*t);
    out.push_back(std::move(e));
  }
  return out;
}

FrameBundle load_bundle(const std::string& dir, const std::string& frame) {
  const fs::path d(dir);
  Intrinsics k = load_intrinsics((d / "intrinsics.txt").string());
  DepthFrame depth = io::load_pfm((d / "depth.pfm").string());
  DetectionRecord det{frame, {}};
  for (auto& r : load_detection_file((d / "detections.jsonl").string()))
    if (r.frame == frame) det = std::move(r);
  std::optional<std::string> color;
  if (fs::exists(d / "color.ppm")) color = (d / "color.ppm").string();
  FrameBundle b{color, std::move(depth), k, std::move(det)};
  validate_bundle(b);
  return b;
}

void save_bundle(const std::string& dir, const SyntheticScene& scene) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
  const fs::path d(dir);
  save_intrinsics((d / "intrinsics.txt").string(), scene.intrinsics);
  io::save_pfm((d / "depth.pfm").string(), scene.depth);
  save_detection_file((d / "detections.jsonl").string(), {scene.detections});
  write_text((d / "truth_pose.json").string(), pose_to_json(scene.truth).dump(2) + "\n");
}

}  // namespace stairloc::pipeline
