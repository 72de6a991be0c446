#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stairloc/detection_io.hpp"
#include "stairloc/scene_synth.hpp"

namespace stairloc::pipeline {

using Json = nlohmann::ordered_json;

// One named staircase placement ("3m-front" and the like).
struct SceneConfig {
  std::string name;
  StaircaseSpec stair;
};

struct SynthSpec {
  Intrinsics intrinsics{525.0, 525.0, 319.5, 239.5, 640, 480};
  double camera_height = 0.5;
  std::vector<SceneConfig> configs;
  SceneOptions options{};
};

// {"intrinsics": {fx, fy, cx, cy, width, height}, "camera_height": m,
//  "configs": [{"name", "distance", "lateral", "yaw_deg", "direction",
//               "steps", "rise", "run", "width"}]}
// Missing staircase fields take the StaircaseSpec defaults. Throws SpecError.
SynthSpec parse_synth_spec(const std::string& json_text);
SynthSpec load_synth_spec(const std::string& path);

// {"depth_noise", "segment_jitter", "outlier_segments" | "outlier_fraction",
//  "outlier_angle_min", "outlier_angle_max", "dropout",
//  "occluders": [[u_min, v_min, u_max, v_max, depth], ...]}
// `outlier_fraction` is resolved per scene against its nosing count.
struct CorruptionConfig {
  CorruptionSpec spec;
  std::optional<double> outlier_fraction;

  CorruptionSpec for_scene(std::size_t nosings) const;
};
CorruptionConfig parse_corruption(const std::string& json_text);
CorruptionConfig load_corruption(const std::string& path);

Json pose_to_json(const StairPose& pose);
StairPose pose_from_json(const Json& j);

struct ManifestEntry {
  std::string frame;
  std::string config;
  std::string bundle;  // relative to the dataset root
  std::optional<StairPose> truth;
};

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

// Reads <root>/manifest.jsonl. Throws IoError or SchemaError.
std::vector<ManifestEntry> load_manifest(const std::string& root);
std::string manifest_line(const ManifestEntry& e);

// Bundle directory: intrinsics.txt, depth.pfm, detections.jsonl, optional
// color.ppm and truth_pose.json.
FrameBundle load_bundle(const std::string& dir, const std::string& frame);
void save_bundle(const std::string& dir, const SyntheticScene& scene);

}  // namespace stairloc::pipeline
