#pragma once

#include <cstdint>
#include <memory>
#include <map>
#include <string>
#include <vector>

#include "stairloc/camera_model.hpp"
#include "stairloc/detection_io.hpp"
#include "stairloc/line_segments.hpp"
#include "stairloc/simd/kernels.hpp"
#include "stairloc/stair_localizer.hpp"

namespace stairloc {

// Straight staircase. `position` is the camera-frame midpoint of the lowest
// (up) or top (down) nosing; nosing k sits k*run further along the forward
// axis and k*rise higher (up) or lower (down). `yaw` rotates the staircase
// about the up axis; yaw 0 puts the nosings parallel to camera X.
struct StaircaseSpec {
  int steps = 5;
  double rise = 0.17;
  double run = 0.29;
  double width = 1.0;
  Point3 position{0.0, 0.33, 3.0};
  double yaw = 0.0;
  Direction direction = Direction::Up;

  void validate() const;

  // Staircase standing on the floor the camera's base stands on, `distance`
  // ahead and `lateral` to the right of the camera.
  static StaircaseSpec on_floor(double distance, double lateral, double yaw, double camera_height,
                                Direction direction = Direction::Up);
};

struct Occluder {
  double u_min, v_min, u_max, v_max;  // pixel rectangle
  double depth;                       // meters, replaces the covered samples
};

struct CorruptionSpec {
  double depth_noise = 0.0;       // Gaussian sigma as a fraction of depth
  double segment_jitter = 0.0;    // Gaussian sigma in pixels, per endpoint coordinate
  int outlier_segments = 0;
  double outlier_angle_min = 0.35;  // radians away from the nosing slope
  double outlier_angle_max = 1.40;
  double dropout = 0.0;           // fraction of depth samples invalidated
  std::vector<Occluder> occluders;

  void validate() const;
  bool is_identity() const;
};

struct CorruptionLog {
  bool applied = false;
  CorruptionSpec spec;
  std::uint64_t seed = 0;
};

struct SceneOptions {
  double box_margin = 8.0;            // pixels around the truth segments
  double min_visible_fraction = 0.3;  // of a nosing's projected length
  double min_segment_length = 10.0;   // pixels
  int visibility_samples = 201;
  // Rays spread over one pixel above and below each pixel centre, all in the
  // centre column; the pixel keeps the nearest hit. A raster line within a
  // pixel of a nosing then reads the riser under it.
  int footprint_samples = 5;
  // Sensor range in meters; farther returns read as no depth. Without it a
  // pixel grazing the floor near the horizon reads hundreds of meters.
  double max_range = 10.0;
  ExtrinsicsConfig extrinsics{};      // used for the truth height
  std::string frame_id = "synthetic";
};

struct SyntheticScene {
  StaircaseSpec spec;
  Intrinsics intrinsics;
  DepthFrame depth;
  SegmentSet truth_segments;   // full-frame, one per visible nosing
  std::vector<int> truth_nosings;  // nosing index of each truth segment
  DetectionRecord detections;  // one box, crop-local segments (corrupted by corrupt())
  StairPose truth;
  CorruptionLog corruption;
};

// Camera-frame quads of the staircase and the floor(s) around it.
std::vector<simd::Quad> staircase_quads(const StaircaseSpec& spec);

// Renders the depth raster by ray casting, extracts visible nosings and the
// truth pose. Throws NotVisible when no nosing qualifies or no truth pixel
// has depth.
SyntheticScene build_scene(const StaircaseSpec& spec, const Intrinsics& k, const SceneOptions& options = {});

// Applies occluders, depth noise, dropout, segment jitter and outlier
// segments. Truth fields are untouched; a zero spec returns the scene as is.
SyntheticScene corrupt(const SyntheticScene& scene, const CorruptionSpec& c, std::uint64_t seed);

// Position: mean of the noise-free depth raster unprojected at the truth
// segments' rasterized pixels. Angle: spec yaw. Direction: spec direction.
StairPose truth_pose(const SyntheticScene& scene);

// Number of outlier segments that makes up `fraction` of the resulting set.
int outliers_for_fraction(std::size_t inlier_count, double fraction);

// Detector returning the scenes' own detection records.
class SceneOracleDetector final : public Detector {
 public:
  explicit SceneOracleDetector(std::vector<std::shared_ptr<const SyntheticScene>> scenes);
  DetectionRecord detect(const std::string& frame_id) override;

 private:
  std::map<std::string, std::shared_ptr<const SyntheticScene>> scenes_;
};

}  // namespace stairloc
