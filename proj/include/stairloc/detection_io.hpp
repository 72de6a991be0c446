#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stairloc/camera_model.hpp"
#include "stairloc/line_segments.hpp"

namespace stairloc {

inline constexpr std::string_view kDetectionSchema = "stairloc/1";

// Axis-aligned stair box in full-image pixels (top-left, bottom-right).
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  double confidence = 1.0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Throws InvariantError naming the violated condition.
void validate_box(const BoundingBox& box);

// Box clamped to the image, with the translation back to full-frame pixels.
struct CropRect {
  double x_min, y_min, x_max, y_max;
  Displacement offset;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
};

// Throws EmptyCrop when clamping leaves no area.
CropRect crop_roi(const BoundingBox& box, int image_width, int image_height);

// Translates every root by the set's offset and resets the offset. Endpoints
// that leave the image by at most one pixel are clamped onto the last valid
// pixel; farther ones raise OutOfImage.
SegmentSet to_full_frame(const SegmentSet& set, int image_width, int image_height);

struct BoxDetection {
  BoundingBox box;
  SegmentSet segments;  // crop-local, offset = clamped box top-left

  friend bool operator==(const BoxDetection&, const BoxDetection&) = default;
};

struct DetectionRecord {
  std::string frame;
  std::vector<BoxDetection> boxes;

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

// Checks each segment against its crop rectangle (one pixel of slack).
void validate_record(const DetectionRecord& record);

// Newline-delimited stairloc/1 documents. SchemaError carries line and field;
// InvariantError names the violated invariant.
std::vector<DetectionRecord> parse_detection_file(std::string_view bytes);
DetectionRecord parse_detection_record(std::string_view json_text);

// Single-line canonical encoding (fixed key order, shortest round-trip floats).
std::string serialize_record(const DetectionRecord& record);
std::string serialize_detection_file(const std::vector<DetectionRecord>& records);

std::vector<DetectionRecord> load_detection_file(const std::string& path);
void save_detection_file(const std::string& path, const std::vector<DetectionRecord>& records);

struct FrameBundle {
  std::optional<std::string> color_path;
  DepthFrame depth;
  Intrinsics intrinsics;
  DetectionRecord detections;
};

// Depth size matches the intrinsics and every box crops to a non-empty region.
void validate_bundle(const FrameBundle& bundle);

class Detector {
 public:
  virtual ~Detector() = default;
  virtual DetectionRecord detect(const std::string& frame_id) = 0;
};

// Replays a detection file. Unknown frames yield an empty record.
class FileReplayDetector final : public Detector {
 public:
  explicit FileReplayDetector(std::vector<DetectionRecord> records);
  static FileReplayDetector from_file(const std::string& path);

  DetectionRecord detect(const std::string& frame_id) override;

 private:
  std::map<std::string, DetectionRecord> records_;
};

}  // namespace stairloc
