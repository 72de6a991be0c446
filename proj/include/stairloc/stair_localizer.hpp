#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "stairloc/camera_model.hpp"
#include "stairloc/detection_io.hpp"
#include "stairloc/error.hpp"
#include "stairloc/line_segments.hpp"

namespace stairloc {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

enum class Direction { Up, Down, Ambiguous };

std::string_view to_string(Direction d);
Direction parse_direction(std::string_view s);

// Unit quaternion, (w, x, y, z).
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

// Points lifted from one segment's rasterized pixels.
struct LiftedSegment {
  std::size_t source = 0;  // index into the lifted SegmentSet
  std::vector<Point3> points;
  std::size_t rasterized = 0;
  double valid_fraction = 0.0;
};

// Ground-plane line. Angles are counter-clockwise in ground_project
// coordinates, i.e. right-handed about the up axis (-gravity).
struct GroundLine {
  double angle = 0.0;  // [-pi/2, pi/2)
  Vec2 centroid;
  double residual_mse = 0.0;
  std::size_t support = 0;
};

struct StairPose {
  Point3 position;
  double angle = 0.0;  // [-pi, pi)
  Quaternion orientation;
  double height = 0.0;
  Direction direction = Direction::Ambiguous;
  std::size_t n_points = 0;
  std::size_t n_lines = 0;
  double residual_mse = 0.0;
};

// Camera mounting and gravity. Defaults: camera axes aligned with the base,
// camera 0.5 m above the base origin, gravity along camera +Y, epsilon one
// typical stair rise.
struct ExtrinsicsConfig {
  Eigen::Matrix3d base_from_camera = Eigen::Matrix3d::Identity();
  Eigen::Vector3d camera_in_base{0.0, -0.5, 0.0};
  Point3 gravity{0.0, 1.0, 0.0};  // unit, camera frame, pointing down
  double epsilon = 0.15;

  // Throws InvariantError (orthonormal rotation, epsilon > 0, unit gravity).
  void validate() const;
};

// Orthonormal ground basis for a gravity axis: e1 is camera X projected onto
// the ground (camera Z when X is vertical), e2 = e1 x g.
struct GroundFrame {
  Point3 gravity, e1, e2;
  static GroundFrame from_gravity(const Point3& gravity);
};

enum class GroundOutlierMode { WholeLines, Points };

struct LocalizerParams {
  ConsensusParams slope{};
  double min_segment_length = 10.0;  // pixels
  std::size_t min_points = 5;
  GroundOutlierMode ground_mode = GroundOutlierMode::WholeLines;
  double ground_inlier_tol = 0.05;     // meters, used by GroundOutlierMode::Points
  double ground_residual_tol = 0.01;   // m^2
  ConsensusParams ground{0.15, 0.0, 200, 0.99, 0};
  XAxis x_axis = XAxis::Right;
  std::uint64_t seed = 0;
};

// Lifts each segment's rasterized pixels through the depth raster. Segments
// with fewer than `min_points` valid samples are dropped. Throws NoValidDepth
// when every segment drops.
std::vector<LiftedSegment> lift_segments(const SegmentSet& set, const DepthFrame& depth, const Intrinsics& k,
                                         std::size_t min_points);

// Component-wise mean over every lifted point. Throws EmptyCloud.
Point3 estimate_position(std::span<const LiftedSegment> lifted);

Vec2 ground_project(const Point3& p, const ExtrinsicsConfig& cfg);
Vec2 ground_project(const Point3& p, const GroundFrame& frame);

// Principal-axis (total least squares) fit. A positive `inlier_tol` first runs
// a two-point RANSAC over the points and refits on its inliers.
GroundLine fit_ground_line(std::span<const Vec2> points, double inlier_tol, std::uint64_t seed);

struct GroundLineSplit {
  std::vector<GroundLine> kept;
  std::vector<GroundLine> rejected;
  std::vector<std::size_t> kept_indices;
  std::vector<std::size_t> rejected_indices;
};

// Residual gate followed by angular consensus among the survivors.
// Throws AllRejected.
GroundLineSplit filter_ground_lines(std::span<const GroundLine> lines, double residual_tol,
                                    const ConsensusParams& consensus);

// Period-pi mean of the line angles, then oriented so the stair extends away
// from the camera (decided by the mean line centroid). Throws EmptyInput.
double estimate_angle(std::span<const GroundLine> kept);

// Rotation by theta about the up axis (-gravity), so rotating a ground vector
// by the quaternion matches the planar rotation of its ground coordinates.
Quaternion angle_to_quaternion(double theta, const ExtrinsicsConfig& cfg);
double quaternion_to_angle(const Quaternion& q, const ExtrinsicsConfig& cfg);

struct DirectionEstimate {
  double height;
  Direction direction;
};

DirectionEstimate estimate_direction(const Point3& stair_position, const ExtrinsicsConfig& cfg);
Direction classify_height(double height, double epsilon);

struct PoseRecord {
  std::string frame;
  std::size_t box_index = 0;
  StairPose pose;
};

// What happened to one box; `failure` is empty when a pose was produced.
struct BoxReport {
  std::size_t box_index = 0;
  std::optional<ErrorCode> failure;
  std::string message;
  std::size_t n_segments = 0;
  std::vector<std::size_t> short_indices;
  std::vector<std::size_t> inlier_indices;   // into the box's segment list
  std::vector<std::size_t> outlier_indices;
  std::size_t n_lifted = 0;
  std::size_t n_lines_kept = 0;
  std::size_t n_lines_rejected = 0;
};

struct LocalizeResult {
  std::vector<PoseRecord> poses;
  std::vector<BoxReport> boxes;
  bool no_detection = false;
};

// Per-box pipeline: crop, short-segment drop, slope consensus, full-frame
// restitution, lifting, position, ground lines, line filtering, angle,
// orientation, direction. Box failures are reported, never thrown; only a
// malformed bundle throws.
LocalizeResult localize(const FrameBundle& bundle, const ExtrinsicsConfig& cfg, const LocalizerParams& params);

}  // namespace stairloc
