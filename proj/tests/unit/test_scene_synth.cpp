#include <cmath>
#include <functional>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "stairloc/angles.hpp"
#include "stairloc/error.hpp"
#include "stairloc/scene_synth.hpp"
#include "support/oracles.hpp"

using namespace stairloc;

namespace {

const Intrinsics kCam(525, 525, 319.5, 239.5, 640, 480);

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::IoError;
}

StaircaseSpec floor_spec(double distance, double lateral = 0.0, double yaw_deg = 0.0, Direction d = Direction::Up) {
  return StaircaseSpec::on_floor(distance, lateral, yaw_deg * kPi / 180, 0.5, d);
}

// Nosing n as a point and direction, built from the staircase description
// alone: lateral axis (cos yaw, 0, sin yaw), forward (-sin yaw, 0, cos yaw),
// up -Y.
struct NosingLine {
  oracle::P3 point, dir;
};

NosingLine nosing(const StaircaseSpec& s, int n) {
  const double c = std::cos(s.yaw), sn = std::sin(s.yaw);
  const double h = s.direction == Direction::Up ? n * s.rise : -n * s.rise;
  return {{s.position.x - sn * n * s.run, s.position.y - h, s.position.z + c * n * s.run}, {c, 0, sn}};
}

double distance_to_line(const oracle::P3& p, const NosingLine& l) {
  const double dx = p.x - l.point.x, dy = p.y - l.point.y, dz = p.z - l.point.z;
  const double t = dx * l.dir.x + dy * l.dir.y + dz * l.dir.z;
  return std::sqrt(std::max(0.0, dx * dx + dy * dy + dz * dz - t * t));
}

}  // namespace

TEST(StaircaseSpec, OnFloorPlacement) {
  const StaircaseSpec up = floor_spec(3.0, 0.4);
  EXPECT_EQ(up.position, (Point3{0.4, 0.5 - 0.17, 3.0}));
  const StaircaseSpec down = floor_spec(2.0, 0.0, 0.0, Direction::Down);
  EXPECT_EQ(down.position, (Point3{0.0, 0.5, 2.0}));
}

TEST(StaircaseSpec, Validation) {
  StaircaseSpec s;
  s.steps = 0;
  EXPECT_EQ(code_of([&] { s.validate(); }), ErrorCode::SpecError);
  s = {};
  s.rise = 0.0;
  EXPECT_EQ(code_of([&] { s.validate(); }), ErrorCode::SpecError);
  s = {};
  s.direction = Direction::Ambiguous;
  EXPECT_EQ(code_of([&] { s.validate(); }), ErrorCode::SpecError);
}

TEST(StaircaseQuads, FacesPerStep) {
  EXPECT_EQ(staircase_quads(floor_spec(3.0)).size(), 4u * 5 + 2);
}

TEST(BuildScene, FrontalSlopesAreZero) {
  const SyntheticScene s = build_scene(floor_spec(3.0), kCam);
  ASSERT_EQ(s.truth_segments.segments.size(), 5u);
  for (const auto& seg : s.truth_segments.segments) EXPECT_NEAR(slope_angle(seg), 0.0, 1e-9);
  EXPECT_EQ(s.truth.angle, 0.0);
  EXPECT_EQ(s.truth.direction, Direction::Up);
  ASSERT_EQ(s.detections.boxes.size(), 1u);
}

TEST(BuildScene, YawedTruthLinesLieAtTheYaw) {
  const StaircaseSpec spec = floor_spec(3.0, 0.0, 10.0);
  const SyntheticScene s = build_scene(spec, kCam);
  EXPECT_EQ(s.truth.angle, spec.yaw);
  ASSERT_FALSE(s.truth_segments.segments.empty());
  for (std::size_t i = 0; i < s.truth_segments.segments.size(); ++i) {
    const NosingLine l = nosing(spec, s.truth_nosings[i]);
    // Lift both endpoints onto the nosing's horizontal plane.
    oracle::P3 e[2];
    const Pixel px[2] = {s.truth_segments.segments[i].start(), s.truth_segments.segments[i].end()};
    for (int j = 0; j < 2; ++j) {
      const double z = oracle::ray_plane_depth(px[j].u, px[j].v, 525, 525, 319.5, 239.5, {0, 1, 0}, l.point.y);
      e[j] = {(px[j].u - 319.5) / 525 * z, l.point.y, z};
    }
    EXPECT_NEAR(oracle::line_gap(std::atan2(e[1].z - e[0].z, e[1].x - e[0].x), spec.yaw), 0.0, 1e-9);
  }
}

TEST(BuildScene, DepthAtNosingZeroMidpoint) {
  for (double yaw : {0.0, 10.0, -15.0}) {
    const StaircaseSpec spec = floor_spec(3.0, 0.0, yaw);
    const SyntheticScene s = build_scene(spec, kCam);
    const Projection pr = project(spec.position, kCam);
    const GridPixel g = round_to_grid(pr.pixel);
    // Riser 0 is the vertical plane through nosing 0 facing the camera.
    const oracle::P3 n{-std::sin(spec.yaw), 0, std::cos(spec.yaw)};
    const double c = n.x * spec.position.x + n.z * spec.position.z;
    const double ref = oracle::ray_plane_depth(g.u, g.v, 525, 525, 319.5, 239.5, n, c);
    EXPECT_NEAR(s.depth.at(g.u, g.v), ref, 1e-6) << yaw;
    if (yaw == 0.0) {
      EXPECT_NEAR(s.depth.at(g.u, g.v), 3.0, 1e-6);
    }
  }
}

TEST(BuildScene, RendererProjectorDuality) {
  for (const StaircaseSpec& spec : {floor_spec(1.0), floor_spec(3.0), floor_spec(5.0), floor_spec(3.0, 1.0),
                                    floor_spec(3.0, -1.0, 20.0), floor_spec(2.5, 0.5, -25.0)}) {
    const SyntheticScene s = build_scene(spec, kCam);
    for (std::size_t i = 0; i < s.truth_segments.segments.size(); ++i) {
      std::vector<NosingLine> lines;
      for (int n = 0; n < spec.steps; ++n) lines.push_back(nosing(spec, n));
      for (const GridPixel& p : rasterize(s.truth_segments.segments[i], {}, 640, 480)) {
        const double d = s.depth.at(p.u, p.v);
        ASSERT_GT(d, 0.0);
        const oracle::P3 q{(p.u - 319.5) / 525 * d, (p.v - 239.5) / 525 * d, d};
        double best = 1e9;
        for (const auto& l : lines) best = std::min(best, distance_to_line(q, l));
        ASSERT_LT(best, d / 525) << "pixel " << p.u << "," << p.v << " spec " << spec.position.z << " " << spec.position.x << " " << spec.yaw;
      }
    }
  }
}

TEST(BuildScene, ReturnsBeyondRangeReadNoDepth) {
  // Column 0 looks at the floor beside the staircase; the floor lies 0.5 m
  // below the camera and the nearest sub-ray is the one a pixel lower.
  SceneOptions far;
  far.max_range = 100.0;
  const SyntheticScene near_cut = build_scene(floor_spec(3.0), kCam);
  const SyntheticScene far_cut = build_scene(floor_spec(3.0), kCam, far);
  const auto floor_depth = [](int v) { return oracle::ray_plane_depth(0, v + 1, 525, 525, 319.5, 239.5, {0, 1, 0}, 0.5); };
  EXPECT_GT(floor_depth(250), 10.0);
  EXPECT_EQ(near_cut.depth.at(0, 250), 0.0f);
  EXPECT_NEAR(far_cut.depth.at(0, 250), floor_depth(250), 1e-5 * floor_depth(250));
  EXPECT_LT(floor_depth(300), 10.0);
  EXPECT_NEAR(near_cut.depth.at(0, 300), floor_depth(300), 1e-5);
  SceneOptions bad;
  bad.max_range = 0.0;
  EXPECT_EQ(code_of([&] { build_scene(floor_spec(3.0), kCam, bad); }), ErrorCode::SpecError);
}

TEST(BuildScene, TruthZWithinStaircaseDepth) {
  for (double dist : {1.0, 2.0, 3.0, 5.0})
    for (double lat : {-1.0, 0.0, 1.0}) {
      const SyntheticScene s = build_scene(floor_spec(dist, lat), kCam);
      EXPECT_GE(s.truth.position.z, dist);
      EXPECT_LE(s.truth.position.z, dist + 5 * 0.29);
    }
}

TEST(BuildScene, TruthPositionIsMeanOfCleanTruthPixels) {
  const SyntheticScene s = build_scene(floor_spec(3.0, 0.3, 5.0), kCam);
  std::vector<oracle::P3> pts;
  for (const auto& seg : s.truth_segments.segments)
    for (const GridPixel& p : rasterize(seg, {}, 640, 480)) {
      const double d = s.depth.at(p.u, p.v);
      pts.push_back({(p.u - 319.5) / 525 * d, (p.v - 239.5) / 525 * d, d});
    }
  const oracle::P3 m = oracle::compensated_mean(pts);
  EXPECT_NEAR(s.truth.position.x, m.x, 1e-12);
  EXPECT_NEAR(s.truth.position.y, m.y, 1e-12);
  EXPECT_NEAR(s.truth.position.z, m.z, 1e-12);
  const StairPose again = truth_pose(s);
  EXPECT_EQ(again.position, s.truth.position);
  EXPECT_EQ(again.angle, s.truth.angle);
}

TEST(BuildScene, DownStaircaseTruthDirection) {
  const SyntheticScene s = build_scene(floor_spec(2.0, 0.0, 0.0, Direction::Down), kCam);
  EXPECT_EQ(s.truth.direction, Direction::Down);
  EXPECT_EQ(truth_pose(s).direction, Direction::Down);
}

TEST(BuildScene, DetectionsAreCropLocalTruth) {
  const SyntheticScene s = build_scene(floor_spec(3.0, 0.5, 12.0), kCam);
  const BoxDetection& box = s.detections.boxes.at(0);
  EXPECT_NO_THROW(validate_record(s.detections));
  const SegmentSet full = to_full_frame(box.segments, 640, 480);
  ASSERT_EQ(full.segments.size(), s.truth_segments.segments.size());
  for (std::size_t i = 0; i < full.segments.size(); ++i) {
    EXPECT_NEAR(full.segments[i].start().u, s.truth_segments.segments[i].start().u, 1e-9);
    EXPECT_NEAR(full.segments[i].end().v, s.truth_segments.segments[i].end().v, 1e-9);
  }
}

TEST(BuildScene, NotVisible) {
  StaircaseSpec behind = floor_spec(3.0);
  behind.position.z = -3.0;
  EXPECT_EQ(code_of([&] { build_scene(behind, kCam); }), ErrorCode::NotVisible);
  EXPECT_EQ(code_of([&] { build_scene(floor_spec(3.0, 40.0), kCam); }), ErrorCode::NotVisible);
}

TEST(Corrupt, ZeroSpecIsIdentity) {
  const SyntheticScene s = build_scene(floor_spec(3.0), kCam);
  const SyntheticScene c = corrupt(s, {}, 99);
  EXPECT_EQ(c.depth, s.depth);
  EXPECT_EQ(c.detections, s.detections);
  EXPECT_EQ(c.truth_segments, s.truth_segments);
  EXPECT_EQ(c.truth.position, s.truth.position);
  EXPECT_TRUE(CorruptionSpec{}.is_identity());
}

TEST(Corrupt, FullDropout) {
  CorruptionSpec c;
  c.dropout = 1.0;
  const SyntheticScene s = corrupt(build_scene(floor_spec(3.0), kCam), c, 1);
  for (float d : s.depth.data()) ASSERT_FALSE(DepthFrame::is_valid(d));
}

TEST(Corrupt, DepthNoiseSigma) {
  SyntheticScene s = build_scene(floor_spec(3.0), kCam);
  s.depth = DepthFrame(640, 480, std::vector<float>(640 * 480, 3.0f));
  CorruptionSpec c;
  c.depth_noise = 0.01;
  const SyntheticScene n = corrupt(s, c, 4);
  std::vector<double> err;
  for (std::size_t i = 0; i < 10000; ++i) err.push_back(n.depth.data()[i * 30] - 3.0);
  EXPECT_NEAR(oracle::sample_std(err), 0.03, 0.003);
}

TEST(Corrupt, LogAndTruthUntouched) {
  const SyntheticScene s = build_scene(floor_spec(3.0), kCam);
  CorruptionSpec c;
  c.depth_noise = 0.02;
  c.segment_jitter = 1.5;
  c.outlier_segments = 3;
  c.dropout = 0.1;
  c.occluders.push_back({300, 200, 340, 260, 1.2});
  const SyntheticScene n = corrupt(s, c, 17);
  EXPECT_TRUE(n.corruption.applied);
  EXPECT_EQ(n.corruption.seed, 17u);
  EXPECT_EQ(n.corruption.spec.outlier_segments, 3);
  EXPECT_EQ(n.truth_segments, s.truth_segments);
  EXPECT_EQ(n.truth.position, s.truth.position);
  EXPECT_EQ(n.detections.boxes[0].segments.segments.size(), s.detections.boxes[0].segments.segments.size() + 3);
  EXPECT_NO_THROW(validate_record(n.detections));
}

TEST(Corrupt, OccluderOverridesDepth) {
  CorruptionSpec c;
  c.occluders.push_back({300, 200, 340, 260, 1.2});
  const SyntheticScene n = corrupt(build_scene(floor_spec(3.0), kCam), c, 0);
  for (int v = 200; v <= 260; ++v)
    for (int u = 300; u <= 340; ++u) ASSERT_EQ(n.depth.at(u, v), 1.2f);
  EXPECT_NE(n.depth.at(299, 230), 1.2f);
}

TEST(Corrupt, Deterministic) {
  const SyntheticScene s = build_scene(floor_spec(3.0, 0.2, 8.0), kCam);
  CorruptionSpec c;
  c.depth_noise = 0.01;
  c.segment_jitter = 1.0;
  c.outlier_segments = 2;
  c.dropout = 0.05;
  const SyntheticScene a = corrupt(s, c, 123), b = corrupt(s, c, 123), d = corrupt(s, c, 124);
  EXPECT_EQ(a.depth, b.depth);
  EXPECT_EQ(a.detections, b.detections);
  EXPECT_NE(a.depth, d.depth);
  EXPECT_NE(a.detections, d.detections);
}

TEST(Corrupt, InvalidSpec) {
  const SyntheticScene s = build_scene(floor_spec(3.0), kCam);
  CorruptionSpec c;
  c.dropout = 1.5;
  EXPECT_THROW(corrupt(s, c, 0), Error);
  c = {};
  c.depth_noise = -0.1;
  EXPECT_THROW(corrupt(s, c, 0), Error);
}

TEST(OutliersForFraction, SmallestCountReachingTheFraction) {
  EXPECT_EQ(outliers_for_fraction(5, 0.2), 2);
  EXPECT_EQ(outliers_for_fraction(4, 0.2), 1);
  EXPECT_EQ(outliers_for_fraction(5, 0.0), 0);
  for (std::size_t n = 1; n < 12; ++n)
    for (double f : {0.1, 0.2, 0.3, 0.45}) {
      const int k = outliers_for_fraction(n, f);
      EXPECT_GE(static_cast<double>(k) / (n + k), f - 1e-12);
      if (k > 0) {
        EXPECT_LT(static_cast<double>(k - 1) / (n + k - 1), f);
      }
    }
}

TEST(SceneOracleDetector, ReplaysSceneDetections) {
  SceneOptions opt;
  opt.frame_id = "s0";
  auto scene = std::make_shared<const SyntheticScene>(build_scene(floor_spec(3.0), kCam, opt));
  SceneOracleDetector det({scene});
  EXPECT_EQ(det.detect("s0"), scene->detections);
  EXPECT_TRUE(det.detect("other").boxes.empty());
  EXPECT_EQ(det.detect("other").frame, "other");
}
