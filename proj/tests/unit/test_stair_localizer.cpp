#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "stairloc/angles.hpp"
#include "stairloc/error.hpp"
#include "stairloc/scene_synth.hpp"
#include "stairloc/stair_localizer.hpp"
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

DepthFrame constant_depth(float d) { return DepthFrame(640, 480, std::vector<float>(640 * 480, d)); }

SegmentSet horizontal(double u0, double v, double len) {
  SegmentSet s;
  s.segments.push_back(LineSegmentTP::from_endpoints({u0, v}, {u0 + len - 1, v}));
  return s;
}

FrameBundle bundle_of(const SyntheticScene& s) { return {std::nullopt, s.depth, s.intrinsics, s.detections}; }

SyntheticScene scene_at(double distance, double lateral, double yaw, Direction dir = Direction::Up) {
  return build_scene(StaircaseSpec::on_floor(distance, lateral, yaw, 0.5, dir), kCam);
}

GroundLine line(double angle, Vec2 centroid = {0, 3}, double residual = 1e-4) { return {angle, centroid, residual, 10}; }

}  // namespace

TEST(LiftSegments, ConstantDepthPlane) {
  const auto lifted = lift_segments(horizontal(100, 200, 50), constant_depth(2.0f), kCam, 5);
  ASSERT_EQ(lifted.size(), 1u);
  EXPECT_EQ(lifted[0].points.size(), 50u);
  EXPECT_EQ(lifted[0].valid_fraction, 1.0);
  for (const auto& p : lifted[0].points) EXPECT_EQ(p.z, 2.0);
}

TEST(LiftSegments, MinPointsThreshold) {
  DepthFrame d = constant_depth(2.0f);
  for (int u = 100; u < 140; ++u) d.at(u, 200) = 0.0f;
  EXPECT_EQ(code_of([&] { lift_segments(horizontal(100, 200, 50), d, kCam, 20); }), ErrorCode::NoValidDepth);
  const auto lifted = lift_segments(horizontal(100, 200, 50), d, kCam, 5);
  ASSERT_EQ(lifted.size(), 1u);
  EXPECT_EQ(lifted[0].points.size(), 10u);
  EXPECT_DOUBLE_EQ(lifted[0].valid_fraction, 0.2);
}

TEST(LiftSegments, PrincipalRowHasZeroHeight) {
  // cy on the pixel grid, so the row is exactly the principal row.
  const Intrinsics k(525, 525, 319.5, 240, 640, 480);
  const auto on_axis = lift_segments(horizontal(10, 240, 600), constant_depth(1.0f), k, 5);
  Eigen::Matrix3d kmat;
  kmat << 525, 0, 319.5, 0, 525, 240, 0, 0, 1;
  const Eigen::Matrix3d kinv = kmat.inverse();
  std::size_t j = 0;
  for (const auto& p : on_axis[0].points) {
    const Eigen::Vector3d ref = kinv * Eigen::Vector3d(10 + static_cast<double>(j++), 240, 1);
    EXPECT_EQ(p.y, 0.0);
    EXPECT_NEAR(p.x, ref.x(), 1e-12);
    EXPECT_NEAR(p.z, 1.0, 0.0);
  }
  EXPECT_EQ(j, 600u);
}

TEST(EstimatePosition, Examples) {
  LiftedSegment a;
  a.points = {{0, 0, 1}, {2, 0, 3}};
  EXPECT_EQ(estimate_position(std::vector{a}), (Point3{1, 0, 2}));
  LiftedSegment b;
  b.points = {{0.3, -1.7, 4.25}};
  EXPECT_EQ(estimate_position(std::vector{b}), (Point3{0.3, -1.7, 4.25}));
  EXPECT_EQ(code_of([] { estimate_position(std::vector<LiftedSegment>{}); }), ErrorCode::EmptyCloud);
}

TEST(EstimatePosition, MatchesCompensatedMeanOnStaircase) {
  const SyntheticScene s = scene_at(3.0, 0.0, 0.0);
  auto lifted = lift_segments(s.truth_segments, s.depth, kCam, 5);
  std::vector<oracle::P3> all;
  for (const auto& l : lifted)
    for (const auto& p : l.points) all.push_back({p.x, p.y, p.z});
  // Pad up to 1000 points with further samples on the same nosings.
  std::mt19937_64 rng(2);
  while (all.size() < 1000) {
    const auto& p = all[rng() % all.size()];
    all.push_back({p.x + 1e-3, p.y, p.z});
  }
  LiftedSegment one;
  for (const auto& p : all) one.points.push_back({p.x, p.y, p.z});
  const Point3 m = estimate_position(std::vector{one});
  const oracle::P3 ref = oracle::compensated_mean(all);
  EXPECT_NEAR(m.x, ref.x, 1e-12);
  EXPECT_NEAR(m.y, ref.y, 1e-12);
  EXPECT_NEAR(m.z, ref.z, 1e-12);
}

TEST(GroundProject, DefaultGravityDropsY) {
  const ExtrinsicsConfig cfg;
  EXPECT_EQ(ground_project({1, 2, 3}, cfg), (Vec2{1, 3}));
  const Vec2 v = ground_project({0, -5, 0}, cfg);
  EXPECT_EQ(v.x, 0.0);
  EXPECT_EQ(v.y, 0.0);
}

TEST(GroundProject, TiltedGravity) {
  ExtrinsicsConfig cfg;
  const double t = 10.0 * kPi / 180.0;
  cfg.gravity = {0, std::cos(t), std::sin(t)};
  const Vec2 v = ground_project({0, 1, 0}, cfg);
  EXPECT_NEAR(std::hypot(v.x, v.y), 0.17365, 1e-5);

  const Eigen::Vector3d g(0, std::cos(t), std::sin(t));
  const Eigen::Matrix3d proj = Eigen::Matrix3d::Identity() - g * g.transpose();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d p(u(rng), u(rng), u(rng));
    const Vec2 q = ground_project({p.x(), p.y(), p.z()}, cfg);
    ASSERT_NEAR(std::hypot(q.x, q.y), (proj * p).norm(), 1e-12);
  }
}

TEST(FitGroundLine, Examples) {
  const std::vector<Vec2> diag{{0, 0}, {1, 1}, {2, 2}};
  const GroundLine d = fit_ground_line(diag, 0.0, 0);
  EXPECT_NEAR(d.angle, kPi / 4, 1e-12);
  EXPECT_NEAR(d.residual_mse, 0.0, 1e-15);
  EXPECT_EQ(d.support, 3u);

  const std::vector<Vec2> flat{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  const GroundLine f = fit_ground_line(flat, 0.0, 0);
  EXPECT_EQ(f.angle, 0.0);
  EXPECT_EQ(f.residual_mse, 0.0);

  const std::vector<Vec2> vertical{{1, 0}, {1, 1}, {1, 2}};
  EXPECT_NEAR(fit_ground_line(vertical, 0.0, 0).angle, -kPi / 2, 1e-12);
}

TEST(FitGroundLine, MatchesScatterEigendecomposition) {
  auto check = [](const std::vector<Vec2>& pts) {
    Eigen::Vector2d mean(0, 0);
    for (const auto& p : pts) mean += Eigen::Vector2d(p.x, p.y);
    mean /= static_cast<double>(pts.size());
    Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
    for (const auto& p : pts) {
      const Eigen::Vector2d d = Eigen::Vector2d(p.x, p.y) - mean;
      scatter += d * d.transpose();
    }
    scatter /= static_cast<double>(pts.size());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(scatter);
    const Eigen::Vector2d axis = es.eigenvectors().col(1);
    const GroundLine l = fit_ground_line(pts, 0.0, 0);
    EXPECT_NEAR(oracle::line_gap(l.angle, std::atan2(axis.y(), axis.x())), 0.0, 1e-9);
    EXPECT_NEAR(l.residual_mse, es.eigenvalues()(0), 1e-12);
    EXPECT_NEAR(l.centroid.x, mean.x(), 1e-12);
    EXPECT_NEAR(l.centroid.y, mean.y(), 1e-12);
    EXPECT_GE(l.angle, -kPi / 2);
    EXPECT_LT(l.angle, kPi / 2);
  };
  check({{0, 0}, {1, 0.1}, {2, -0.1}, {3, 0}});
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0, 0.02);
  std::uniform_real_distribution<double> a(-kPi, kPi), t(-1, 1);
  for (int i = 0; i < 100; ++i) {
    const double th = a(rng);
    std::vector<Vec2> pts;
    for (int k = 0; k < 30; ++k) {
      const double s = t(rng);
      pts.push_back({2 + s * std::cos(th) + n(rng), 3 + s * std::sin(th) + n(rng)});
    }
    check(pts);
  }
}

TEST(FitGroundLine, Errors) {
  const std::vector<Vec2> one{{1, 1}};
  EXPECT_EQ(code_of([&] { fit_ground_line(one, 0.0, 0); }), ErrorCode::TooFewPoints);
  const std::vector<Vec2> same{{1, 1}, {1, 1 + 1e-12}, {1, 1}};
  EXPECT_EQ(code_of([&] { fit_ground_line(same, 0.0, 0); }), ErrorCode::DegenerateCluster);
}

TEST(FitGroundLine, PointModeIgnoresStrayPoints) {
  std::vector<Vec2> pts;
  for (int k = 0; k < 20; ++k) pts.push_back({0.05 * k, 3.0});
  pts.push_back({0.5, 3.4});
  pts.push_back({0.6, 2.7});
  const GroundLine whole = fit_ground_line(pts, 0.0, 1);
  const GroundLine pointwise = fit_ground_line(pts, 0.05, 1);
  EXPECT_GT(whole.residual_mse, 1e-3);
  EXPECT_EQ(pointwise.support, 20u);
  EXPECT_NEAR(pointwise.angle, 0.0, 1e-12);
  EXPECT_NEAR(pointwise.residual_mse, 0.0, 1e-15);
}

TEST(FilterGroundLines, ResidualGate) {
  std::vector<GroundLine> lines(5, line(0.2));
  lines.push_back(line(0.2, {0, 3}, 0.5));
  const auto split = filter_ground_lines(lines, 0.01, {});
  EXPECT_EQ(split.kept.size(), 5u);
  EXPECT_EQ(split.rejected_indices, std::vector<std::size_t>{5});
}

TEST(FilterGroundLines, CleanParallelKeepsAll) {
  const std::vector<GroundLine> lines{line(0.2), line(0.2), line(0.2001), line(0.1999)};
  const auto split = filter_ground_lines(lines, 0.01, {});
  EXPECT_EQ(split.kept.size(), 4u);
  EXPECT_TRUE(split.rejected.empty());
}

TEST(FilterGroundLines, MinorityAngleRejected) {
  std::vector<GroundLine> lines(6, line(0.2));
  lines.push_back(line(1.4));
  lines.push_back(line(1.4));
  std::vector<double> angles;
  for (const auto& l : lines) angles.push_back(l.angle);
  const ConsensusParams p{0.15, 0.5, 200, 0.99, 3};
  const auto split = filter_ground_lines(lines, 0.01, p);
  EXPECT_EQ(split.kept.size(), oracle::exhaustive_consensus(angles, p.tol));
  EXPECT_EQ(split.rejected_indices, (std::vector<std::size_t>{6, 7}));
}

TEST(FilterGroundLines, AllRejected) {
  const std::vector<GroundLine> noisy{line(0.2, {0, 3}, 1.0)};
  EXPECT_EQ(code_of([&] { filter_ground_lines(noisy, 0.01, {}); }), ErrorCode::AllRejected);
  EXPECT_EQ(code_of([] { filter_ground_lines(std::vector<GroundLine>{}, 0.01, {}); }), ErrorCode::AllRejected);
}

TEST(EstimateAngle, Examples) {
  EXPECT_NEAR(estimate_angle(std::vector{line(0.1), line(0.3)}), 0.2, 1e-15);
  EXPECT_EQ(estimate_angle(std::vector{line(0.37)}), 0.37);
  EXPECT_EQ(code_of([] { estimate_angle(std::vector<GroundLine>{}); }), ErrorCode::EmptyInput);
}

TEST(EstimateAngle, WrapConsistent) {
  const std::vector<double> raw{-kPi / 2 + 0.01, kPi / 2 - 0.01};
  // Centroid to the camera's left, so the forward axis at +pi/2 points away.
  const double a = estimate_angle(std::vector{line(raw[0], {-3, 0.1}), line(raw[1], {-3, 0.1})});
  EXPECT_NEAR(oracle::line_gap(a, oracle::grid_line_mean(raw)), 0.0, 1e-4);
  EXPECT_NEAR(std::abs(a), kPi / 2, 1e-12);
  EXPECT_GT(std::abs(a), 1.0);
}

TEST(EstimateAngle, FacesAwayFromCamera) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ang(-kPi, kPi), r(1, 6);
  for (int i = 0; i < 500; ++i) {
    const double th = ang(rng), range = r(rng);
    // Stair forward axis for angle th is (-sin th, cos th); put it ahead.
    const Vec2 c{-std::sin(th) * range, std::cos(th) * range};
    const double a = estimate_angle(std::vector{line(fold_half_turn(th), c)});
    ASSERT_NEAR(std::abs(wrap_full_turn(a - th)), 0.0, 1e-12) << th;
    ASSERT_GE(a, -kPi);
    ASSERT_LT(a, kPi);
  }
}

TEST(EstimateAngle, RotationEquivariance) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(-kPi, kPi), j(-0.02, 0.02), r(1, 6);
  for (int i = 0; i < 200; ++i) {
    const double th = ang(rng), phi = ang(rng), range = r(rng);
    std::vector<GroundLine> a, b;
    for (int k = 0; k < 5; ++k) {
      const double e = j(rng);
      const Vec2 c{-std::sin(th) * (range + 0.29 * k), std::cos(th) * (range + 0.29 * k)};
      const Vec2 rc{std::cos(phi) * c.x - std::sin(phi) * c.y, std::sin(phi) * c.x + std::cos(phi) * c.y};
      a.push_back(line(fold_half_turn(th + e), c));
      b.push_back(line(fold_half_turn(th + phi + e), rc));
    }
    ASSERT_NEAR(std::abs(wrap_full_turn(estimate_angle(b) - estimate_angle(a) - phi)), 0.0, 1e-9);
  }
}

TEST(Quaternion, Examples) {
  const ExtrinsicsConfig cfg;
  EXPECT_EQ(angle_to_quaternion(0.0, cfg), (Quaternion{1, 0, 0, 0}));
  // Up is -Y, so a counter-clockwise ground turn is a rotation about -Y.
  const Quaternion q = angle_to_quaternion(kPi / 2, cfg);
  EXPECT_NEAR(q.w, std::cos(kPi / 4), 1e-15);
  EXPECT_NEAR(q.y, -std::sin(kPi / 4), 1e-15);
  EXPECT_EQ(q.x, 0.0);
  EXPECT_EQ(q.z, 0.0);
}

TEST(Quaternion, RotatesGroundVectorsLikeThePlanarRotation) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ang(-kPi, kPi), tilt(-0.3, 0.3);
  for (int i = 0; i < 500; ++i) {
    ExtrinsicsConfig cfg;
    if (i % 2) {
      const Eigen::Vector3d g = Eigen::Vector3d(tilt(rng), 1.0, tilt(rng)).normalized();
      cfg.gravity = {g.x(), g.y(), g.z()};
    }
    const double th = ang(rng);
    const Quaternion q = angle_to_quaternion(th, cfg);
    ASSERT_NEAR(std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z), 1.0, 1e-12);
    ASSERT_NEAR(quaternion_to_angle(q, cfg), th, 1e-9);

    const Eigen::Quaterniond eq(q.w, q.x, q.y, q.z);
    const Eigen::Vector3d p(ang(rng), ang(rng), ang(rng));
    const Eigen::Vector3d rp = eq * p;
    const Vec2 a = ground_project({p.x(), p.y(), p.z()}, cfg);
    const Vec2 b = ground_project({rp.x(), rp.y(), rp.z()}, cfg);
    const Eigen::Vector2d ref = Eigen::Rotation2Dd(th) * Eigen::Vector2d(a.x, a.y);
    ASSERT_NEAR(b.x, ref.x(), 1e-9);
    ASSERT_NEAR(b.y, ref.y(), 1e-9);
  }
}

TEST(EstimateDirection, Trichotomy) {
  const ExtrinsicsConfig cfg;
  // Default mount: camera 0.5 m above the base, so h = 0.5 - y.
  const auto up = estimate_direction({0, 0.0, 3}, cfg);
  EXPECT_DOUBLE_EQ(up.height, 0.5);
  EXPECT_EQ(up.direction, Direction::Up);
  EXPECT_EQ(estimate_direction({0, 1.0, 3}, cfg).direction, Direction::Down);
  EXPECT_EQ(estimate_direction({0, 0.45, 3}, cfg).direction, Direction::Ambiguous);
  EXPECT_EQ(classify_height(0.5, 0.15), Direction::Up);
  EXPECT_EQ(classify_height(-0.5, 0.15), Direction::Down);
  EXPECT_EQ(classify_height(0.05, 0.15), Direction::Ambiguous);
  EXPECT_EQ(classify_height(0.15, 0.15), Direction::Ambiguous);
}

TEST(EstimateDirection, UsesMountTransform) {
  ExtrinsicsConfig cfg;
  cfg.camera_in_base = {0.2, -1.2, 0.1};
  const auto h = estimate_direction({0.3, 0.4, 2}, cfg);
  EXPECT_NEAR(h.height, 1.2 - 0.4, 1e-12);
}

TEST(Localize, NoiselessFrontalRecoversTruth) {
  const SyntheticScene s = scene_at(3.0, 0.0, 0.0);
  const LocalizeResult r = localize(bundle_of(s), {}, {});
  ASSERT_EQ(r.poses.size(), 1u);
  const StairPose& p = r.poses[0].pose;
  EXPECT_NEAR(p.position.x, s.truth.position.x, 1e-3);
  EXPECT_NEAR(p.position.y, s.truth.position.y, 1e-3);
  EXPECT_NEAR(p.position.z, s.truth.position.z, 1e-3);
  EXPECT_LT(std::abs(wrap_full_turn(p.angle - s.truth.angle)) * 180 / kPi, 0.1);
  EXPECT_EQ(p.direction, Direction::Up);
  EXPECT_EQ(p.n_lines, s.truth_segments.segments.size());
}

TEST(Localize, YawedAndLateralScenes) {
  // Perspective spreads the image slopes of yawed nosings, so the default
  // slope tolerance may drop some; a wide tolerance keeps them all.
  LocalizerParams wide;
  wide.slope.tol = 0.5;
  for (double yaw : {-20.0, -10.0, 10.0, 25.0})
    for (double lat : {-1.0, 0.0, 1.0}) {
      const SyntheticScene s = scene_at(3.0, lat, yaw * kPi / 180);
      const LocalizeResult r = localize(bundle_of(s), {}, {});
      ASSERT_EQ(r.poses.size(), 1u) << yaw << " " << lat;
      EXPECT_LT(std::abs(wrap_full_turn(r.poses[0].pose.angle - s.truth.angle)) * 180 / kPi, 0.1) << yaw << " " << lat;
      if (r.boxes[0].outlier_indices.empty()) {
        EXPECT_NEAR(r.poses[0].pose.position.z, s.truth.position.z, 1e-3);
      }

      const StairPose p = localize(bundle_of(s), {}, wide).poses.at(0).pose;
      EXPECT_NEAR(p.position.x, s.truth.position.x, 1e-3) << yaw << " " << lat;
      EXPECT_NEAR(p.position.y, s.truth.position.y, 1e-3) << yaw << " " << lat;
      EXPECT_NEAR(p.position.z, s.truth.position.z, 1e-3) << yaw << " " << lat;
      EXPECT_LT(std::abs(wrap_full_turn(p.angle - s.truth.angle)) * 180 / kPi, 0.1) << yaw << " " << lat;
    }
}

TEST(Localize, DownStairs) {
  // A level camera only sees lower nosings over the top edge when it stands
  // high and close, which needs a wide field of view.
  const Intrinsics wide(300, 300, 319.5, 239.5, 640, 480);
  ExtrinsicsConfig mount;
  mount.camera_in_base = {0.0, -1.2, 0.0};
  SceneOptions opt;
  opt.extrinsics = mount;
  const SyntheticScene s = build_scene(StaircaseSpec::on_floor(1.6, 0.0, 0.0, 1.2, Direction::Down), wide, opt);
  ASSERT_GE(s.truth_segments.segments.size(), 3u);
  const LocalizeResult r = localize(bundle_of(s), mount, {});
  ASSERT_EQ(r.poses.size(), 1u);
  EXPECT_EQ(r.poses[0].pose.direction, Direction::Down);
  EXPECT_NEAR(r.poses[0].pose.height, s.truth.height, 1e-3);
  EXPECT_LT(r.poses[0].pose.height, -0.15);
}

TEST(Localize, ZeroBoxes) {
  SyntheticScene s = scene_at(3.0, 0.0, 0.0);
  s.detections.boxes.clear();
  const LocalizeResult r = localize(bundle_of(s), {}, {});
  EXPECT_TRUE(r.poses.empty());
  EXPECT_TRUE(r.no_detection);
  EXPECT_TRUE(r.boxes.empty());
}

TEST(Localize, DisagreeingSlopesReportInsufficientConsensus) {
  FrameBundle b{std::nullopt, constant_depth(2.0f), kCam, {"f", {}}};
  BoxDetection box;
  box.box = {100, 100, 300, 300, 0.9};
  box.segments.offset = {100, 100};
  for (double a : {0.0, 0.5, 1.0, 1.5}) {
    box.segments.segments.push_back(
        LineSegmentTP::from_endpoints({100 - 60 * std::cos(a), 100 - 60 * std::sin(a)}, {100 + 60 * std::cos(a), 100 + 60 * std::sin(a)}));
  }
  b.detections.boxes.push_back(box);
  const LocalizeResult r = localize(b, {}, {});
  EXPECT_TRUE(r.poses.empty());
  ASSERT_EQ(r.boxes.size(), 1u);
  ASSERT_TRUE(r.boxes[0].failure.has_value());
  EXPECT_EQ(*r.boxes[0].failure, ErrorCode::InsufficientConsensus);
}

TEST(Localize, MalformedBundleThrows) {
  FrameBundle b{std::nullopt, DepthFrame(10, 10), kCam, {"f", {}}};
  EXPECT_THROW(localize(b, {}, {}), Error);
}

TEST(Localize, PositionIsMeanOfInlierLiftedPoints) {
  CorruptionSpec c;
  c.outlier_segments = 2;
  c.depth_noise = 0.01;
  const SyntheticScene s = corrupt(scene_at(3.0, 0.3, 0.1), c, 11);
  const LocalizeResult r = localize(bundle_of(s), {}, {});
  ASSERT_EQ(r.poses.size(), 1u);
  const BoxDetection& box = s.detections.boxes[0];
  SegmentSet inliers;
  inliers.offset = crop_roi(box.box, 640, 480).offset;
  for (std::size_t i : r.boxes[0].inlier_indices) inliers.segments.push_back(box.segments.segments[i]);
  EXPECT_EQ(r.boxes[0].outlier_indices.size(), 2u);
  const auto lifted = lift_segments(to_full_frame(inliers, 640, 480), s.depth, kCam, 5);
  std::vector<oracle::P3> pts;
  for (const auto& l : lifted)
    for (const auto& p : l.points) pts.push_back({p.x, p.y, p.z});
  const oracle::P3 ref = oracle::compensated_mean(pts);
  const Point3& p = r.poses[0].pose.position;
  EXPECT_EQ(r.poses[0].pose.n_points, pts.size());
  EXPECT_NEAR(p.x, ref.x, 1e-12);
  EXPECT_NEAR(p.y, ref.y, 1e-12);
  EXPECT_NEAR(p.z, ref.z, 1e-12);
}

TEST(Localize, TranslationEquivarianceOfPosition) {
  const SyntheticScene s = scene_at(3.0, 0.0, 0.2);
  auto lifted = lift_segments(s.truth_segments, s.depth, kCam, 5);
  const Point3 base = estimate_position(lifted);
  const Point3 t{0.37, -0.25, 1.5};
  for (auto& l : lifted)
    for (auto& p : l.points) p = p + t;
  const Point3 moved = estimate_position(lifted);
  EXPECT_NEAR(moved.x - base.x, t.x, 1e-12);
  EXPECT_NEAR(moved.y - base.y, t.y, 1e-12);
  EXPECT_NEAR(moved.z - base.z, t.z, 1e-12);
}

TEST(Localize, PoseInvariants) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> dist(1.5, 4.0), lat(-0.6, 0.6), yaw(-0.4, 0.4);
  std::size_t poses = 0;
  for (int i = 0; i < 20; ++i) {
    CorruptionSpec c;
    c.depth_noise = 0.01;
    c.segment_jitter = 1.0;
    c.outlier_segments = 1;
    const SyntheticScene s = corrupt(scene_at(dist(rng), lat(rng), yaw(rng)), c, i);
    LocalizerParams params;
    params.seed = i;
    const LocalizeResult r = localize(bundle_of(s), {}, params);
    for (const auto& rec : r.poses) {
      const StairPose& p = rec.pose;
      const Quaternion& q = p.orientation;
      ASSERT_NEAR(std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z), 1.0, 1e-9);
      ASSERT_NEAR(quaternion_to_angle(q, {}), p.angle, 1e-9);
      ASSERT_GE(p.angle, -kPi);
      ASSERT_LT(p.angle, kPi);
      const int branches = (p.height > 0.15) + (p.height < -0.15) + (std::abs(p.height) <= 0.15);
      ASSERT_EQ(branches, 1);
      ASSERT_EQ(p.direction, classify_height(p.height, 0.15));
      ++poses;
    }
  }
  EXPECT_GE(poses, 15u);
}

TEST(Localize, Deterministic) {
  CorruptionSpec c;
  c.depth_noise = 0.01;
  c.segment_jitter = 1.0;
  c.outlier_segments = 2;
  const SyntheticScene s = corrupt(scene_at(3.0, 0.0, 0.0), c, 5);
  LocalizerParams params;
  params.seed = 77;
  const LocalizeResult a = localize(bundle_of(s), {}, params);
  const LocalizeResult b = localize(bundle_of(s), {}, params);
  ASSERT_EQ(a.poses.size(), b.poses.size());
  for (std::size_t i = 0; i < a.poses.size(); ++i) {
    const StairPose &p = a.poses[i].pose, &q = b.poses[i].pose;
    EXPECT_EQ(p.position, q.position);
    EXPECT_EQ(p.angle, q.angle);
    EXPECT_EQ(p.orientation, q.orientation);
    EXPECT_EQ(p.height, q.height);
    EXPECT_EQ(p.residual_mse, q.residual_mse);
  }
}

TEST(Localize, MirroredAxisFlipsOutputs) {
  const SyntheticScene s = scene_at(3.0, 0.5, 0.2);
  LocalizerParams left;
  left.x_axis = XAxis::Left;
  const StairPose r = localize(bundle_of(s), {}, {}).poses.at(0).pose;
  const StairPose l = localize(bundle_of(s), {}, left).poses.at(0).pose;
  EXPECT_EQ(l.position.x, -r.position.x);
  EXPECT_EQ(l.position.z, r.position.z);
  EXPECT_NEAR(l.angle, -r.angle, 1e-15);
}

TEST(Localize, PointModeAlsoRecoversTruth) {
  const SyntheticScene s = scene_at(3.0, 0.0, 0.15);
  LocalizerParams params;
  params.ground_mode = GroundOutlierMode::Points;
  const StairPose p = localize(bundle_of(s), {}, params).poses.at(0).pose;
  EXPECT_LT(std::abs(wrap_full_turn(p.angle - s.truth.angle)) * 180 / kPi, 0.1);
}
