#include "stairloc/stair_localizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "stairloc/angles.hpp"
#include "stairloc/seeding.hpp"
#include "stairloc/simd/kernels.hpp"

namespace stairloc {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Up: return "up";
    case Direction::Down: return "down";
    case Direction::Ambiguous: return "ambiguous";
  }
  return "ambiguous";
}

Direction parse_direction(std::string_view s) {
  if (s == "up") return Direction::Up;
  if (s == "down") return Direction::Down;
  if (s == "ambiguous") return Direction::Ambiguous;
  throw Error(ErrorCode::SchemaError, "unknown direction '" + std::string(s) + "'");
}

void ExtrinsicsConfig::validate() const {
  const Eigen::Matrix3d err = base_from_camera * base_from_camera.transpose() - Eigen::Matrix3d::Identity();
  if (err.cwiseAbs().maxCoeff() > 1e-9 || base_from_camera.determinant() < 0.0)
    throw Error(ErrorCode::InvariantError, "camera-to-base rotation orthonormal within 1e-9");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvariantError, "direction threshold epsilon > 0");
  if (std::abs(norm(gravity) - 1.0) > 1e-9) throw Error(ErrorCode::InvariantError, "gravity axis is a unit vector");
}

GroundFrame GroundFrame::from_gravity(const Point3& gravity) {
  const double n = norm(gravity);
  if (!(n > 0.0)) throw Error(ErrorCode::InvariantError, "gravity axis must be non-zero");
  const Point3 g = (1.0 / n) * gravity;
  Point3 ref{1.0, 0.0, 0.0};
  if (std::abs(dot(ref, g)) > 0.9) ref = {0.0, 0.0, 1.0};
  Point3 e1 = ref - dot(ref, g) * g;
  e1 = (1.0 / norm(e1)) * e1;
  return {g, e1, cross(e1, g)};
}

Vec2 ground_project(const Point3& p, const GroundFrame& frame) { return {dot(p, frame.e1), dot(p, frame.e2)}; }

Vec2 ground_project(const Point3& p, const ExtrinsicsConfig& cfg) {
  return ground_project(p, GroundFrame::from_gravity(cfg.gravity));
}

std::vector<LiftedSegment> lift_segments(const SegmentSet& set, const DepthFrame& depth, const Intrinsics& k,
                                         std::size_t min_points) {
  const auto& kern = simd::kernels();
  const simd::PinholeParams pk{k.fx(), k.fy(), k.cx(), k.cy()};
  std::vector<LiftedSegment> out;
  std::vector<double> u, v, d, x, y, z;
  for (std::size_t i = 0; i < set.segments.size(); ++i) {
    const auto pixels = rasterize(set.segments[i], set.offset, depth.width(), depth.height());
    u.clear();
    v.clear();
    d.clear();
    for (const GridPixel& p : pixels) {
      const float s = depth.at(p.u, p.v);
      if (!DepthFrame::is_valid(s)) continue;
      u.push_back(p.u);
      v.push_back(p.v);
      d.push_back(s);
    }
    if (u.size() < std::max<std::size_t>(min_points, 1)) continue;
    x.resize(u.size());
    y.resize(u.size());
    z.resize(u.size());
    kern.unproject(pk, u.data(), v.data(), d.data(), u.size(), x.data(), y.data(), z.data());
    LiftedSegment seg;
    seg.source = i;
    seg.rasterized = pixels.size();
    seg.valid_fraction = static_cast<double>(u.size()) / static_cast<double>(pixels.size());
    seg.points.reserve(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) seg.points.push_back({x[j], y[j], z[j]});
    out.push_back(std::move(seg));
  }
  if (out.empty()) {
    std::ostringstream os;
    os << "no segment has " << min_points << " pixels with valid depth (" << set.segments.size() << " segments)";
    throw Error(ErrorCode::NoValidDepth, os.str());
  }
  return out;
}

Point3 estimate_position(std::span<const LiftedSegment> lifted) {
  std::vector<double> x, y, z;
  for (const auto& s : lifted)
    for (const auto& p : s.points) {
      x.push_back(p.x);
      y.push_back(p.y);
      z.push_back(p.z);
    }
  if (x.empty()) throw Error(ErrorCode::EmptyCloud, "no lifted points");
  const simd::Sum3 s = simd::kernels().sum3(x.data(), y.data(), z.data(), x.size());
  const double n = static_cast<double>(x.size());
  return {s.x / n, s.y / n, s.z / n};
}

namespace {

struct TlsFit {
  Vec2 centroid;
  double angle;
  double residual_mse;
};

TlsFit total_least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto& kern = simd::kernels();
  const double n = static_cast<double>(x.size());
  const simd::Sum3 s = kern.sum3(x.data(), y.data(), y.data(), x.size());
  const double mx = s.x / n;
  const double my = s.y / n;
  const simd::Moments2 m = kern.moments2(x.data(), y.data(), x.size(), mx, my);
  const double cxx = m.sxx / n, cxy = m.sxy / n, cyy = m.syy / n;
  const double half_diff = 0.5 * (cxx - cyy);
  const double smallest = 0.5 * (cxx + cyy) - std::hypot(half_diff, cxy);
  return {{mx, my}, fold_half_turn(0.5 * std::atan2(2.0 * cxy, cxx - cyy)), std::max(0.0, smallest)};
}

}  // namespace

GroundLine fit_ground_line(std::span<const Vec2> points, double inlier_tol, std::uint64_t seed) {
  if (points.size() < 2) throw Error(ErrorCode::TooFewPoints, "a ground line needs at least two points");
  double spread = 0.0;
  for (const auto& p : points) spread = std::max(spread, std::hypot(p.x - points[0].x, p.y - points[0].y));
  if (spread <= 1e-9) throw Error(ErrorCode::DegenerateCluster, "projected points coincide");

  std::vector<std::size_t> use;
  if (inlier_tol > 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
    std::size_t best = 0;
    double best_sq = std::numeric_limits<double>::infinity();
    const std::size_t pairs = points.size() * (points.size() - 1) / 2;
    const std::size_t iters = std::min<std::size_t>(100, pairs);
    std::vector<std::size_t> cand;
    for (std::size_t it = 0; it < iters; ++it) {
      const std::size_t i = pick(rng);
      std::size_t j = pick(rng);
      if (i == j) j = (j + 1) % points.size();
      const double dx = points[j].x - points[i].x, dy = points[j].y - points[i].y;
      const double len = std::hypot(dx, dy);
      if (len <= 1e-12) continue;
      cand.clear();
      double sq = 0.0;
      for (std::size_t k = 0; k < points.size(); ++k) {
        const double dist = std::abs((points[k].x - points[i].x) * dy - (points[k].y - points[i].y) * dx) / len;
        if (dist <= inlier_tol) {
          cand.push_back(k);
          sq += dist * dist;
        }
      }
      if (cand.size() > best || (cand.size() == best && sq < best_sq)) {
        best = cand.size();
        best_sq = sq;
        use = cand;
      }
    }
    if (use.size() < 2) use.clear();
  }

  std::vector<double> x, y;
  if (use.empty()) {
    for (const auto& p : points) {
      x.push_back(p.x);
      y.push_back(p.y);
    }
  } else {
    for (std::size_t k : use) {
      x.push_back(points[k].x);
      y.push_back(points[k].y);
    }
  }
  const TlsFit fit = total_least_squares(x, y);
  return {fit.angle, fit.centroid, fit.residual_mse, x.size()};
}

GroundLineSplit filter_ground_lines(std::span<const GroundLine> lines, double residual_tol,
                                    const ConsensusParams& consensus) {
  if (lines.empty()) throw Error(ErrorCode::AllRejected, "no ground lines");
  GroundLineSplit split;
  std::vector<std::size_t> survivors;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].residual_mse <= residual_tol)
      survivors.push_back(i);
    else
      split.rejected_indices.push_back(i);
  }
  if (survivors.empty()) {
    std::ostringstream os;
    os << "all " << lines.size() << " ground lines exceed residual " << residual_tol << " m^2";
    throw Error(ErrorCode::AllRejected, os.str());
  }
  std::vector<double> angles;
  for (std::size_t i : survivors) angles.push_back(lines[i].angle);
  ConsensusResult c;
  try {
    c = angular_consensus(angles, consensus);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientConsensus) throw;
    throw Error(ErrorCode::AllRejected, std::string("ground-line angles disagree: ") + e.what());
  }
  for (std::size_t k : c.inliers) split.kept_indices.push_back(survivors[k]);
  for (std::size_t k : c.outliers) split.rejected_indices.push_back(survivors[k]);
  std::sort(split.rejected_indices.begin(), split.rejected_indices.end());
  for (std::size_t i : split.kept_indices) split.kept.push_back(lines[i]);
  for (std::size_t i : split.rejected_indices) split.rejected.push_back(lines[i]);
  return split;
}

double estimate_angle(std::span<const GroundLine> kept) {
  if (kept.empty()) throw Error(ErrorCode::EmptyInput, "no ground lines to average");
  std::vector<double> angles;
  Vec2 bearing;
  for (const auto& l : kept) {
    angles.push_back(l.angle);
    bearing.x += l.centroid.x;
    bearing.y += l.centroid.y;
  }
  const double folded = line_angle_mean(angles);
  // The stair's forward axis (lateral axis turned +90 degrees) points away
  // from the camera.
  const double facing = -std::sin(folded) * bearing.x + std::cos(folded) * bearing.y;
  const double scale = std::hypot(bearing.x, bearing.y);
  if (facing < 0.0 && std::abs(facing) > 1e-12 * scale) return wrap_full_turn(folded + kPi);
  return folded;
}

Quaternion angle_to_quaternion(double theta, const ExtrinsicsConfig& cfg) {
  const GroundFrame f = GroundFrame::from_gravity(cfg.gravity);
  const double s = std::sin(0.5 * theta);
  return {std::cos(0.5 * theta), -f.gravity.x * s, -f.gravity.y * s, -f.gravity.z * s};
}

double quaternion_to_angle(const Quaternion& q, const ExtrinsicsConfig& cfg) {
  const GroundFrame f = GroundFrame::from_gravity(cfg.gravity);
  const double along_up = -(q.x * f.gravity.x + q.y * f.gravity.y + q.z * f.gravity.z);
  return wrap_full_turn(2.0 * std::atan2(along_up, q.w));
}

Direction classify_height(double height, double epsilon) {
  if (height > epsilon) return Direction::Up;
  if (height < -epsilon) return Direction::Down;
  return Direction::Ambiguous;
}

DirectionEstimate estimate_direction(const Point3& stair_position, const ExtrinsicsConfig& cfg) {
  const Eigen::Vector3d p(stair_position.x, stair_position.y, stair_position.z);
  const Eigen::Vector3d g(cfg.gravity.x, cfg.gravity.y, cfg.gravity.z);
  const Eigen::Vector3d in_base = cfg.base_from_camera * p + cfg.camera_in_base;
  const double h = -(cfg.base_from_camera * g).dot(in_base);
  return {h, classify_height(h, cfg.epsilon)};
}

namespace {

StairPose localize_box(const BoxDetection& det, const FrameBundle& bundle, const ExtrinsicsConfig& cfg,
                       const LocalizerParams& params, std::uint64_t seed, BoxReport& report) {
  const Intrinsics& k = bundle.intrinsics;
  const CropRect crop = crop_roi(det.box, k.width(), k.height());

  SegmentSet local = det.segments;
  local.offset = crop.offset;
  report.n_segments = local.segments.size();

  auto [usable, dropped] = drop_short_segments(local, params.min_segment_length);
  report.short_indices = dropped;
  std::vector<std::size_t> usable_index;
  for (std::size_t i = 0, d = 0; i < local.segments.size(); ++i) {
    if (d < dropped.size() && dropped[d] == i) {
      ++d;
      continue;
    }
    usable_index.push_back(i);
  }
  if (usable.segments.empty())
    throw Error(ErrorCode::EmptyInput, "no segment of at least " + std::to_string(params.min_segment_length) + " px");

  ConsensusParams slope = params.slope;
  slope.seed = mix_seed(seed, 0);
  ParallelSplit split = ransac_parallel_filter(usable, slope);
  for (std::size_t i : split.inlier_indices) report.inlier_indices.push_back(usable_index[i]);
  for (std::size_t i : split.outlier_indices) report.outlier_indices.push_back(usable_index[i]);

  const SegmentSet full = to_full_frame(split.inliers, k.width(), k.height());
  const std::vector<LiftedSegment> lifted = lift_segments(full, bundle.depth, k, params.min_points);
  report.n_lifted = lifted.size();

  StairPose pose;
  pose.position = estimate_position(lifted);
  for (const auto& s : lifted) pose.n_points += s.points.size();

  const GroundFrame gf = GroundFrame::from_gravity(cfg.gravity);
  std::vector<GroundLine> lines;
  std::size_t unfit = 0;
  const double point_tol = params.ground_mode == GroundOutlierMode::Points ? params.ground_inlier_tol : 0.0;
  for (std::size_t i = 0; i < lifted.size(); ++i) {
    std::vector<Vec2> pts;
    pts.reserve(lifted[i].points.size());
    for (const auto& p : lifted[i].points) pts.push_back(ground_project(p, gf));
    try {
      lines.push_back(fit_ground_line(pts, point_tol, mix_seed(seed, 1 + i)));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateCluster && e.code() != ErrorCode::TooFewPoints) throw;
      ++unfit;
    }
  }
  if (lines.empty()) throw Error(ErrorCode::AllRejected, "no lifted segment yields a ground line");

  ConsensusParams ground = params.ground;
  ground.seed = mix_seed(seed, 1 + lifted.size());
  const GroundLineSplit gsplit = filter_ground_lines(lines, params.ground_residual_tol, ground);
  report.n_lines_kept = gsplit.kept.size();
  report.n_lines_rejected = gsplit.rejected.size() + unfit;

  pose.angle = estimate_angle(gsplit.kept);
  pose.n_lines = gsplit.kept.size();
  double residual = 0.0;
  for (const auto& l : gsplit.kept) residual += l.residual_mse;
  pose.residual_mse = residual / static_cast<double>(gsplit.kept.size());

  pose.orientation = angle_to_quaternion(pose.angle, cfg);
  const DirectionEstimate dir = estimate_direction(pose.position, cfg);
  pose.height = dir.height;
  pose.direction = dir.direction;

  if (params.x_axis == XAxis::Left) {
    pose.position.x = -pose.position.x;
    pose.angle = wrap_full_turn(-pose.angle);
    pose.orientation = angle_to_quaternion(pose.angle, cfg);
  }
  return pose;
}

}  // namespace

LocalizeResult localize(const FrameBundle& bundle, const ExtrinsicsConfig& cfg, const LocalizerParams& params) {
  validate_bundle(bundle);
  cfg.validate();
  LocalizeResult result;
  result.no_detection = bundle.detections.boxes.empty();
  for (std::size_t b = 0; b < bundle.detections.boxes.size(); ++b) {
    BoxReport report;
    report.box_index = b;
    try {
      StairPose pose = localize_box(bundle.detections.boxes[b], bundle, cfg, params, mix_seed(params.seed, b), report);
      result.poses.push_back({bundle.detections.frame, b, pose});
    } catch (const Error& e) {
      report.failure = e.code();
      report.message = e.what();
    }
    result.boxes.push_back(std::move(report));
  }
  return result;
}

}  // namespace stairloc
