#include "stairloc/scene_synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "stairloc/angles.hpp"
#include "stairloc/seeding.hpp"

namespace stairloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Staircase frame: lateral axis, forward axis (away from the camera at yaw 0)
// and up, all in camera coordinates with gravity along +Y.
struct StairFrame {
  Point3 origin, lateral, forward, up;

  explicit StairFrame(const StaircaseSpec& s)
      : origin(s.position),
        lateral{std::cos(s.yaw), 0.0, std::sin(s.yaw)},
        forward{-std::sin(s.yaw), 0.0, std::cos(s.yaw)},
        up{0.0, -1.0, 0.0} {}

  Point3 at(double l, double f, double h) const { return origin + l * lateral + f * forward + h * up; }
};

simd::Quad quad(const Point3& o, const Point3& a, const Point3& b, double lo_a, double hi_a, double lo_b,
                double hi_b) {
  const double oo[3] = {o.x, o.y, o.z};
  const double aa[3] = {a.x, a.y, a.z};
  const double bb[3] = {b.x, b.y, b.z};
  return simd::make_quad(oo, aa, bb, lo_a, hi_a, lo_b, hi_b);
}

double nosing_height(const StaircaseSpec& s, int k) {
  return s.direction == Direction::Down ? -k * s.rise : k * s.rise;
}

// Depth of the nearest surface along the pixel ray (u, v); 0 when nothing is hit.
struct RayCaster {
  const Intrinsics& k;
  const std::vector<simd::Quad>& quads;

  // Nearest hit over s rays spread down the pixel's height, all through the
  // pixel's centre column. Vertical faces keep their depth across the rays.
  void row(int v, int s, std::vector<double>& dir_x, std::vector<double>& dir_y, std::vector<double>& t,
           std::vector<double>& best) const {
    const int w = k.width();
    dir_x.resize(w);
    dir_y.resize(w);
    t.resize(w);
    best.assign(w, 0.0);
    for (int u = 0; u < w; ++u) dir_x[u] = (u - k.cx()) / k.fx();
    for (int sy = 0; sy < s; ++sy) {
      const double ov = s == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(sy) / (s - 1);
      std::fill(dir_y.begin(), dir_y.end(), (v + ov - k.cy()) / k.fy());
      simd::kernels().raycast(dir_x.data(), dir_y.data(), dir_x.size(), quads.data(), quads.size(), t.data());
      for (int u = 0; u < w; ++u)
        if (t[u] > 0.0 && (best[u] == 0.0 || t[u] < best[u])) best[u] = t[u];
    }
  }

  double towards(const Point3& p) const {
    const double dx = p.x / p.z;
    const double dy = p.y / p.z;
    double t = 0.0;
    simd::kernels().raycast(&dx, &dy, 1, quads.data(), quads.size(), &t);
    return t;
  }
};

}  // namespace

void StaircaseSpec::validate() const {
  if (steps < 1) throw Error(ErrorCode::SpecError, "steps >= 1");
  if (!(rise > 0.0 && run > 0.0 && width > 0.0)) throw Error(ErrorCode::SpecError, "rise, run and width must be > 0");
  if (direction == Direction::Ambiguous) throw Error(ErrorCode::SpecError, "staircase direction must be up or down");
  if (!std::isfinite(position.x) || !std::isfinite(position.y) || !std::isfinite(position.z) || !std::isfinite(yaw))
    throw Error(ErrorCode::SpecError, "staircase pose must be finite");
}

StaircaseSpec StaircaseSpec::on_floor(double distance, double lateral, double yaw, double camera_height,
                                      Direction direction) {
  StaircaseSpec s;
  s.direction = direction;
  s.yaw = yaw;
  const double first_nosing_height = direction == Direction::Down ? 0.0 : s.rise;
  s.position = {lateral, camera_height - first_nosing_height, distance};
  return s;
}

void CorruptionSpec::validate() const {
  if (!(depth_noise >= 0.0) || !(segment_jitter >= 0.0)) throw Error(ErrorCode::SpecError, "sigma >= 0");
  if (!(dropout >= 0.0 && dropout <= 1.0)) throw Error(ErrorCode::SpecError, "dropout in [0, 1]");
  if (outlier_segments < 0) throw Error(ErrorCode::SpecError, "outlier count >= 0");
  if (!(outlier_angle_min >= 0.0 && outlier_angle_min <= outlier_angle_max && outlier_angle_max <= kPi / 2))
    throw Error(ErrorCode::SpecError, "0 <= outlier_angle_min <= outlier_angle_max <= pi/2");
  for (const auto& o : occluders)
    if (!(o.depth > 0.0) || !(o.u_min <= o.u_max && o.v_min <= o.v_max))
      throw Error(ErrorCode::SpecError, "occluder needs depth > 0 and an ordered rectangle");
}

bool CorruptionSpec::is_identity() const {
  return depth_noise == 0.0 && segment_jitter == 0.0 && outlier_segments == 0 && dropout == 0.0 && occluders.empty();
}

int outliers_for_fraction(std::size_t inlier_count, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw Error(ErrorCode::SpecError, "outlier fraction in [0, 1)");
  return static_cast<int>(std::ceil(fraction * static_cast<double>(inlier_count) / (1.0 - fraction) - 1e-9));
}

std::vector<simd::Quad> staircase_quads(const StaircaseSpec& s) {
  s.validate();
  const StairFrame fr(s);
  const int n = s.steps;
  const double hw = 0.5 * s.width;
  std::vector<simd::Quad> q;
  if (s.direction == Direction::Up) {
    for (int k = 0; k < n; ++k) {
      const double f0 = k * s.run;
      const double h0 = (k - 1) * s.rise;
      q.push_back(quad(fr.at(-hw, f0, h0), fr.lateral, fr.up, 0.0, s.width, 0.0, s.rise));          // riser
      q.push_back(quad(fr.at(-hw, f0, k * s.rise), fr.lateral, fr.forward, 0.0, s.width, 0.0, s.run));  // tread
      for (double side : {-hw, hw})
        q.push_back(quad(fr.at(side, f0, h0), fr.forward, fr.up, 0.0, (n - k) * s.run, 0.0, s.rise));
    }
    q.push_back(quad(fr.at(-hw, n * s.run, -s.rise), fr.lateral, fr.up, 0.0, s.width, 0.0, n * s.rise));
    q.push_back(quad(fr.at(0.0, 0.0, -s.rise), fr.lateral, fr.forward, -kInf, kInf, -kInf, kInf));
  } else {
    const double bottom = -n * s.rise;
    q.push_back(quad(fr.at(0.0, 0.0, 0.0), fr.lateral, fr.forward, -kInf, kInf, -kInf, 0.0));  // landing
    for (int k = 0; k < n; ++k)
      q.push_back(quad(fr.at(-hw, k * s.run, -(k + 1) * s.rise), fr.lateral, fr.up, 0.0, s.width, 0.0, s.rise));
    for (int k = 1; k < n; ++k) {
      const double f0 = (k - 1) * s.run;
      q.push_back(quad(fr.at(-hw, f0, -k * s.rise), fr.lateral, fr.forward, 0.0, s.width, 0.0, s.run));
      for (double side : {-hw, hw})
        q.push_back(quad(fr.at(side, f0, bottom), fr.forward, fr.up, 0.0, s.run, 0.0, (n - k) * s.rise));
    }
    q.push_back(quad(fr.at(0.0, 0.0, bottom), fr.lateral, fr.forward, -kInf, kInf, 0.0, kInf));  // lower floor
    q.push_back(quad(fr.at(0.0, 0.0, bottom), fr.lateral, fr.up, -kInf, -hw, 0.0, n * s.rise));  // ledge
    q.push_back(quad(fr.at(0.0, 0.0, bottom), fr.lateral, fr.up, hw, kInf, 0.0, n * s.rise));
  }
  return q;
}

SyntheticScene build_scene(const StaircaseSpec& spec, const Intrinsics& k, const SceneOptions& options) {
  spec.validate();
  options.extrinsics.validate();
  if (!(options.max_range > 0.0)) throw Error(ErrorCode::SpecError, "max_range > 0");
  const std::vector<simd::Quad> quads = staircase_quads(spec);
  const RayCaster caster{k, quads};

  DepthFrame depth(k.width(), k.height());
  std::vector<double> dir_x, dir_y, t, best;
  const int footprint = std::max(1, options.footprint_samples);
  for (int v = 0; v < k.height(); ++v) {
    caster.row(v, footprint, dir_x, dir_y, t, best);
    for (int u = 0; u < k.width(); ++u) depth.at(u, v) = best[u] <= options.max_range ? static_cast<float>(best[u]) : 0.0f;
  }

  // Visible part of each nosing, found by sampling it and checking that the
  // ray towards each sample stops at the sample. Samples whose raster pixel
  // has its centre ray pass beside the staircase are dropped too; that pixel
  // reads whatever lies beyond the end of the nosing.
  const StairFrame fr(spec);
  const double hw = 0.5 * spec.width;
  const int samples = std::max(2, options.visibility_samples);
  SegmentSet truth;
  std::vector<int> nosings;
  for (int n = 0; n < spec.steps; ++n) {
    const double h = nosing_height(spec, n);
    const double f = n * spec.run;
    int first = -1, last = -1;
    for (int i = 0; i < samples; ++i) {
      const Point3 p = fr.at(-hw + spec.width * i / (samples - 1), f, h);
      if (!(p.z > 1e-6)) continue;
      const Projection pr = project(p, k);
      if (pr.pixel.u < 0.0 || pr.pixel.v < 0.0 || pr.pixel.u > k.width() - 1 || pr.pixel.v > k.height() - 1) continue;
      const double hit = caster.towards(p);
      if (!(hit > 0.0) || std::abs(hit - p.z) > 1e-6 * p.z) continue;
      const GridPixel g = round_to_grid(pr.pixel);
      const Point3 ray{(g.u - k.cx()) / k.fx(), (g.v - k.cy()) / k.fy(), 1.0};
      const Point3 on_face = (dot(fr.forward, p) / dot(fr.forward, ray)) * ray;
      if (std::abs(dot(on_face - fr.at(0.0, f, h), fr.lateral)) > hw) continue;
      if (first < 0) first = i;
      last = i;
    }
    if (first < 0 || first == last) continue;
    const Point3 a = fr.at(-hw + spec.width * first / (samples - 1), f, h);
    const Point3 b = fr.at(-hw + spec.width * last / (samples - 1), f, h);
    const Pixel pa = project(a, k).pixel;
    const Pixel pb = project(b, k).pixel;
    const double visible_len = std::hypot(pb.u - pa.u, pb.v - pa.v);
    double fraction = static_cast<double>(last - first) / (samples - 1);
    const Point3 ea = fr.at(-hw, f, h), eb = fr.at(hw, f, h);
    if (ea.z > 1e-6 && eb.z > 1e-6) {
      const Pixel qa = project(ea, k).pixel, qb = project(eb, k).pixel;
      fraction = visible_len / std::hypot(qb.u - qa.u, qb.v - qa.v);
    }
    if (fraction + 1e-12 < options.min_visible_fraction || visible_len < options.min_segment_length) continue;
    truth.segments.push_back(LineSegmentTP::from_endpoints(pa, pb));
    nosings.push_back(n);
  }
  if (truth.segments.empty()) throw Error(ErrorCode::NotVisible, "no nosing projects inside the image");

  double u_lo = kInf, v_lo = kInf, u_hi = -kInf, v_hi = -kInf;
  for (const auto& s : truth.segments)
    for (const Pixel& p : {s.start(), s.end()}) {
      u_lo = std::min(u_lo, p.u);
      v_lo = std::min(v_lo, p.v);
      u_hi = std::max(u_hi, p.u);
      v_hi = std::max(v_hi, p.v);
    }
  BoundingBox box{std::max(0.0, std::floor(u_lo) - options.box_margin),
                  std::max(0.0, std::floor(v_lo) - options.box_margin),
                  std::min<double>(k.width(), std::ceil(u_hi) + options.box_margin),
                  std::min<double>(k.height(), std::ceil(v_hi) + options.box_margin), 1.0};
  BoxDetection det;
  det.box = box;
  det.segments.offset = {box.x_min, box.y_min};
  for (const auto& s : truth.segments) {
    LineSegmentTP local = s;
    local.root = {s.root.u - box.x_min, s.root.v - box.y_min};
    det.segments.segments.push_back(local);
  }

  SyntheticScene scene{spec, k, std::move(depth), truth, nosings, DetectionRecord{options.frame_id, {det}}, {}, {}};

  // Mean of the clean raster unprojected at the truth pixels.
  long double sx = 0, sy = 0, sz = 0;
  std::size_t count = 0;
  for (const auto& s : truth.segments) {
    for (const GridPixel& p : rasterize(s, {}, k.width(), k.height())) {
      const double tt = scene.depth.at(p.u, p.v);
      if (!(tt > 0.0)) continue;
      sx += (p.u - k.cx()) / k.fx() * tt;
      sy += (p.v - k.cy()) / k.fy() * tt;
      sz += tt;
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorCode::NotVisible, "truth segments see no surface");
  StairPose& pose = scene.truth;
  pose.position = {static_cast<double>(sx / count), static_cast<double>(sy / count), static_cast<double>(sz / count)};
  pose.angle = wrap_full_turn(spec.yaw);
  pose.orientation = angle_to_quaternion(pose.angle, options.extrinsics);
  pose.height = estimate_direction(pose.position, options.extrinsics).height;
  pose.direction = spec.direction;
  pose.n_points = count;
  pose.n_lines = truth.segments.size();
  pose.residual_mse = 0.0;
  return scene;
}

SyntheticScene corrupt(const SyntheticScene& scene, const CorruptionSpec& c, std::uint64_t seed) {
  c.validate();
  SyntheticScene out = scene;
  out.corruption = {true, c, seed};
  if (c.is_identity()) return out;

  auto& data = out.depth.data();
  const int w = out.depth.width();
  const int h = out.depth.height();

  for (const auto& o : c.occluders) {
    const int u0 = std::max(0, static_cast<int>(std::ceil(o.u_min)));
    const int v0 = std::max(0, static_cast<int>(std::ceil(o.v_min)));
    const int u1 = std::min(w - 1, static_cast<int>(std::floor(o.u_max)));
    const int v1 = std::min(h - 1, static_cast<int>(std::floor(o.v_max)));
    for (int v = v0; v <= v1; ++v)
      for (int u = u0; u <= u1; ++u) out.depth.at(u, v) = static_cast<float>(o.depth);
  }
  if (c.depth_noise > 0.0) {
    std::mt19937_64 rng(mix_seed(seed, 1));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (float& d : data) {
      if (!DepthFrame::is_valid(d)) continue;
      const double noisy = d + c.depth_noise * d * gauss(rng);
      d = noisy > 0.0 ? static_cast<float>(noisy) : 0.0f;
    }
  }
  if (c.dropout > 0.0) {
    std::mt19937_64 rng(mix_seed(seed, 2));
    std::bernoulli_distribution drop(c.dropout);
    for (float& d : data)
      if (drop(rng)) d = 0.0f;
  }

  const Intrinsics& k = out.intrinsics;
  std::mt19937_64 jitter_rng(mix_seed(seed, 3));
  std::mt19937_64 outlier_rng(mix_seed(seed, 4));
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> slopes;
  for (const auto& s : scene.truth_segments.segments) slopes.push_back(slope_angle(s));
  const double base_slope = slopes.empty() ? 0.0 : line_angle_mean(slopes);

  for (auto& det : out.detections.boxes) {
    const CropRect crop = crop_roi(det.box, k.width(), k.height());
    const double u_max = std::min(crop.x_max, static_cast<double>(k.width() - 1));
    const double v_max = std::min(crop.y_max, static_cast<double>(k.height() - 1));
    auto clamp_full = [&](Pixel p) {
      return Pixel{std::clamp(p.u, crop.x_min, u_max), std::clamp(p.v, crop.y_min, v_max)};
    };
    auto to_local = [&](const Pixel& a, const Pixel& b, double score) {
      LineSegmentTP s = LineSegmentTP::from_endpoints(a, b, score);
      s.root = {s.root.u - det.segments.offset.du, s.root.v - det.segments.offset.dv};
      return s;
    };
    if (c.segment_jitter > 0.0) {
      for (auto& s : det.segments.segments) {
        const Pixel a{s.start().u + det.segments.offset.du, s.start().v + det.segments.offset.dv};
        const Pixel b{s.end().u + det.segments.offset.du, s.end().v + det.segments.offset.dv};
        const double ja = jitter(jitter_rng), jb = jitter(jitter_rng), jc = jitter(jitter_rng), jd = jitter(jitter_rng);
        const Pixel na = clamp_full({a.u + c.segment_jitter * ja, a.v + c.segment_jitter * jb});
        const Pixel nb = clamp_full({b.u + c.segment_jitter * jc, b.v + c.segment_jitter * jd});
        if (std::hypot(nb.u - na.u, nb.v - na.v) >= 1.0) s = to_local(na, nb, s.score);
      }
    }
    for (int i = 0; i < c.outlier_segments; ++i) {
      for (int attempt = 0; attempt < 32; ++attempt) {
        const double sign = unit(outlier_rng) < 0.5 ? -1.0 : 1.0;
        const double offset = c.outlier_angle_min + (c.outlier_angle_max - c.outlier_angle_min) * unit(outlier_rng);
        const double angle = base_slope + sign * offset;
        const double len = std::max(12.0, (0.3 + 0.4 * unit(outlier_rng)) * std::min(crop.width(), crop.height()));
        const Pixel mid{crop.x_min + crop.width() * unit(outlier_rng), crop.y_min + crop.height() * unit(outlier_rng)};
        const double score = 0.5 + 0.5 * unit(outlier_rng);
        const Pixel a = clamp_full({mid.u - 0.5 * len * std::cos(angle), mid.v - 0.5 * len * std::sin(angle)});
        const Pixel b = clamp_full({mid.u + 0.5 * len * std::cos(angle), mid.v + 0.5 * len * std::sin(angle)});
        if (std::hypot(b.u - a.u, b.v - a.v) < 2.0) continue;
        det.segments.segments.push_back(to_local(a, b, score));
        break;
      }
    }
  }
  return out;
}

StairPose truth_pose(const SyntheticScene& scene) { return scene.truth; }

SceneOracleDetector::SceneOracleDetector(std::vector<std::shared_ptr<const SyntheticScene>> scenes) {
  for (auto& s : scenes) scenes_[s->detections.frame] = std::move(s);
}

DetectionRecord SceneOracleDetector::detect(const std::string& frame_id) {
  if (auto it = scenes_.find(frame_id); it != scenes_.end()) return it->second->detections;
  return DetectionRecord{frame_id, {}};
}

}  // namespace stairloc
