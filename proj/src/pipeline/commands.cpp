#include "stairloc/pipeline/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>

#include "stairloc/angles.hpp"
#include "stairloc/error.hpp"
#include "stairloc/irm_registry.hpp"
#include "stairloc/seeding.hpp"

namespace stairloc::pipeline {

namespace fs = std::filesystem;

namespace {

std::string frame_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", i);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
}

Json node_json(const StairNode& n) {
  Json j;
  j["id"] = n.id;
  j["position"] = {n.pose.position.x, n.pose.position.y, n.pose.position.z};
  j["theta_rad"] = n.pose.angle;
  j["direction"] = std::string(to_string(n.pose.direction));
  j["n_candidates"] = n.n_candidates;
  j["sigma_pos_m"] = n.sigma_pos;
  j["sigma_theta_rad"] = n.sigma_theta;
  return j;
}

Json box_json(const BoxReport& b) {
  Json j;
  j["box_index"] = b.box_index;
  j["status"] = b.failure ? std::string(to_string(*b.failure)) : std::string("ok");
  if (b.failure) j["message"] = b.message;
  j["segments"] = b.n_segments;
  j["short"] = b.short_indices;
  j["inliers"] = b.inlier_indices;
  j["outliers"] = b.outlier_indices;
  j["lifted"] = b.n_lifted;
  j["lines_kept"] = b.n_lines_kept;
  j["lines_rejected"] = b.n_lines_rejected;
  return j;
}

}  // namespace

void cmd_synth(const SynthSpec& spec, const std::optional<CorruptionConfig>& corruption, std::size_t count,
               std::uint64_t seed, const std::string& out_dir) {
  ensure_dir(out_dir);
  std::map<std::size_t, std::shared_ptr<const SyntheticScene>> clean;
  std::string manifest;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t ci = i % spec.configs.size();
    const SceneConfig& config = spec.configs[ci];
    if (!clean.count(ci)) {
      try {
        clean[ci] = std::make_shared<const SyntheticScene>(build_scene(config.stair, spec.intrinsics, spec.options));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::NotVisible) throw Error(ErrorCode::SpecError, config.name + ": " + e.what());
        throw;
      }
    }
    SyntheticScene scene = *clean[ci];
    if (corruption) scene = corrupt(scene, corruption->for_scene(scene.truth_segments.segments.size()), mix_seed(seed, i));
    const std::string id = frame_name(i);
    scene.detections.frame = id;
    const std::string bundle = "frames/" + id;
    save_bundle((fs::path(out_dir) / bundle).string(), scene);
    manifest += manifest_line({id, config.name, bundle, scene.truth});
  }
  write_text((fs::path(out_dir) / "manifest.jsonl").string(), manifest);
}

LocalizeSummary cmd_localize(const std::string& dataset_root, const RunConfig& cfg, const std::string& out_dir) {
  validate(cfg);
  const std::vector<ManifestEntry> manifest = load_manifest(dataset_root);
  ensure_dir(out_dir);
  IrmRegistry registry(cfg.registry);
  LocalizerParams params = cfg.params;
  params.seed = cfg.seed;

  LocalizeSummary summary;
  std::string poses, nodes, diagnostics;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const ManifestEntry& e = manifest[i];
    ++summary.frames;
    Json diag;
    diag["frame"] = e.frame;
    LocalizeResult result;
    try {
      const FrameBundle bundle = load_bundle((fs::path(dataset_root) / e.bundle).string(), e.frame);
      result = localize(bundle, cfg.extrinsics, params);
    } catch (const Error& err) {
      diag["status"] = std::string(to_string(err.code()));
      diag["message"] = err.what();
      diagnostics += diag.dump() + "\n";
      continue;
    }
    if (result.no_detection) {
      diag["status"] = "NoDetection";
    } else {
      diag["status"] = result.poses.empty() ? std::string(to_string(*result.boxes.front().failure)) : "ok";
      Json boxes = Json::array();
      for (const auto& b : result.boxes) boxes.push_back(box_json(b));
      diag["boxes"] = boxes;
    }
    diagnostics += diag.dump() + "\n";

    for (const auto& p : result.poses) {
      poses += pose_stream_line({p.frame, p.box_index, p.pose});
      ++summary.poses;
      const SubmitEvent ev = registry.submit({p.pose, static_cast<double>(i) * cfg.frame_period, p.frame});
      if (ev.kind == SubmitEvent::Kind::Published) {
        nodes += node_json(*ev.node).dump() + "\n";
        ++summary.nodes;
      }
    }
  }
  write_text((fs::path(out_dir) / "poses.jsonl").string(), poses);
  write_text((fs::path(out_dir) / "nodes.jsonl").string(), nodes);
  write_text((fs::path(out_dir) / "diagnostics.jsonl").string(), diagnostics);
  return summary;
}

EvalReport cmd_eval(const std::string& poses_path, const std::string& dataset_root, const std::string& out_dir) {
  const std::vector<PoseRow> poses = parse_pose_stream(read_text(poses_path));
  const EvalReport report = evaluate(poses, load_manifest(dataset_root));
  ensure_dir(out_dir);
  write_text((fs::path(out_dir) / "report.txt").string(), format_table(report));
  write_text((fs::path(out_dir) / "report.json").string(), report_to_json(report).dump(2) + "\n");
  return report;
}

namespace {

void draw_line(io::RgbImage& img, Pixel a, Pixel b, io::Rgb color, int thickness = 1) {
  const GridPixel ga = round_to_grid(a), gb = round_to_grid(b);
  int x = ga.u, y = ga.v;
  const int dx = std::abs(gb.u - x), sx = x < gb.u ? 1 : -1;
  const int dy = -std::abs(gb.v - y), sy = y < gb.v ? 1 : -1;
  int err = dx + dy;
  const int r = thickness / 2;
  for (;;) {
    for (int oy = -r; oy <= r; ++oy)
      for (int ox = -r; ox <= r; ++ox) img.set(x + ox, y + oy, color);
    if (x == gb.u && y == gb.v) break;
    const int e2 = 2 * err;
    if (e2 >= dy) err += dy, x += sx;
    if (e2 <= dx) err += dx, y += sy;
  }
}

void draw_arrow(io::RgbImage& img, const StairPose& pose, const Intrinsics& k, const ExtrinsicsConfig& cfg) {
  if (!(pose.position.z > 0.0)) return;
  const Pixel anchor = project(pose.position, k).pixel;
  const GroundFrame g = GroundFrame::from_gravity(cfg.gravity);
  const double fx = -std::sin(pose.angle), fy = std::cos(pose.angle);
  const Point3 forward = fx * g.e1 + fy * g.e2;
  double len = 0.4;
  Point3 tip3 = pose.position + len * forward;
  while (!(tip3.z > 0.05) && len > 0.01) tip3 = pose.position + (len *= 0.5) * forward;
  const Pixel tip = project(tip3, k).pixel;
  draw_line(img, anchor, tip, kArrowColor, 3);
  const double du = tip.u - anchor.u, dv = tip.v - anchor.v;
  const double l = std::hypot(du, dv);
  if (l > 1.0) {
    for (double side : {-1.0, 1.0}) {
      const double a = std::atan2(dv, du) + kPi + side * 0.5;
      draw_line(img, tip, {tip.u + 10.0 * std::cos(a), tip.v + 10.0 * std::sin(a)}, kArrowColor, 3);
    }
  }
  const GridPixel c = round_to_grid(anchor);
  for (int v = -2; v <= 2; ++v)
    for (int u = -2; u <= 2; ++u) img.set(c.u + u, c.v + v, kArrowColor);
}

io::RgbImage background(const FrameBundle& bundle) {
  const int w = bundle.intrinsics.width(), h = bundle.intrinsics.height();
  if (bundle.color_path) {
    io::RgbImage img = io::load_ppm(*bundle.color_path);
    if (img.width() == w && img.height() == h) return img;
  }
  float far = 0.0f;
  for (float d : bundle.depth.data())
    if (DepthFrame::is_valid(d)) far = std::max(far, d);
  io::RgbImage img(w, h);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const float d = bundle.depth.at(u, v);
      if (!DepthFrame::is_valid(d)) continue;
      const auto g = static_cast<std::uint8_t>(40.0 + 200.0 * (1.0 - d / far));
      img.at(u, v) = {g, g, g};
    }
  return img;
}

}  // namespace

io::RgbImage render_overlay(const FrameBundle& bundle, const LocalizeResult& result,
                            const std::optional<StairPose>& pose, const RunConfig& cfg) {
  io::RgbImage img = background(bundle);
  const int w = img.width(), h = img.height();
  for (std::size_t bi = 0; bi < bundle.detections.boxes.size(); ++bi) {
    const BoxDetection& det = bundle.detections.boxes[bi];
    const double x0 = std::clamp(det.box.x_min, 0.0, w - 1.0), x1 = std::clamp(det.box.x_max, 0.0, w - 1.0);
    const double y0 = std::clamp(det.box.y_min, 0.0, h - 1.0), y1 = std::clamp(det.box.y_max, 0.0, h - 1.0);
    draw_line(img, {x0, y0}, {x1, y0}, kBoxColor);
    draw_line(img, {x1, y0}, {x1, y1}, kBoxColor);
    draw_line(img, {x1, y1}, {x0, y1}, kBoxColor);
    draw_line(img, {x0, y1}, {x0, y0}, kBoxColor);

    std::vector<bool> inlier(det.segments.segments.size(), false);
    for (const auto& r : result.boxes)
      if (r.box_index == bi)
        for (std::size_t i : r.inlier_indices)
          if (i < inlier.size()) inlier[i] = true;
    const Displacement off = det.segments.offset;
    for (std::size_t i = 0; i < det.segments.segments.size(); ++i) {
      const LineSegmentTP& s = det.segments.segments[i];
      draw_line(img, s.start() + off, s.end() + off, inlier[i] ? kInlierColor : kOutlierColor);
    }
  }

  auto unmirrored = [&](StairPose p) {
    if (cfg.params.x_axis == XAxis::Left) {
      p.position.x = -p.position.x;
      p.angle = -p.angle;
    }
    return p;
  };
  if (pose) {
    draw_arrow(img, unmirrored(*pose), bundle.intrinsics, cfg.extrinsics);
  } else {
    for (const auto& p : result.poses) draw_arrow(img, unmirrored(p.pose), bundle.intrinsics, cfg.extrinsics);
  }
  return img;
}

void cmd_overlay(const FrameBundle& bundle, const std::optional<StairPose>& pose, const RunConfig& cfg,
                 const std::string& out_path) {
  LocalizerParams params = cfg.params;
  params.seed = cfg.seed;
  const LocalizeResult result = localize(bundle, cfg.extrinsics, params);
  io::save_ppm(out_path, render_overlay(bundle, result, pose, cfg));
}

}  // namespace stairloc::pipeline
