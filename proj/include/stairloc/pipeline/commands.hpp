#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stairloc/io/image.hpp"
#include "stairloc/pipeline/dataset.hpp"
#include "stairloc/pipeline/evaluation.hpp"
#include "stairloc/pipeline/run_config.hpp"

namespace stairloc::pipeline {

// Frame i uses config i mod n and corruption seed mix_seed(seed, i).
// Writes <out>/manifest.jsonl and <out>/frames/<id>/.
void cmd_synth(const SynthSpec& spec, const std::optional<CorruptionConfig>& corruption, std::size_t count,
               std::uint64_t seed, const std::string& out_dir);

struct LocalizeSummary {
  std::size_t frames = 0;
  std::size_t poses = 0;
  std::size_t nodes = 0;
};

// Writes <out>/poses.jsonl, nodes.jsonl and diagnostics.jsonl. A missing or
// malformed manifest throws; per-frame problems become diagnostics.
LocalizeSummary cmd_localize(const std::string& dataset_root, const RunConfig& cfg, const std::string& out_dir);

// Writes <out>/report.txt and <out>/report.json.
EvalReport cmd_eval(const std::string& poses_path, const std::string& dataset_root, const std::string& out_dir);

inline constexpr io::Rgb kBoxColor{0, 200, 0};
inline constexpr io::Rgb kInlierColor{255, 0, 0};
inline constexpr io::Rgb kOutlierColor{0, 0, 255};
inline constexpr io::Rgb kArrowColor{160, 32, 240};

// Color image when the bundle has one, depth as grayscale otherwise; boxes,
// inlier and outlier segments from `result`, and an arrow from the projected
// stair position along its forward direction. `pose` overrides the poses in
// `result` for box 0.
io::RgbImage render_overlay(const FrameBundle& bundle, const LocalizeResult& result,
                            const std::optional<StairPose>& pose, const RunConfig& cfg);

void cmd_overlay(const FrameBundle& bundle, const std::optional<StairPose>& pose, const RunConfig& cfg,
                 const std::string& out_path);

}  // namespace stairloc::pipeline
