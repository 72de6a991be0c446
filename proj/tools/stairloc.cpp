#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "stairloc/error.hpp"
#include "stairloc/pipeline/commands.hpp"

namespace fs = std::filesystem;
using namespace stairloc;
using namespace stairloc::pipeline;

namespace {

enum Exit { kOk = 0, kUsage = 1, kDataset = 2, kInvariant = 3 };

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::SpecError:
      return kUsage;
    case ErrorCode::InvariantError:
      return kInvariant;
    default:
      return kDataset;
  }
}

RunConfig run_config(const std::string& path, std::optional<std::uint64_t> seed) {
  RunConfig cfg = path.empty() ? RunConfig{} : load_run_config(path);
  if (seed) cfg.seed = *seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Staircase localization from RGB-D frames and stair detections"};
  app.require_subcommand(1);

  std::string config_path, out;
  std::optional<std::uint64_t> seed;

  auto* synth = app.add_subcommand("synth", "Render a synthetic dataset");
  std::string spec_path, corruption_path;
  std::size_t count = 1;
  synth->add_option("--spec", spec_path, "Staircase configurations (JSON)")->required()->check(CLI::ExistingFile);
  synth->add_option("--corruption", corruption_path, "Corruption settings (JSON)")->check(CLI::ExistingFile);
  synth->add_option("--count", count, "Number of frames")->check(CLI::NonNegativeNumber);
  synth->add_option("--config", config_path, "Run config (JSON or key = value); only camera_height is used");
  synth->add_option("--seed", seed, "Corruption seed");
  synth->add_option("--out", out, "Dataset directory")->required();

  auto* loc = app.add_subcommand("localize", "Localize every frame of a dataset");
  std::string dataset;
  loc->add_option("--dataset", dataset, "Dataset directory")->required();
  loc->add_option("--config", config_path, "Run config (JSON or key = value)")->check(CLI::ExistingFile);
  loc->add_option("--seed", seed, "RANSAC seed");
  loc->add_option("--out", out, "Output directory")->required();

  auto* eval = app.add_subcommand("eval", "Compare localized poses with dataset truth");
  std::string poses_path;
  eval->add_option("--poses", poses_path, "poses.jsonl from localize")->required()->check(CLI::ExistingFile);
  eval->add_option("--dataset", dataset, "Dataset directory holding manifest.jsonl")->required();
  eval->add_option("--config", config_path, "Unused; accepted for symmetry");
  eval->add_option("--seed", seed, "Unused; accepted for symmetry");
  eval->add_option("--out", out, "Report directory")->required();

  auto* overlay = app.add_subcommand("overlay", "Draw boxes, segments and the pose arrow on a frame");
  std::string bundle_dir, frame;
  overlay->add_option("--dataset", dataset, "Dataset directory (with --frame)");
  overlay->add_option("--frame", frame, "Frame id");
  overlay->add_option("--bundle", bundle_dir, "Bundle directory (frame id defaults to its name)");
  overlay->add_option("--poses", poses_path, "Draw this pose stream's pose instead of re-localizing");
  overlay->add_option("--config", config_path, "Run config (JSON or key = value)")->check(CLI::ExistingFile);
  overlay->add_option("--seed", seed, "RANSAC seed");
  overlay->add_option("--out", out, "Output PPM path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (synth->parsed()) {
      SynthSpec spec = load_synth_spec(spec_path);
      if (!config_path.empty()) {
        const RunConfig cfg = load_run_config(config_path);
        spec.camera_height = -cfg.extrinsics.camera_in_base.y();
        spec.options.extrinsics = cfg.extrinsics;
      }
      std::optional<CorruptionConfig> corruption;
      if (!corruption_path.empty()) corruption = load_corruption(corruption_path);
      cmd_synth(spec, corruption, count, seed.value_or(0), out);
      std::cout << "wrote " << count << " frames to " << out << "\n";
    } else if (loc->parsed()) {
      const LocalizeSummary s = cmd_localize(dataset, run_config(config_path, seed), out);
      std::cout << s.frames << " frames, " << s.poses << " poses, " << s.nodes << " nodes\n";
    } else if (eval->parsed()) {
      std::cout << format_table(cmd_eval(poses_path, dataset, out));
    } else if (overlay->parsed()) {
      if (bundle_dir.empty()) {
        if (dataset.empty() || frame.empty()) {
          std::cerr << "overlay needs --bundle or --dataset with --frame\n";
          return kUsage;
        }
        for (const auto& e : load_manifest(dataset))
          if (e.frame == frame) bundle_dir = (fs::path(dataset) / e.bundle).string();
        if (bundle_dir.empty()) throw Error(ErrorCode::JoinError, "frame " + frame + " is not in the manifest");
      } else if (frame.empty()) {
        frame = fs::path(bundle_dir).filename().string();
      }
      std::optional<StairPose> pose;
      if (!poses_path.empty())
        for (const auto& row : parse_pose_stream(read_text(poses_path)))
          if (row.frame == frame && row.box == 0) pose = row.pose;
      cmd_overlay(load_bundle(bundle_dir, frame), pose, run_config(config_path, seed), out);
      std::cout << "wrote " << out << "\n";
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInvariant;
  }
  return kOk;
}
