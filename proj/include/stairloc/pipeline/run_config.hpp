#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "stairloc/irm_registry.hpp"
#include "stairloc/stair_localizer.hpp"

namespace stairloc::pipeline {

struct RunConfig {
  ExtrinsicsConfig extrinsics{};
  LocalizerParams params{};
  RegistryConfig registry{};
  double frame_period = 0.1;  // seconds between frames, for candidate timestamps
  std::uint64_t seed = 0;
};

// Flat settings, either a JSON object or `key = value` lines ('#' comments).
// Keys: camera_height, gravity, epsilon, slope_tol, slope_min_inlier_frac,
// slope_max_iterations, min_segment_length, min_points, ground_mode
// (whole_lines|points), ground_inlier_tol, ground_residual_tol, ground_tol,
// ground_min_inlier_frac, x_axis (right|left), registry_window,
// registry_sigma_pos, registry_sigma_theta, registry_radius,
// registry_staleness, frame_period, seed. Unknown keys raise SpecError.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::string& path);

// Validates the assembled configuration; throws SpecError.
void validate(const RunConfig& cfg);

}  // namespace stairloc::pipeline
