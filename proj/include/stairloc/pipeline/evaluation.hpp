#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stairloc/pipeline/dataset.hpp"

namespace stairloc::pipeline {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1); 0 for a single value
};

// Throws EmptyInput.
MeanStd mean_std(const std::vector<double>& values);

// Signed line-angle error in degrees: estimate - truth taken modulo 180
// and wrapped to [-90, 90).
double theta_error_deg(double estimate_rad, double truth_rad);

struct EvalRow {
  std::string config;
  std::size_t frames = 0;
  std::size_t matched = 0;
  MeanStd x, y, z, theta_deg;  // over matched frames only
  double detection_rate = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;  // manifest order of first appearance
};

struct PoseRow {
  std::string frame;
  std::size_t box = 0;
  StairPose pose;
};

std::vector<PoseRow> parse_pose_stream(const std::string& ndjson);
std::string pose_stream_line(const PoseRow& row);

// Joins poses to manifest frames (a frame's lowest box index wins).
// Throws JoinError when no pose matches a frame with truth.
EvalReport evaluate(const std::vector<PoseRow>& poses, const std::vector<ManifestEntry>& manifest);

std::string format_table(const EvalReport& report);
Json report_to_json(const EvalReport& report);

}  // namespace stairloc::pipeline
