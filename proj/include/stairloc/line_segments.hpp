#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "stairloc/camera_model.hpp"

namespace stairloc {

struct Displacement {
  double du = 0.0;
  double dv = 0.0;

  friend bool operator==(const Displacement&, const Displacement&) = default;
};

inline Pixel operator+(const Pixel& p, const Displacement& d) { return {p.u + d.du, p.v + d.dv}; }

// Tri-points segment: a root pixel and displacements to the two endpoints.
struct LineSegmentTP {
  Pixel root;
  Displacement d_start;
  Displacement d_end;
  double score = 1.0;

  Pixel start() const { return root + d_start; }
  Pixel end() const { return root + d_end; }

  // Root at the midpoint of the two endpoints.
  static LineSegmentTP from_endpoints(const Pixel& start, const Pixel& end, double score = 1.0);

  friend bool operator==(const LineSegmentTP&, const LineSegmentTP&) = default;
};

// Segments of one detection together with the translation that maps them back
// to full-image coordinates (the top-left corner of the originating crop).
struct SegmentSet {
  std::vector<LineSegmentTP> segments;
  Displacement offset;

  friend bool operator==(const SegmentSet&, const SegmentSet&) = default;
};

// (root + d_start, root + d_end). Throws DegenerateSegment when both round to
// the same grid pixel.
std::pair<Pixel, Pixel> tp_to_endpoints(const LineSegmentTP& seg);

double segment_length(const LineSegmentTP& seg);

// atan2(dv, du) folded into [-pi/2, pi/2); the segment is treated as undirected.
double slope_angle(const LineSegmentTP& seg);

struct ConsensusParams {
  double tol = 0.05;              // radians
  double min_inlier_frac = 0.5;
  int max_iterations = 200;
  double confidence = 0.99;
  std::uint64_t seed = 0;
};

struct ConsensusResult {
  std::vector<std::size_t> inliers;   // ascending
  std::vector<std::size_t> outliers;  // ascending
  double consensus_angle = 0.0;
  double mse = 0.0;  // mean squared angular distance of inliers to the consensus
};

// RANSAC over undirected angles with a single-angle minimal model. A model's
// support is every angle within `tol` (modulo pi); ties on support go to the
// lower mean squared angular distance. Seeds are drawn without replacement,
// so when the input has no more elements than `max_iterations` every element
// is tried. Throws EmptyInput, or InsufficientConsensus when the best support
// is below min_inlier_frac of the input.
ConsensusResult angular_consensus(std::span<const double> angles, const ConsensusParams& params);

struct ParallelSplit {
  SegmentSet inliers;
  SegmentSet outliers;
  std::vector<std::size_t> inlier_indices;
  std::vector<std::size_t> outlier_indices;
  double consensus_angle = 0.0;
};

// Slope consensus over a segment set: the parallel nosing lines are assumed to
// be the majority. Both halves keep the input offset.
ParallelSplit ransac_parallel_filter(const SegmentSet& set, const ConsensusParams& params);

// Drops segments shorter than `min_length` pixels; returns the kept set and
// the indices (into the input) of the dropped ones.
std::pair<SegmentSet, std::vector<std::size_t>> drop_short_segments(const SegmentSet& set, double min_length);

// 8-connected traversal between the rounded endpoints after applying `offset`,
// keeping only pixels inside [0, width) x [0, height).
std::vector<GridPixel> rasterize(const LineSegmentTP& seg, const Displacement& offset, int width, int height);

}  // namespace stairloc
