#include "stairloc/line_segments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "stairloc/angles.hpp"
#include "stairloc/error.hpp"

namespace stairloc {

LineSegmentTP LineSegmentTP::from_endpoints(const Pixel& start, const Pixel& end, double score) {
  const Pixel root{0.5 * (start.u + end.u), 0.5 * (start.v + end.v)};
  return {root, {start.u - root.u, start.v - root.v}, {end.u - root.u, end.v - root.v}, score};
}

std::pair<Pixel, Pixel> tp_to_endpoints(const LineSegmentTP& seg) {
  const Pixel a = seg.start();
  const Pixel b = seg.end();
  if (round_to_grid(a) == round_to_grid(b)) {
    std::ostringstream os;
    os << "endpoints (" << a.u << ", " << a.v << ") and (" << b.u << ", " << b.v << ") coincide on the grid";
    throw Error(ErrorCode::DegenerateSegment, os.str());
  }
  return {a, b};
}

double segment_length(const LineSegmentTP& seg) {
  return std::hypot(seg.d_end.du - seg.d_start.du, seg.d_end.dv - seg.d_start.dv);
}

double slope_angle(const LineSegmentTP& seg) {
  const auto [a, b] = tp_to_endpoints(seg);
  return fold_half_turn(std::atan2(b.v - a.v, b.u - a.u));
}

ConsensusResult angular_consensus(std::span<const double> angles, const ConsensusParams& params) {
  if (angles.empty()) throw Error(ErrorCode::EmptyInput, "consensus over an empty set");
  if (!(params.min_inlier_frac >= 0.0 && params.min_inlier_frac <= 1.0))
    throw Error(ErrorCode::InvariantError, "0 <= min_inlier_frac <= 1");
  const std::size_t n = angles.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(params.seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t cap = static_cast<std::size_t>(std::max(1, params.max_iterations));
  const bool exhaustive = n <= cap;
  std::size_t budget = std::min(n, cap);

  std::size_t best_seed = order[0];
  std::size_t best_count = 0;
  double best_mse = std::numeric_limits<double>::infinity();

  for (std::size_t k = 0; k < budget; ++k) {
    const double model = angles[order[k]];
    std::size_t count = 0;
    double sq = 0.0;
    for (double a : angles) {
      const double d = line_angle_distance(a, model);
      if (d <= params.tol) {
        ++count;
        sq += d * d;
      }
    }
    const double mse = sq / static_cast<double>(count);
    if (count > best_count || (count == best_count && mse < best_mse)) {
      best_seed = order[k];
      best_count = count;
      best_mse = mse;
      if (!exhaustive) {
        // Standard adaptive bound for a one-element minimal sample.
        const double w = static_cast<double>(best_count) / static_cast<double>(n);
        std::size_t needed = 1;
        if (w < 1.0) {
          const double est = std::ceil(std::log(1.0 - params.confidence) / std::log(1.0 - w));
          needed = est > static_cast<double>(cap) ? cap : static_cast<std::size_t>(std::max(1.0, est));
        }
        budget = std::min(cap, std::max(needed, k + 1));
      }
    }
  }

  if (static_cast<double>(best_count) + 1e-9 < params.min_inlier_frac * static_cast<double>(n)) {
    std::ostringstream os;
    os << "best slope consensus " << best_count << "/" << n << " below required fraction "
       << params.min_inlier_frac;
    throw Error(ErrorCode::InsufficientConsensus, os.str());
  }

  ConsensusResult result;
  result.consensus_angle = angles[best_seed];
  result.mse = best_mse;
  for (std::size_t i = 0; i < n; ++i) {
    if (line_angle_distance(angles[i], result.consensus_angle) <= params.tol)
      result.inliers.push_back(i);
    else
      result.outliers.push_back(i);
  }
  return result;
}

ParallelSplit ransac_parallel_filter(const SegmentSet& set, const ConsensusParams& params) {
  if (set.segments.empty()) throw Error(ErrorCode::EmptyInput, "no segments to filter");
  if (!(params.min_inlier_frac > 0.0)) throw Error(ErrorCode::InvariantError, "0 < min_inlier_frac <= 1");
  std::vector<double> angles;
  angles.reserve(set.segments.size());
  for (const auto& s : set.segments) angles.push_back(slope_angle(s));
  ConsensusResult c = angular_consensus(angles, params);

  ParallelSplit split;
  split.inliers.offset = set.offset;
  split.outliers.offset = set.offset;
  split.consensus_angle = c.consensus_angle;
  for (std::size_t i : c.inliers) split.inliers.segments.push_back(set.segments[i]);
  for (std::size_t i : c.outliers) split.outliers.segments.push_back(set.segments[i]);
  split.inlier_indices = std::move(c.inliers);
  split.outlier_indices = std::move(c.outliers);
  return split;
}

std::pair<SegmentSet, std::vector<std::size_t>> drop_short_segments(const SegmentSet& set, double min_length) {
  SegmentSet kept;
  kept.offset = set.offset;
  std::vector<std::size_t> dropped;
  for (std::size_t i = 0; i < set.segments.size(); ++i) {
    if (segment_length(set.segments[i]) >= min_length)
      kept.segments.push_back(set.segments[i]);
    else
      dropped.push_back(i);
  }
  return {std::move(kept), std::move(dropped)};
}

std::vector<GridPixel> rasterize(const LineSegmentTP& seg, const Displacement& offset, int width, int height) {
  const GridPixel a = round_to_grid(seg.start() + offset);
  const GridPixel b = round_to_grid(seg.end() + offset);

  const int dx = std::abs(b.u - a.u);
  const int dy = -std::abs(b.v - a.v);
  const int sx = a.u < b.u ? 1 : -1;
  const int sy = a.v < b.v ? 1 : -1;
  int err = dx + dy;

  std::vector<GridPixel> out;
  out.reserve(static_cast<std::size_t>(std::max(dx, -dy)) + 1);
  GridPixel p = a;
  for (;;) {
    if (p.u >= 0 && p.v >= 0 && p.u < width && p.v < height) out.push_back(p);
    if (p == b) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      p.u += sx;
    }
    if (e2 <= dx) {
      err += dx;
      p.v += sy;
    }
  }
  return out;
}

}  // namespace stairloc
