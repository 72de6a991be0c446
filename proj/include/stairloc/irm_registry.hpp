#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "stairloc/stair_localizer.hpp"

namespace stairloc {

// Pose in the caller's world frame (the registry applies no odometry).
struct StairCandidate {
  StairPose pose;
  double timestamp = 0.0;  // seconds, monotonic
  std::string frame;
};

struct StairNode {
  std::uint64_t id = 0;
  StairPose pose;
  std::size_t n_candidates = 0;
  double sigma_pos = 0.0;    // meters
  double sigma_theta = 0.0;  // radians, period-pi
  std::vector<StairCandidate> members;
};

struct RegistryConfig {
  std::size_t window = 10;
  double sigma_pos = 0.2;
  double sigma_theta = 0.0873;
  double rejection_radius = 1.5;
  double staleness = 30.0;
  Point3 gravity{0.0, 1.0, 0.0};

  // Throws InvariantError.
  void validate() const;
};

struct ClusterStats {
  Point3 mean;
  double sigma_pos = 0.0;
  double sigma_theta = 0.0;
};

// Sample spread of the candidates: position sigma is
// sqrt(sum |p - mean|^2 / (n - 1)), angle sigma the period-pi circular std.
// Throws EmptyInput.
ClusterStats cluster_stats(const std::vector<StairCandidate>& candidates);

struct SubmitEvent {
  enum class Kind { None, Published, Suppressed };
  Kind kind = Kind::None;
  std::optional<StairNode> node;  // Published
  std::uint64_t node_id = 0;      // Published or Suppressed
};

class IrmRegistry {
 public:
  explicit IrmRegistry(RegistryConfig config = {});

  SubmitEvent submit(const StairCandidate& candidate);

  // Published nodes in publication order.
  std::vector<StairNode> nodes() const;
  std::size_t pending_candidates() const;
  const RegistryConfig& config() const { return config_; }

  double ground_distance(const Point3& a, const Point3& b) const;

 private:
  struct Cluster {
    std::vector<StairCandidate> members;
    Point3 centroid() const;
  };

  void evict_stale(double now);
  StairNode make_node(const std::vector<StairCandidate>& window, const ClusterStats& stats);

  RegistryConfig config_;
  GroundFrame ground_;
  mutable std::mutex mutex_;
  std::vector<StairNode> nodes_;
  std::vector<Cluster> clusters_;
  std::uint64_t next_id_ = 1;
};

}  // namespace stairloc
