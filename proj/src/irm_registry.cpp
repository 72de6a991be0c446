#include "stairloc/irm_registry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stairloc/angles.hpp"

namespace stairloc {

void RegistryConfig::validate() const {
  if (window < 2) throw Error(ErrorCode::InvariantError, "registry window >= 2");
  if (!(sigma_pos > 0.0 && sigma_theta > 0.0 && rejection_radius > 0.0 && staleness > 0.0))
    throw Error(ErrorCode::InvariantError, "registry thresholds must be > 0");
  if (!(std::abs(norm(gravity) - 1.0) < 1e-6)) throw Error(ErrorCode::InvariantError, "registry gravity must be unit");
}

ClusterStats cluster_stats(const std::vector<StairCandidate>& candidates) {
  if (candidates.empty()) throw Error(ErrorCode::EmptyInput, "no candidates");
  const double n = static_cast<double>(candidates.size());
  ClusterStats s;
  for (const auto& c : candidates) s.mean = s.mean + c.pose.position;
  s.mean = (1.0 / n) * s.mean;
  if (candidates.size() > 1) {
    double ss = 0.0;
    for (const auto& c : candidates) {
      const Point3 d = c.pose.position - s.mean;
      ss += dot(d, d);
    }
    s.sigma_pos = std::sqrt(ss / (n - 1.0));
  }
  std::vector<double> angles;
  for (const auto& c : candidates) angles.push_back(c.pose.angle);
  s.sigma_theta = line_angle_stats(angles).circular_std;
  return s;
}

IrmRegistry::IrmRegistry(RegistryConfig config)
    : config_(config), ground_((config.validate(), GroundFrame::from_gravity(config.gravity))) {}

double IrmRegistry::ground_distance(const Point3& a, const Point3& b) const {
  const Vec2 pa = ground_project(a, ground_);
  const Vec2 pb = ground_project(b, ground_);
  return std::hypot(pa.x - pb.x, pa.y - pb.y);
}

Point3 IrmRegistry::Cluster::centroid() const {
  Point3 c;
  for (const auto& m : members) c = c + m.pose.position;
  return (1.0 / static_cast<double>(members.size())) * c;
}

void IrmRegistry::evict_stale(double now) {
  for (auto& c : clusters_)
    std::erase_if(c.members, [&](const StairCandidate& m) { return now - m.timestamp > config_.staleness; });
  std::erase_if(clusters_, [](const Cluster& c) { return c.members.empty(); });
}

StairNode IrmRegistry::make_node(const std::vector<StairCandidate>& window, const ClusterStats& stats) {
  StairNode node;
  node.id = next_id_++;
  node.n_candidates = window.size();
  node.sigma_pos = stats.sigma_pos;
  node.sigma_theta = stats.sigma_theta;
  node.members = window;

  std::vector<double> angles;
  double height = 0.0;
  int up = 0, down = 0, ambiguous = 0;
  for (const auto& c : window) {
    angles.push_back(c.pose.angle);
    height += c.pose.height;
    (c.pose.direction == Direction::Up ? up : c.pose.direction == Direction::Down ? down : ambiguous) += 1;
  }
  // The mean is a line direction; put it on the half-turn nearest the
  // candidates' orientation.
  double theta = line_angle_mean(angles);
  if (std::cos(theta - window.front().pose.angle) < 0.0) theta += kPi;
  StairPose& p = node.pose;
  p.position = stats.mean;
  p.angle = wrap_full_turn(theta);
  p.height = height / static_cast<double>(window.size());
  p.direction = up > down && up > ambiguous ? Direction::Up
                : down > up && down > ambiguous ? Direction::Down
                                                 : Direction::Ambiguous;
  ExtrinsicsConfig axes;
  axes.gravity = config_.gravity;
  p.orientation = angle_to_quaternion(p.angle, axes);
  for (const auto& c : window) {
    p.n_points += c.pose.n_points;
    p.n_lines += c.pose.n_lines;
    p.residual_mse += c.pose.residual_mse / static_cast<double>(window.size());
  }
  return node;
}

SubmitEvent IrmRegistry::submit(const StairCandidate& candidate) {
  std::lock_guard lock(mutex_);
  evict_stale(candidate.timestamp);

  const Point3& pos = candidate.pose.position;
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t best_id = 0;
  for (const auto& n : nodes_) {
    const double d = ground_distance(pos, n.pose.position);
    if (d < best) best = d, best_id = n.id;
  }
  if (best <= config_.rejection_radius) return {SubmitEvent::Kind::Suppressed, std::nullopt, best_id};

  Cluster* target = nullptr;
  double nearest = std::numeric_limits<double>::infinity();
  for (auto& c : clusters_) {
    const double d = ground_distance(pos, c.centroid());
    if (d <= config_.rejection_radius && d < nearest) nearest = d, target = &c;
  }
  if (!target) target = &clusters_.emplace_back();
  target->members.push_back(candidate);
  if (target->members.size() > config_.window) target->members.erase(target->members.begin());
  if (target->members.size() < config_.window) return {};

  const ClusterStats stats = cluster_stats(target->members);
  if (stats.sigma_pos > config_.sigma_pos || stats.sigma_theta > config_.sigma_theta) return {};

  // A cluster whose members each cleared the radius can still average to a
  // point inside it; such a cluster is a duplicate.
  const std::vector<StairCandidate> window = target->members;
  clusters_.erase(clusters_.begin() + (target - clusters_.data()));
  for (const auto& n : nodes_)
    if (ground_distance(stats.mean, n.pose.position) <= config_.rejection_radius)
      return {SubmitEvent::Kind::Suppressed, std::nullopt, n.id};

  nodes_.push_back(make_node(window, stats));
  return {SubmitEvent::Kind::Published, nodes_.back(), nodes_.back().id};
}

std::vector<StairNode> IrmRegistry::nodes() const {
  std::lock_guard lock(mutex_);
  return nodes_;
}

std::size_t IrmRegistry::pending_candidates() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& c : clusters_) n += c.members.size();
  return n;
}

}  // namespace stairloc
