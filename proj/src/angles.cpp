#include "stairloc/angles.hpp"

#include <algorithm>
#include <cmath>

#include "stairloc/error.hpp"

namespace stairloc {

double fold_half_turn(double angle) {
  if (angle >= -kPi / 2 && angle < kPi / 2) return angle;
  double r = std::fmod(angle + kPi / 2, kPi);
  if (r < 0) r += kPi;
  r -= kPi / 2;
  return r >= kPi / 2 ? r - kPi : r;
}

double wrap_full_turn(double angle) {
  if (angle >= -kPi && angle < kPi) return angle;
  double r = std::fmod(angle + kPi, 2 * kPi);
  if (r < 0) r += 2 * kPi;
  r -= kPi;
  return r >= kPi ? r - 2 * kPi : r;
}

double line_angle_distance(double a, double b) { return std::abs(fold_half_turn(a - b)); }

LineAngleStats line_angle_stats(std::span<const double> angles) {
  if (angles.empty()) throw Error(ErrorCode::EmptyInput, "no angles to average");
  double c = 0.0, s = 0.0;
  for (double a : angles) {
    c += std::cos(2 * a);
    s += std::sin(2 * a);
  }
  c /= static_cast<double>(angles.size());
  s /= static_cast<double>(angles.size());
  const double r = std::min(1.0, std::hypot(c, s));
  const double mean = fold_half_turn(0.5 * std::atan2(s, c));
  const double sd = r > 0.0 ? 0.5 * std::sqrt(std::max(0.0, -2.0 * std::log(r))) : kPi / 2;
  return {mean, r, sd};
}

double line_angle_mean(std::span<const double> angles) {
  const double center = line_angle_stats(angles).mean;
  double sum = 0.0;
  for (double a : angles) {
    // Keep inputs already on the center's branch bit-exact.
    const double d = a - center;
    sum += (d >= -kPi / 2 && d < kPi / 2) ? a : center + fold_half_turn(d);
  }
  return fold_half_turn(sum / static_cast<double>(angles.size()));
}

}  // namespace stairloc
