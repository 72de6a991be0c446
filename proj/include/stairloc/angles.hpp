#pragma once

#include <numbers>
#include <span>

namespace stairloc {

inline constexpr double kPi = std::numbers::pi;

// Undirected line angle folded into [-pi/2, pi/2).
double fold_half_turn(double angle);

// Angle wrapped into [-pi, pi).
double wrap_full_turn(double angle);

// Distance between two undirected line angles, in [0, pi/2].
double line_angle_distance(double a, double b);

// Period-pi circular statistics, computed on the doubled-angle circle.
struct LineAngleStats {
  double mean;               // folded into [-pi/2, pi/2)
  double resultant_length;   // in [0, 1]
  double circular_std;       // sqrt(-2 ln R) / 2, radians
};

LineAngleStats line_angle_stats(std::span<const double> angles);

// Arithmetic mean of undirected angles after moving each onto the branch
// nearest their circular mean; identical to the plain mean when the inputs do
// not straddle the +-pi/2 seam. Result folded into [-pi/2, pi/2).
double line_angle_mean(std::span<const double> angles);

}  // namespace stairloc
