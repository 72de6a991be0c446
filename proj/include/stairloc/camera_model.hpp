#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace stairloc {

// Image coordinates, column u and row v. Real valued; rounding to the grid
// only happens when a raster is indexed.
struct Pixel {
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

// Integer grid location produced by rounding a Pixel.
struct GridPixel {
  int u = 0;
  int v = 0;

  friend bool operator==(const GridPixel&, const GridPixel&) = default;
};

// Camera-frame point in meters: X right, Y down, Z forward.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Point3& operator+=(const Point3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  friend Point3 operator+(Point3 a, const Point3& b) { return a += b; }
  friend Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Point3 operator*(double s, const Point3& p) { return {s * p.x, s * p.y, s * p.z}; }
  friend bool operator==(const Point3&, const Point3&) = default;
};

inline double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Point3 cross(const Point3& a, const Point3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Point3& p) { return std::sqrt(dot(p, p)); }

// Round half up, the single rounding rule used for every raster lookup.
inline int round_to_grid(double x) { return static_cast<int>(std::floor(x + 0.5)); }
inline GridPixel round_to_grid(const Pixel& p) { return {round_to_grid(p.u), round_to_grid(p.v)}; }

// Pinhole intrinsics without skew or distortion. The pixel set is the
// rectangle [0, width) x [0, height).
class Intrinsics {
 public:
  Intrinsics(double fx, double fy, double cx, double cy, int width, int height);

  double fx() const { return fx_; }
  double fy() const { return fy_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }
  int width() const { return width_; }
  int height() const { return height_; }

  bool contains(const GridPixel& p) const {
    return p.u >= 0 && p.v >= 0 && p.u < width_ && p.v < height_;
  }

  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;

 private:
  double fx_, fy_, cx_, cy_;
  int width_, height_;
};

struct Projection {
  Pixel pixel;
  double depth = 0.0;
};

// p~ = (1/d) K P with d = P.z. The pixel may fall outside the image.
Projection project(const Point3& point, const Intrinsics& k);

// P = d K^-1 p~.
Point3 unproject(const Pixel& pixel, double depth, const Intrinsics& k);

// Row-major depth raster in meters. Values <= 0 or non-finite mean "no depth".
class DepthFrame {
 public:
  DepthFrame(int width, int height);
  DepthFrame(int width, int height, std::vector<float> data);

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  float at(int u, int v) const { return data_[static_cast<std::size_t>(v) * width_ + u]; }
  float& at(int u, int v) { return data_[static_cast<std::size_t>(v) * width_ + u]; }

  static bool is_valid(float d) { return std::isfinite(d) && d > 0.0f; }

  friend bool operator==(const DepthFrame&, const DepthFrame&) = default;

 private:
  int width_, height_;
  std::vector<float> data_;
};

// Sample at the rounded pixel; nullopt when the sample is the invalid sentinel.
// Throws OutOfBounds when the rounded pixel lies outside the raster.
std::optional<double> depth_at(const DepthFrame& frame, const Pixel& p);

// Optional mirrored camera frame (X pointing left). Applied to outputs only.
enum class XAxis { Right, Left };

// Key-value intrinsics document ("fx = 525"). Distortion keys are accepted and
// ignored; a warning naming each one is appended to `warnings`.
Intrinsics parse_intrinsics(const std::string& text, std::vector<std::string>* warnings = nullptr);
std::string format_intrinsics(const Intrinsics& k);
Intrinsics load_intrinsics(const std::string& path, std::vector<std::string>* warnings = nullptr);
void save_intrinsics(const std::string& path, const Intrinsics& k);

}  // namespace stairloc
