#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace stairloc::io {

using Rgb = std::array<std::uint8_t, 3>;

// 8-bit RGB raster, row-major.
class RgbImage {
 public:
  RgbImage(int width, int height, Rgb fill = {0, 0, 0});

  int width() const { return width_; }
  int height() const { return height_; }
  bool contains(int u, int v) const { return u >= 0 && v >= 0 && u < width_ && v < height_; }
  const Rgb& at(int u, int v) const { return pixels_[static_cast<std::size_t>(v) * width_ + u]; }
  Rgb& at(int u, int v) { return pixels_[static_cast<std::size_t>(v) * width_ + u]; }
  void set(int u, int v, Rgb c) {
    if (contains(u, v)) at(u, v) = c;
  }

 private:
  int width_, height_;
  std::vector<Rgb> pixels_;
};

// Binary PPM (P6, maxval 255).
void save_ppm(const std::string& path, const RgbImage& image);
RgbImage load_ppm(const std::string& path);

}  // namespace stairloc::io
