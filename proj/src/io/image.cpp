#include "stairloc/io/image.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "stairloc/error.hpp"

namespace stairloc::io {

RgbImage::RgbImage(int width, int height, Rgb fill)
    : width_(width), height_(height), pixels_(static_cast<std::size_t>(width) * height, fill) {
  if (width < 1 || height < 1) throw Error(ErrorCode::InvariantError, "image must be non-empty");
}

void save_ppm(const std::string& path, const RgbImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << "P6\n" << image.width() << " " << image.height() << "\n255\n";
  for (int v = 0; v < image.height(); ++v)
    for (int u = 0; u < image.width(); ++u) {
      const Rgb& c = image.at(u, v);
      out.write(reinterpret_cast<const char*>(c.data()), 3);
    }
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

RgbImage load_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  std::size_t pos = 0;
  auto token = [&]() {
    for (;;) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  if (token() != "P6") throw Error(ErrorCode::SchemaError, path + ": not a binary PPM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(token());
    h = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw Error(ErrorCode::SchemaError, path + ": malformed PPM header");
  }
  if (maxval != 255) throw Error(ErrorCode::SchemaError, path + ": only maxval 255 is supported");
  ++pos;
  if (bytes.size() - pos != static_cast<std::size_t>(w) * h * 3)
    throw Error(ErrorCode::SchemaError, path + ": truncated PPM raster");
  RgbImage image(w, h);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      for (int c = 0; c < 3; ++c) image.at(u, v)[c] = static_cast<std::uint8_t>(bytes[pos++]);
  return image;
}

}  // namespace stairloc::io
