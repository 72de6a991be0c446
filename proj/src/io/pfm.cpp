#include "stairloc/io/pfm.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "stairloc/error.hpp"

namespace stairloc::io {

namespace {

std::uint32_t byteswap32(std::uint32_t x) {
  return (x >> 24) | ((x >> 8) & 0xff00u) | ((x << 8) & 0xff0000u) | (x << 24);
}

float read_float(const char* p, bool little) {
  std::uint32_t bits;
  std::memcpy(&bits, p, 4);
  if ((std::endian::native == std::endian::little) != little) bits = byteswap32(bits);
  return std::bit_cast<float>(bits);
}

void write_float_le(std::string& out, float f) {
  auto bits = std::bit_cast<std::uint32_t>(f);
  if constexpr (std::endian::native != std::endian::little) bits = byteswap32(bits);
  char buf[4];
  std::memcpy(buf, &bits, 4);
  out.append(buf, 4);
}

}  // namespace

std::string encode_pfm(const DepthFrame& frame) {
  std::string out = "Pf\n" + std::to_string(frame.width()) + " " + std::to_string(frame.height()) + "\n-1.0\n";
  out.reserve(out.size() + frame.data().size() * 4);
  for (int v = frame.height() - 1; v >= 0; --v)
    for (int u = 0; u < frame.width(); ++u) write_float_le(out, frame.at(u, v));
  return out;
}

DepthFrame decode_pfm(const std::string& bytes) {
  std::size_t pos = 0;
  // Header is three whitespace-separated tokens after the magic, ending in a
  // single whitespace byte before the raster.
  auto token = [&]() {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  const std::string magic = token();
  if (magic != "Pf") throw Error(ErrorCode::SchemaError, "PFM: expected greyscale magic 'Pf', got '" + magic + "'");
  int width = 0, height = 0;
  double scale = 0.0;
  try {
    width = std::stoi(token());
    height = std::stoi(token());
    scale = std::stod(token());
  } catch (const std::exception&) {
    throw Error(ErrorCode::SchemaError, "PFM: malformed header");
  }
  if (pos >= bytes.size() || scale == 0.0 || width < 1 || height < 1)
    throw Error(ErrorCode::SchemaError, "PFM: malformed header");
  ++pos;
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - pos != n * 4)
    throw Error(ErrorCode::SchemaError, "PFM: raster size does not match " + std::to_string(width) + "x" +
                                            std::to_string(height));
  const bool little = scale < 0.0;
  DepthFrame frame(width, height);
  const char* p = bytes.data() + pos;
  for (int v = height - 1; v >= 0; --v)
    for (int u = 0; u < width; ++u, p += 4) frame.at(u, v) = read_float(p, little);
  return frame;
}

void save_pfm(const std::string& path, const DepthFrame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  const std::string bytes = encode_pfm(frame);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

DepthFrame load_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_pfm(ss.str());
}

}  // namespace stairloc::io
