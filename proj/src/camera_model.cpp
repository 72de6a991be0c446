#include "stairloc/camera_model.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "stairloc/error.hpp"

namespace stairloc {

Intrinsics::Intrinsics(double fx, double fy, double cx, double cy, int width, int height)
    : fx_(fx), fy_(fy), cx_(cx), cy_(cy), width_(width), height_(height) {
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorCode::InvariantError, "fx > 0, fy > 0");
  if (width < 1 || height < 1) throw Error(ErrorCode::InvariantError, "width >= 1, height >= 1");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    throw Error(ErrorCode::InvariantError, "0 <= cx < width, 0 <= cy < height");
}

Projection project(const Point3& point, const Intrinsics& k) {
  if (!(point.z > 0.0)) throw Error(ErrorCode::NonPositiveDepth, "project requires P.z > 0");
  const double d = point.z;
  return {{k.fx() * point.x / d + k.cx(), k.fy() * point.y / d + k.cy()}, d};
}

Point3 unproject(const Pixel& pixel, double depth, const Intrinsics& k) {
  if (!(depth > 0.0)) throw Error(ErrorCode::NonPositiveDepth, "unproject requires d > 0");
  // Same operation order as the batch kernels so both paths agree bit-for-bit.
  return {(pixel.u - k.cx()) / k.fx() * depth, (pixel.v - k.cy()) / k.fy() * depth, depth};
}

DepthFrame::DepthFrame(int width, int height) : DepthFrame(width, height, {}) {}

DepthFrame::DepthFrame(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) throw Error(ErrorCode::InvariantError, "depth frame must be non-empty");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (data_.empty()) data_.assign(n, 0.0f);
  if (data_.size() != n) throw Error(ErrorCode::InvariantError, "data length = width x height");
}

std::optional<double> depth_at(const DepthFrame& frame, const Pixel& p) {
  const GridPixel g = round_to_grid(p);
  if (g.u < 0 || g.v < 0 || g.u >= frame.width() || g.v >= frame.height()) {
    std::ostringstream os;
    os << "pixel (" << p.u << ", " << p.v << ") outside " << frame.width() << "x" << frame.height();
    throw Error(ErrorCode::OutOfBounds, os.str());
  }
  const float d = frame.at(g.u, g.v);
  if (!DepthFrame::is_valid(d)) return std::nullopt;
  return static_cast<double>(d);
}

namespace {

const std::set<std::string> kDistortionKeys = {"k1", "k2", "k3", "k4", "p1", "p2", "skew"};

}  // namespace

Intrinsics parse_intrinsics(const std::string& text, std::vector<std::string>* warnings) {
  std::map<std::string, double> values;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto sep = line.find_first_of("=:");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    if (sep == std::string::npos)
      throw Error(ErrorCode::SchemaError, "intrinsics line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, sep));
    const std::string value = trim(line.substr(sep + 1));
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      values[key] = v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::SchemaError,
                  "intrinsics line " + std::to_string(line_no) + ": field '" + key + "' is not a number");
    }
    if (kDistortionKeys.count(key) && warnings)
      warnings->push_back("intrinsics field '" + key + "' ignored (pinhole model has no distortion)");
  }
  for (const char* required : {"fx", "fy", "cx", "cy", "width", "height"}) {
    if (!values.count(required))
      throw Error(ErrorCode::SchemaError, std::string("intrinsics missing field '") + required + "'");
  }
  return Intrinsics(values["fx"], values["fy"], values["cx"], values["cy"], static_cast<int>(values["width"]),
                    static_cast<int>(values["height"]));
}

std::string format_intrinsics(const Intrinsics& k) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "fx = " << k.fx() << "\nfy = " << k.fy() << "\ncx = " << k.cx() << "\ncy = " << k.cy()
     << "\nwidth = " << k.width() << "\nheight = " << k.height() << "\n";
  return os.str();
}

Intrinsics load_intrinsics(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_intrinsics(ss.str(), warnings);
}

void save_intrinsics(const std::string& path, const Intrinsics& k) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << format_intrinsics(k);
}

}  // namespace stairloc
