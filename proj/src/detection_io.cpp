#include "stairloc/detection_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stairloc/error.hpp"

namespace stairloc {

using Json = nlohmann::ordered_json;

namespace {

std::string where(int line, const std::string& field) {
  std::string s = line > 0 ? "line " + std::to_string(line) : "document";
  if (!field.empty()) s += ", field '" + field + "'";
  return s;
}

[[noreturn]] void schema_error(int line, const std::string& field, const std::string& what) {
  throw Error(ErrorCode::SchemaError, where(line, field) + ": " + what);
}

double number(const Json& j, int line, const std::string& field) {
  if (!j.is_number()) schema_error(line, field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(line, field, "expected a finite number");
  return v;
}

std::pair<double, double> pair_of(const Json& j, int line, const std::string& field) {
  if (!j.is_array() || j.size() != 2) schema_error(line, field, "expected [x, y]");
  return {number(j[0], line, field), number(j[1], line, field)};
}

const Json& member(const Json& obj, const char* key, int line, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(line, path + key, "missing");
  return *it;
}

Displacement crop_offset(const BoundingBox& b) { return {std::max(0.0, b.x_min), std::max(0.0, b.y_min)}; }

DetectionRecord record_from_json(const Json& doc, int line) {
  if (!doc.is_object()) schema_error(line, "", "expected a JSON object");
  const Json& schema = member(doc, "schema", line, "");
  if (!schema.is_string() || schema.get<std::string>() != kDetectionSchema)
    schema_error(line, "schema", "expected \"" + std::string(kDetectionSchema) + "\"");
  const Json& frame = member(doc, "frame", line, "");
  if (!frame.is_string()) schema_error(line, "frame", "expected a string");
  const Json& boxes = member(doc, "boxes", line, "");
  if (!boxes.is_array()) schema_error(line, "boxes", "expected an array");

  DetectionRecord rec;
  rec.frame = frame.get<std::string>();
  for (std::size_t bi = 0; bi < boxes.size(); ++bi) {
    const std::string bpath = "boxes[" + std::to_string(bi) + "].";
    const Json& jb = boxes[bi];
    if (!jb.is_object()) schema_error(line, bpath, "expected an object");
    for (const char* key : {"class", "label"}) {
      if (auto it = jb.find(key); it != jb.end() && !(it->is_string() && it->get<std::string>() == "stair"))
        throw Error(ErrorCode::InvariantError, where(line, bpath + key) + ": only the stair class is supported");
    }
    const Json& bbox = member(jb, "bbox", line, bpath);
    if (!bbox.is_array() || bbox.size() != 4) schema_error(line, bpath + "bbox", "expected [x_min, y_min, x_max, y_max]");
    BoxDetection det;
    det.box = {number(bbox[0], line, bpath + "bbox"), number(bbox[1], line, bpath + "bbox"),
               number(bbox[2], line, bpath + "bbox"), number(bbox[3], line, bpath + "bbox"),
               number(member(jb, "confidence", line, bpath), line, bpath + "confidence")};
    try {
      validate_box(det.box);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvariantError, where(line, bpath + "bbox") + ": " + e.what());
    }
    det.segments.offset = crop_offset(det.box);
    const Json& segs = member(jb, "segments", line, bpath);
    if (!segs.is_array()) schema_error(line, bpath + "segments", "expected an array");
    for (std::size_t si = 0; si < segs.size(); ++si) {
      const std::string spath = bpath + "segments[" + std::to_string(si) + "].";
      const Json& js = segs[si];
      if (!js.is_object()) schema_error(line, spath, "expected an object");
      LineSegmentTP seg;
      auto [ru, rv] = pair_of(member(js, "root", line, spath), line, spath + "root");
      auto [su, sv] = pair_of(member(js, "d_start", line, spath), line, spath + "d_start");
      auto [eu, ev] = pair_of(member(js, "d_end", line, spath), line, spath + "d_end");
      seg.root = {ru, rv};
      seg.d_start = {su, sv};
      seg.d_end = {eu, ev};
      if (auto it = js.find("score"); it != js.end()) seg.score = number(*it, line, spath + "score");
      det.segments.segments.push_back(seg);
    }
    rec.boxes.push_back(std::move(det));
  }
  try {
    validate_record(rec);
  } catch (const Error& e) {
    throw Error(e.code(), where(line, "") + ": " + e.what());
  }
  return rec;
}

Json record_to_json(const DetectionRecord& rec) {
  Json doc;
  doc["schema"] = kDetectionSchema;
  doc["frame"] = rec.frame;
  doc["boxes"] = Json::array();
  for (const auto& det : rec.boxes) {
    Json jb;
    jb["bbox"] = {det.box.x_min, det.box.y_min, det.box.x_max, det.box.y_max};
    jb["confidence"] = det.box.confidence;
    jb["segments"] = Json::array();
    for (const auto& s : det.segments.segments) {
      Json js;
      js["root"] = {s.root.u, s.root.v};
      js["d_start"] = {s.d_start.du, s.d_start.dv};
      js["d_end"] = {s.d_end.du, s.d_end.dv};
      js["score"] = s.score;
      jb["segments"].push_back(std::move(js));
    }
    doc["boxes"].push_back(std::move(jb));
  }
  return doc;
}

}  // namespace

void validate_box(const BoundingBox& box) {
  if (!(box.x_min < box.x_max)) throw Error(ErrorCode::InvariantError, "x_min < x_max");
  if (!(box.y_min < box.y_max)) throw Error(ErrorCode::InvariantError, "y_min < y_max");
  if (!(box.confidence >= 0.0 && box.confidence <= 1.0)) throw Error(ErrorCode::InvariantError, "confidence in [0, 1]");
}

CropRect crop_roi(const BoundingBox& box, int image_width, int image_height) {
  validate_box(box);
  CropRect r{std::clamp(box.x_min, 0.0, static_cast<double>(image_width)),
             std::clamp(box.y_min, 0.0, static_cast<double>(image_height)),
             std::clamp(box.x_max, 0.0, static_cast<double>(image_width)),
             std::clamp(box.y_max, 0.0, static_cast<double>(image_height)),
             {}};
  if (!(r.width() > 0.0) || !(r.height() > 0.0)) {
    std::ostringstream os;
    os << "box (" << box.x_min << ", " << box.y_min << ", " << box.x_max << ", " << box.y_max << ") has no area inside "
       << image_width << "x" << image_height;
    throw Error(ErrorCode::EmptyCrop, os.str());
  }
  r.offset = {r.x_min, r.y_min};
  return r;
}

SegmentSet to_full_frame(const SegmentSet& set, int image_width, int image_height) {
  auto restitute = [&](double x, int extent, const char* axis) {
    if (x < -1.0 || x > extent + 1.0) {
      std::ostringstream os;
      os << axis << " = " << x << " leaves [0, " << extent << ") by more than one pixel";
      throw Error(ErrorCode::OutOfImage, os.str());
    }
    return std::clamp(x, 0.0, static_cast<double>(extent - 1));
  };
  SegmentSet out;
  out.segments.reserve(set.segments.size());
  for (const auto& s : set.segments) {
    LineSegmentTP t = s;
    t.root = {s.root.u + set.offset.du, s.root.v + set.offset.dv};
    const Pixel a = t.start();
    const Pixel b = t.end();
    const Pixel ca{restitute(a.u, image_width, "u"), restitute(a.v, image_height, "v")};
    const Pixel cb{restitute(b.u, image_width, "u"), restitute(b.v, image_height, "v")};
    if (ca != a) t.d_start = {ca.u - t.root.u, ca.v - t.root.v};
    if (cb != b) t.d_end = {cb.u - t.root.u, cb.v - t.root.v};
    out.segments.push_back(t);
  }
  return out;
}

void validate_record(const DetectionRecord& record) {
  for (std::size_t bi = 0; bi < record.boxes.size(); ++bi) {
    const auto& det = record.boxes[bi];
    validate_box(det.box);
    const double w = det.box.x_max - det.segments.offset.du;
    const double h = det.box.y_max - det.segments.offset.dv;
    for (std::size_t si = 0; si < det.segments.segments.size(); ++si) {
      const auto& s = det.segments.segments[si];
      const std::string tag = "boxes[" + std::to_string(bi) + "].segments[" + std::to_string(si) + "]: ";
      if (!(s.score >= 0.0 && s.score <= 1.0)) throw Error(ErrorCode::InvariantError, tag + "score in [0, 1]");
      for (const Pixel& p : {s.start(), s.end()}) {
        if (p.u < -1.0 || p.v < -1.0 || p.u > w + 1.0 || p.v > h + 1.0)
          throw Error(ErrorCode::InvariantError, tag + "segment endpoint inside crop rectangle");
      }
      if (std::hypot(s.end().u - s.start().u, s.end().v - s.start().v) < 1.0)
        throw Error(ErrorCode::InvariantError, tag + "segment endpoints at least one pixel apart");
    }
  }
}

DetectionRecord parse_detection_record(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    schema_error(0, "", e.what());
  }
  return record_from_json(doc, 0);
}

std::vector<DetectionRecord> parse_detection_file(std::string_view bytes) {
  std::vector<DetectionRecord> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) nl = bytes.size();
    std::string_view line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    Json doc;
    try {
      doc = Json::parse(line);
    } catch (const Json::parse_error& e) {
      schema_error(line_no, "", std::string("invalid JSON: ") + e.what());
    }
    out.push_back(record_from_json(doc, line_no));
  }
  return out;
}

std::string serialize_record(const DetectionRecord& record) { return record_to_json(record).dump(); }

std::string serialize_detection_file(const std::vector<DetectionRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += serialize_record(r);
    out += '\n';
  }
  return out;
}

std::vector<DetectionRecord> load_detection_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_detection_file(ss.str());
}

void save_detection_file(const std::string& path, const std::vector<DetectionRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << serialize_detection_file(records);
}

void validate_bundle(const FrameBundle& bundle) {
  if (bundle.depth.width() != bundle.intrinsics.width() || bundle.depth.height() != bundle.intrinsics.height())
    throw Error(ErrorCode::InvariantError, "depth dimensions match intrinsics width/height");
  validate_record(bundle.detections);
}

FileReplayDetector::FileReplayDetector(std::vector<DetectionRecord> records) {
  for (auto& r : records) {
    std::string key = r.frame;
    records_.insert_or_assign(std::move(key), std::move(r));
  }
}

FileReplayDetector FileReplayDetector::from_file(const std::string& path) {
  return FileReplayDetector(load_detection_file(path));
}

DetectionRecord FileReplayDetector::detect(const std::string& frame_id) {
  if (auto it = records_.find(frame_id); it != records_.end()) return it->second;
  return DetectionRecord{frame_id, {}};
}

}  // namespace stairloc
