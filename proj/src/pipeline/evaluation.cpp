#include "stairloc/pipeline/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "stairloc/angles.hpp"
#include "stairloc/error.hpp"

namespace stairloc::pipeline {

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "mean of nothing");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  MeanStd r{sum / n, 0.0};
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / (n - 1.0));
  }
  return r;
}

double theta_error_deg(double estimate_rad, double truth_rad) {
  double d = std::fmod((estimate_rad - truth_rad) * 180.0 / kPi, 180.0);
  if (d >= 90.0) d -= 180.0;
  if (d < -90.0) d += 180.0;
  return d;
}

std::vector<PoseRow> parse_pose_stream(const std::string& ndjson) {
  std::vector<PoseRow> out;
  std::istringstream in(ndjson);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("frame") || !j["frame"].is_string())
      throw Error(ErrorCode::SchemaError, "pose line " + std::to_string(n) + ": expected an object with 'frame'");
    PoseRow r;
    r.frame = j["frame"].get<std::string>();
    r.box = j.value("box_index", std::size_t{0});
    r.pose = pose_from_json(j);
    out.push_back(std::move(r));
  }
  return out;
}

std::string pose_stream_line(const PoseRow& row) {
  Json j;
  j["frame"] = row.frame;
  j["box_index"] = row.box;
  const Json pose = pose_to_json(row.pose);
  for (const auto& [k, v] : pose.items()) j[k] = v;
  return j.dump() + "\n";
}

EvalReport evaluate(const std::vector<PoseRow>& poses, const std::vector<ManifestEntry>& manifest) {
  std::map<std::string, const PoseRow*> first;
  for (const auto& p : poses) {
    auto [it, fresh] = first.try_emplace(p.frame, &p);
    if (!fresh && p.box < it->second->box) it->second = &p;
  }

  struct Acc {
    std::size_t frames = 0;
    std::vector<double> x, y, z, t;
  };
  std::vector<std::string> order;
  std::map<std::string, Acc> acc;
  std::size_t joined = 0;
  for (const auto& e : manifest) {
    if (!e.truth) continue;
    auto [it, fresh] = acc.try_emplace(e.config);
    if (fresh) order.push_back(e.config);
    Acc& a = it->second;
    ++a.frames;
    auto p = first.find(e.frame);
    if (p == first.end()) continue;
    ++joined;
    const StairPose& est = p->second->pose;
    a.x.push_back(est.position.x - e.truth->position.x);
    a.y.push_back(est.position.y - e.truth->position.y);
    a.z.push_back(est.position.z - e.truth->position.z);
    a.t.push_back(theta_error_deg(est.angle, e.truth->angle));
  }
  if (!manifest.empty() && joined == 0) throw Error(ErrorCode::JoinError, "no pose matches a manifest frame with truth");

  EvalReport report;
  for (const auto& name : order) {
    const Acc& a = acc[name];
    EvalRow row;
    row.config = name;
    row.frames = a.frames;
    row.matched = a.x.size();
    row.detection_rate = static_cast<double>(row.matched) / static_cast<double>(row.frames);
    if (row.matched > 0) {
      row.x = mean_std(a.x);
      row.y = mean_std(a.y);
      row.z = mean_std(a.z);
      row.theta_deg = mean_std(a.t);
    }
    report.rows.push_back(row);
  }
  return report;
}

namespace {

std::string cell(const MeanStd& m, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%+.*f ± %.*f", precision, m.mean, precision, m.std);
  return buf;
}

// Code points, so "±" and "θ" count as one column.
std::size_t columns(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

std::string pad(const std::string& s, std::size_t width) {
  const std::size_t shown = columns(s);
  return s + std::string(width > shown ? width - shown : 0, ' ');
}

}  // namespace

std::string format_table(const EvalReport& report) {
  const std::vector<std::string> head = {"Config", "X error (m)", "Y error (m)", "Z error (m)", "θ error (deg)",
                                         "Detected", "Frames"};
  std::vector<std::vector<std::string>> cells{head};
  for (const auto& r : report.rows) {
    char rate[32];
    std::snprintf(rate, sizeof rate, "%.3f", r.detection_rate);
    if (r.matched == 0)
      cells.push_back({r.config, "-", "-", "-", "-", rate, std::to_string(r.frames)});
    else
      cells.push_back({r.config, cell(r.x, 4), cell(r.y, 4), cell(r.z, 4), cell(r.theta_deg, 3), rate,
                       std::to_string(r.frames)});
  }
  std::vector<std::size_t> widths(head.size(), 0);
  for (const auto& row : cells)
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], columns(row[i]));
  std::ostringstream out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t i = 0; i < cells[r].size(); ++i) out << (i ? "  " : "") << (i + 1 < cells[r].size() ? pad(cells[r][i], widths[i]) : cells[r][i]);
    out << "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w + 2;
      out << std::string(total - 2, '-') << "\n";
    }
  }
  return out.str();
}

Json report_to_json(const EvalReport& report) {
  auto ms = [](const MeanStd& m) { return Json{{"mean", m.mean}, {"std", m.std}}; };
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json j;
    j["config"] = r.config;
    j["frames"] = r.frames;
    j["matched"] = r.matched;
    j["detection_rate"] = r.detection_rate;
    if (r.matched > 0) {
      j["x_error_m"] = ms(r.x);
      j["y_error_m"] = ms(r.y);
      j["z_error_m"] = ms(r.z);
      j["theta_error_deg"] = ms(r.theta_deg);
    }
    rows.push_back(j);
  }
  return Json{{"configs", rows}};
}

}  // namespace stairloc::pipeline
