#include "atlas/writers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "atlas/errors.hpp"
#include "atlas/image_io.hpp"

namespace atlas {

std::string format_yolo_line(const Detection2D& det, int image_width, int image_height) {
  const double w = static_cast<double>(image_width);
  const double h = static_cast<double>(image_height);
  return fmt::format("{} {:.6f} {:.6f} {:.6f} {:.6f}", det.class_id, det.center_u() / w, det.center_v() / h,
                     (det.x_max - det.x_min) / w, (det.y_max - det.y_min) / h);
}

void write_yolo_annotations(const std::filesystem::path& path, int image_width, int image_height,
                            std::span<const Detection2D> detections) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  for (const auto& d : detections) out << format_yolo_line(d, image_width, image_height) << '\n';
  out.flush();
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

std::vector<Detection2D> read_yolo_annotations(const std::filesystem::path& path, int image_width, int image_height) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::vector<Detection2D> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    int cls = 0;
    double cx = 0, cy = 0, w = 0, h = 0;
    if (!(ss >> cls >> cx >> cy >> w >> h)) {
      throw ValidationError(fmt::format("{}:{}: malformed annotation '{}'", path.string(), lineno, line));
    }
    cx *= image_width;
    w *= image_width;
    cy *= image_height;
    h *= image_height;
    out.push_back({cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h, cls, 0.0});
  }
  return out;
}

std::uint16_t depth_to_millimetres(double depth_m) {
  if (!(depth_m > 0.0)) return 0;
  const double mm = std::round(depth_m * 1000.0);
  return static_cast<std::uint16_t>(std::min(mm, 65535.0));
}

void write_depth_png(const std::filesystem::path& path, const DepthImage& img) {
  Image png;
  png.width = img.width;
  png.height = img.height;
  png.channels = 1;
  png.bit_depth = 16;
  png.samples.resize(img.depth.size());
  std::transform(img.depth.begin(), img.depth.end(), png.samples.begin(), depth_to_millimetres);
  write_png(path, png);
}

DepthImage read_depth_png(const std::filesystem::path& path) {
  const Image png = read_png(path);
  if (png.channels != 1 || png.bit_depth != 16) {
    throw ValidationError(fmt::format("'{}' is not a 16-bit grayscale depth image", path.string()));
  }
  DepthImage img(png.width, png.height);
  for (std::size_t i = 0; i < png.samples.size(); ++i) img.depth[i] = png.samples[i] / 1000.0;
  return img;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out_ << header << '\n';
}

void CsvWriter::write_line(const std::string& line) {
  out_ << line << '\n';
  if (!out_) throw IoError(fmt::format("write to '{}' failed", path_.string()));
}

void CsvWriter::flush() { out_.flush(); }

std::string trajectory_row(const LocalPosition& pose) {
  const auto& p = pose.position;
  const UnitQuaternion q = canonical(pose.orientation);
  const auto& v = pose.velocity;
  return fmt::format("{},{:.6f},{:.6f},{:.6f},{:.9f},{:.9f},{:.9f},{:.9f},{:.6f},{:.6f},{:.6f}", pose.timestamp.ns,
                     p.x(), p.y(), p.z(), q.w(), q.x(), q.y(), q.z(), v.x(), v.y(), v.z());
}

std::string object_row(Timestamp now, const FusedObject& o) {
  return fmt::format("{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}", now.ns, o.id, o.class_id, o.centroid.x(),
                     o.centroid.y(), o.centroid.z(), o.velocity.x(), o.velocity.y(), o.velocity.z());
}

std::string failcheck_row(const Anomaly& a, double score) {
  std::string detail = a.detail;
  std::replace(detail.begin(), detail.end(), ',', ';');
  return fmt::format("{},{},{},{:.6f},{}", a.timestamp.ns, a.sensor.label, to_string(a.kind), score, detail);
}

}  // namespace atlas
