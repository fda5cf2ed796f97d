#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "atlas/detection_fusion.hpp"
#include "atlas/fail_check.hpp"
#include "atlas/positioning.hpp"
#include "atlas/reprojection_depth.hpp"

namespace atlas {

/// Formats `class cx cy w h` with six decimals, normalized by the image size.
std::string format_yolo_line(const Detection2D& det, int image_width, int image_height);

/// One line per detection, '\n' endings. An empty list produces an empty file. Throws IoError.
void write_yolo_annotations(const std::filesystem::path& path, int image_width, int image_height,
                            std::span<const Detection2D> detections);

/// Parses a file written by write_yolo_annotations back into pixel boxes (confidence is not stored).
std::vector<Detection2D> read_yolo_annotations(const std::filesystem::path& path, int image_width, int image_height);

/// Depth in metres to a 16-bit millimetre sample, rounded and clamped to 65535.
std::uint16_t depth_to_millimetres(double depth_m);

/// 16-bit grayscale PNG in millimetres, 0 = no data. Throws IoError.
void write_depth_png(const std::filesystem::path& path, const DepthImage& img);
DepthImage read_depth_png(const std::filesystem::path& path);

/// Line-oriented CSV output with a fixed header. Throws IoError when the file cannot be opened.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& header);
  void write_line(const std::string& line);
  void flush();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

inline constexpr const char* kTrajectoryHeader = "timestamp_ns,px,py,pz,qw,qx,qy,qz,vx,vy,vz";
inline constexpr const char* kObjectsHeader = "timestamp_ns,object_id,class_id,cx,cy,cz,vx,vy,vz";
inline constexpr const char* kFailcheckHeader = "timestamp_ns,sensor,anomaly,score,detail";

std::string trajectory_row(const LocalPosition& pose);
std::string object_row(Timestamp now, const FusedObject& object);
std::string failcheck_row(const Anomaly& anomaly, double score);

}  // namespace atlas
