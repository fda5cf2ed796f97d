#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "atlas/geometry.hpp"
#include "atlas/image_io.hpp"

namespace atlas {

/// Nanoseconds since the recording epoch.
struct Timestamp {
  std::uint64_t ns = 0;

  constexpr auto operator<=>(const Timestamp&) const = default;

  double seconds() const { return static_cast<double>(ns) * 1e-9; }
  static Timestamp from_seconds(double s);
};

/// Signed b - a in seconds.
inline double seconds_between(Timestamp a, Timestamp b) {
  return b.ns >= a.ns ? static_cast<double>(b.ns - a.ns) * 1e-9 : -static_cast<double>(a.ns - b.ns) * 1e-9;
}

std::uint64_t seconds_to_ns(double s);

/// Declaration order is the multiplexer tie-break rank.
enum class SensorKind : std::uint8_t {
  gnss_pose,
  imu,
  lidar_left,
  lidar_right,
  camera_rgb_left,
  camera_rgb_right,
  camera_ir,
};

inline constexpr std::array kAllSensorKinds = {
    SensorKind::gnss_pose,       SensorKind::imu,         SensorKind::lidar_left, SensorKind::lidar_right,
    SensorKind::camera_rgb_left, SensorKind::camera_rgb_right, SensorKind::camera_ir,
};

/// Canonical directory / label name, e.g. "lidar_left" or "camera_ir". GNSS is "gnss".
std::string_view to_string(SensorKind kind);
std::optional<SensorKind> sensor_kind_from_string(std::string_view name);

bool is_lidar(SensorKind kind);
bool is_camera(SensorKind kind);
bool is_rgb_camera(SensorKind kind);

struct SensorId {
  SensorKind kind = SensorKind::gnss_pose;
  std::string label;

  static SensorId of(SensorKind kind) { return {kind, std::string(to_string(kind))}; }
  bool operator==(const SensorId&) const = default;
};

struct GnssPacket {
  Timestamp timestamp;
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
  double altitude_m = 0.0;
  std::optional<double> azimuth_deg;  // clockwise from true north
};

struct ImuPacket {
  Timestamp timestamp;
  Vec3 linear_acceleration = Vec3::Zero();  // specific force, includes gravity
  Vec3 angular_velocity = Vec3::Zero();
  UnitQuaternion absolute_orientation = UnitQuaternion::Identity();
};

struct LidarPoint {
  Vec3 position = Vec3::Zero();
  double intensity = 0.0;
};

struct LidarScan {
  SensorId sensor;
  Timestamp start_timestamp;
  Timestamp end_timestamp;
  std::vector<LidarPoint> points;  // acquisition order
};

struct Detection2D {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  int class_id = 0;
  double confidence = 0.0;

  double center_u() const { return 0.5 * (x_min + x_max); }
  double center_v() const { return 0.5 * (y_min + y_max); }
  bool operator==(const Detection2D&) const = default;
};

struct CameraFrame {
  SensorId sensor;
  Timestamp timestamp;
  std::filesystem::path image_path;
  std::vector<Detection2D> detections;
  std::optional<Image> image;  // filled when the packet is emitted
  std::uint64_t sequence = 0;  // index within the camera stream
};

struct SensorPacket {
  SensorId sensor;
  std::variant<GnssPacket, ImuPacket, LidarScan, CameraFrame> data;

  /// Multiplexer key: fix time, sample time, scan end time, or frame time.
  Timestamp timestamp() const;
};

}  // namespace atlas
