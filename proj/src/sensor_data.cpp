#include "atlas/sensor_data.hpp"

#include <cmath>

#include <fmt/format.h>

#include "atlas/errors.hpp"

namespace atlas {

std::uint64_t seconds_to_ns(double s) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw ArgumentError(fmt::format("invalid duration {} s", s));
  return static_cast<std::uint64_t>(std::llround(s * 1e9));
}

Timestamp Timestamp::from_seconds(double s) { return Timestamp{seconds_to_ns(s)}; }

std::string_view to_string(SensorKind kind) {
  switch (kind) {
    case SensorKind::gnss_pose: return "gnss";
    case SensorKind::imu: return "imu";
    case SensorKind::lidar_left: return "lidar_left";
    case SensorKind::lidar_right: return "lidar_right";
    case SensorKind::camera_rgb_left: return "camera_rgb_left";
    case SensorKind::camera_rgb_right: return "camera_rgb_right";
    case SensorKind::camera_ir: return "camera_ir";
  }
  return "unknown";
}

std::optional<SensorKind> sensor_kind_from_string(std::string_view name) {
  for (auto kind : kAllSensorKinds) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

bool is_lidar(SensorKind kind) { return kind == SensorKind::lidar_left || kind == SensorKind::lidar_right; }

bool is_camera(SensorKind kind) {
  return kind == SensorKind::camera_rgb_left || kind == SensorKind::camera_rgb_right || kind == SensorKind::camera_ir;
}

bool is_rgb_camera(SensorKind kind) {
  return kind == SensorKind::camera_rgb_left || kind == SensorKind::camera_rgb_right;
}

Timestamp SensorPacket::timestamp() const {
  return std::visit(
      [](const auto& d) -> Timestamp {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, LidarScan>) {
          return d.end_timestamp;
        } else {
          return d.timestamp;
        }
      },
      data);
}

}  // namespace atlas
