#include "atlas/fail_check.hpp"

#include <cmath>

#include <fmt/format.h>

#include "atlas/errors.hpp"

namespace atlas {

std::string_view to_string(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::missing_data: return "missing_data";
    case AnomalyKind::saturated_imu: return "saturated_imu";
    case AnomalyKind::non_finite_imu: return "non_finite_imu";
    case AnomalyKind::empty_camera_frame: return "empty_camera_frame";
    case AnomalyKind::sparse_lidar_scan: return "sparse_lidar_scan";
    case AnomalyKind::invalid_lidar_timing: return "invalid_lidar_timing";
  }
  return "unknown";
}

FailChecker::FailChecker(FailCheckConfig config) : config_(std::move(config)) { config_.validate(); }

void FailChecker::register_sensor(const SensorId& sensor) { state_for(sensor); }

FailChecker::State& FailChecker::state_for(const SensorId& sensor) {
  auto [it, inserted] = states_.try_emplace(sensor.label);
  if (inserted) it->second.sensor = sensor;
  return it->second;
}

double FailChecker::decayed(const State& s, Timestamp now) const {
  if (now <= s.score_time) return s.score;
  const double dt = seconds_between(s.score_time, now);
  return 1.0 - (1.0 - s.score) * std::exp2(-dt / config_.decay_half_life);
}

std::vector<Anomaly> FailChecker::ingest(const SensorPacket& packet) {
  State& state = state_for(packet.sensor);
  const Timestamp ts = packet.timestamp();
  std::vector<Anomaly> found;
  auto flag = [&](AnomalyKind kind, std::string detail) {
    found.push_back({packet.sensor, ts, kind, std::move(detail)});
  };

  if (state.last_packet) {
    const auto period_it = config_.expected_period_ns.find(packet.sensor.kind);
    if (period_it != config_.expected_period_ns.end() && ts > *state.last_packet) {
      const double gap = static_cast<double>(ts.ns - state.last_packet->ns);
      if (gap > config_.gap_factor * static_cast<double>(period_it->second)) {
        flag(AnomalyKind::missing_data, fmt::format("gap of {:.3f} s", gap * 1e-9));
      }
    }
  }

  if (const auto* imu = std::get_if<ImuPacket>(&packet.data)) {
    const auto& a = imu->linear_acceleration;
    const auto& g = imu->angular_velocity;
    const auto& q = imu->absolute_orientation;
    if (!a.allFinite() || !g.allFinite() || !q.coeffs().allFinite()) {
      flag(AnomalyKind::non_finite_imu, "non-finite IMU field");
    } else if (a.cwiseAbs().maxCoeff() >= config_.imu_accel_saturation) {
      flag(AnomalyKind::saturated_imu, fmt::format("|a| component {:.3g} m/s^2", a.cwiseAbs().maxCoeff()));
    }
  } else if (const auto* scan = std::get_if<LidarScan>(&packet.data)) {
    if (scan->end_timestamp <= scan->start_timestamp) {
      flag(AnomalyKind::invalid_lidar_timing, "scan end <= start");
    }
    if (scan->points.size() < config_.lidar_min_points) {
      flag(AnomalyKind::sparse_lidar_scan, fmt::format("{} points", scan->points.size()));
    }
  } else if (const auto* frame = std::get_if<CameraFrame>(&packet.data)) {
    if (!frame->image || frame->image->empty()) {
      flag(AnomalyKind::empty_camera_frame, "no image data");
    } else if (frame->image->all_zero()) {
      flag(AnomalyKind::empty_camera_frame, "all-zero image");
    }
  }

  for (std::size_t i = 0; i < found.size(); ++i) {
    state.score = decayed(state, ts) * 0.5;
    state.score_time = ts;
  }
  if (!state.last_packet || ts > *state.last_packet) state.last_packet = ts;
  return found;
}

ReliabilityScore FailChecker::reliability(const SensorId& sensor, Timestamp now) const {
  const auto it = states_.find(sensor.label);
  if (it == states_.end()) throw LookupError(fmt::format("fail check: unknown sensor '{}'", sensor.label));
  return {decayed(it->second, now), it->second.last_packet.value_or(it->second.score_time)};
}

}  // namespace atlas
