#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "atlas/config.hpp"
#include "atlas/sensor_data.hpp"

namespace atlas {

struct ReliabilityScore {
  double value = 1.0;
  Timestamp last_update;
};

enum class AnomalyKind {
  missing_data,     // gap longer than gap_factor x expected period
  saturated_imu,
  non_finite_imu,
  empty_camera_frame,
  sparse_lidar_scan,
  invalid_lidar_timing,
};

std::string_view to_string(AnomalyKind kind);

struct Anomaly {
  SensorId sensor;
  Timestamp timestamp;
  AnomalyKind kind;
  std::string detail;
};

/**
 * Per-sensor plausibility tracker.
 *
 * Each anomaly halves the sensor's score; between anomalies the gap to 1
 * shrinks by half every `decay_half_life` seconds of data time.
 */
class FailChecker {
 public:
  explicit FailChecker(FailCheckConfig config = {});

  void register_sensor(const SensorId& sensor);

  /// Checks one packet (registering its sensor on first sight) and returns what was found.
  std::vector<Anomaly> ingest(const SensorPacket& packet);

  /// Decayed score at `now`. Throws LookupError for unregistered sensors.
  ReliabilityScore reliability(const SensorId& sensor, Timestamp now) const;

  const FailCheckConfig& config() const { return config_; }

 private:
  struct State {
    SensorId sensor;
    double score = 1.0;
    Timestamp score_time;
    std::optional<Timestamp> last_packet;
  };

  double decayed(const State& s, Timestamp now) const;
  State& state_for(const SensorId& sensor);

  FailCheckConfig config_;
  std::map<std::string, State> states_;
};

}  // namespace atlas
