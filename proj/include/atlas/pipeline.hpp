#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "atlas/config.hpp"
#include "atlas/fail_check.hpp"

namespace atlas {

/// How far past the newest pose a LiDAR or camera timestamp may be and still be posed.
inline constexpr double kMaxPoseExtrapolation = 0.05;  // s

struct RunReport {
  std::map<std::string, std::size_t> packets_per_sensor;
  std::size_t total_packets = 0;
  std::size_t dataset_records = 0;
  std::vector<Anomaly> anomalies;

  std::size_t lidar_scans_aggregated = 0;
  std::size_t lidar_scans_skipped = 0;
  std::size_t camera_frames_fused = 0;
  std::size_t camera_frames_skipped = 0;
  std::size_t frustums_built = 0;
  std::size_t annotation_files = 0;
  std::size_t depth_images = 0;
  std::size_t snapshots = 0;

  double wall_time_seconds = 0.0;  // stdout only, never written to the output tree

  std::size_t frames_written() const { return annotation_files + depth_images; }
};

/**
 * Replays the dataset through every enabled stage and writes the output tree.
 *
 * Throws ConfigError for invalid configuration, LoadError / ValidationError
 * while opening the dataset, and StageError (with sensor and timestamp) when
 * a packet cannot be processed.
 */
RunReport run(const PipelineConfig& config);

}  // namespace atlas
