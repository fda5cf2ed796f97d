#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "atlas/geometry.hpp"
#include "atlas/sensor_data.hpp"

namespace atlas {

struct FailCheckConfig {
  std::map<SensorKind, std::uint64_t> expected_period_ns{
      {SensorKind::gnss_pose, 100'000'000},       {SensorKind::imu, 10'000'000},
      {SensorKind::lidar_left, 100'000'000},      {SensorKind::lidar_right, 100'000'000},
      {SensorKind::camera_rgb_left, 100'000'000}, {SensorKind::camera_rgb_right, 100'000'000},
      {SensorKind::camera_ir, 100'000'000},
  };
  double gap_factor = 3.0;
  double imu_accel_saturation = 150.0;  // m/s^2
  std::size_t lidar_min_points = 1000;
  double decay_half_life = 10.0;  // s

  void validate() const;
};

struct PositioningConfig {
  double gravity = 9.81;
  double gnss_sigma = 0.02;               // m
  double accel_sigma = 0.5;               // m/s^2, process noise
  double initial_velocity_sigma = 10.0;   // m/s, prior at the anchor fix
  double rollpitch_blend_alpha = 0.02;    // per IMU sample
  double heading_full_trust_speed = 5.0;  // m/s
  double gnss_heading_sigma = 3.0;        // deg
  double pose_history_length = 5.0;       // s

  void validate() const;
};

struct AggregationConfig {
  int batch_count = 16;
  double window = 1.5;      // s
  double voxel_leaf = 0.2;  // m
  double snapshot_every = 0.0;  // s of data time, 0 = off

  void validate() const;
};

struct FusionConfig {
  double depth_margin = 0.1;
  double gate = 5.0;  // m
  double ttl = 2.0;   // s
  double smoothing = 0.5;
  std::size_t history_length = 32;

  void validate() const;
};

struct TransferConfig {
  SensorKind source_camera = SensorKind::camera_rgb_left;
  SensorKind target_camera = SensorKind::camera_ir;
  double max_time_offset = 0.1;  // s

  void validate() const;
};

/// Extrinsic maps sensor-frame points into the IMU (body) frame.
struct SensorCalibration {
  RigidTransform extrinsic;
  std::optional<CameraIntrinsics> intrinsics;
  std::vector<double> distortion;  // must be all zero
};

struct StageFlags {
  bool failcheck = true;
  bool positioning = true;
  bool aggregation = true;
  bool detection = true;
  bool transfer = true;
  bool depth = true;

  /// Disables one stage by name; throws ConfigError for an unknown name.
  void disable(const std::string& stage);
};

struct PipelineConfig {
  std::filesystem::path dataset_path;
  std::filesystem::path output_path = "out";
  std::map<SensorKind, SensorCalibration> calibrations;
  PositioningConfig positioning;
  AggregationConfig aggregation;
  FailCheckConfig failcheck;
  FusionConfig fusion;
  TransferConfig transfer;
  StageFlags stages;
  std::string log_level = "info";
  std::optional<Timestamp> until;

  /// Checks ranges and calibration completeness. Throws ConfigError naming the field.
  void validate() const;

  /// Calibration of `kind`; IMU and GNSS default to identity. Throws LookupError otherwise.
  SensorCalibration calibration(SensorKind kind) const;
};

/// Parses and validates a YAML config. Relative paths resolve against the file's directory.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir = {});

/// YAML text that parse_config reads back into an equivalent config.
std::string to_yaml(const PipelineConfig& config);

}  // namespace atlas
