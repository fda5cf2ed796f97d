#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "atlas/config.hpp"
#include "atlas/geodesy.hpp"
#include "atlas/geometry.hpp"
#include "atlas/positioning.hpp"
#include "atlas/sensor_data.hpp"

namespace atlas {

enum class TrajectoryKind { stationary, constant_velocity, circle };

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::stationary;
  Vec3 velocity = Vec3::Zero();  // constant_velocity, m/s
  double radius = 10.0;          // circle, m
  double angular_rate = 0.1;     // circle, rad/s (positive = counter-clockwise)
};

/// Axis-aligned box in the truth local frame.
struct SceneBox {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Ones();
  int class_id = 0;

  Vec3 centroid() const { return 0.5 * (min + max); }
};

/// Infinite plane through `point` with normal `normal`.
struct ScenePlane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
};

struct LidarSimSpec {
  SensorKind kind = SensorKind::lidar_left;
  RigidTransform extrinsic;  // sensor -> body
  int rings = 16;
  int steps = 1000;  // columns per revolution
  double min_elevation_deg = -15.0;
  double max_elevation_deg = 15.0;
  double max_range = 100.0;
};

struct CameraSimSpec {
  SensorKind kind = SensorKind::camera_rgb_left;
  RigidTransform extrinsic;  // camera -> body
  CameraIntrinsics intrinsics{500.0, 500.0, 320.0, 240.0, 640, 480};
  bool detections = true;  // write detections.csv with projected scene boxes
};

struct NoiseSpec {
  double gnss_sigma = 0.02;           // m, per axis
  double gnss_azimuth_sigma_deg = 0.2;
  double imu_accel_sigma = 0.0;       // m/s^2
  double imu_gyro_sigma = 0.0;        // rad/s
  double lidar_range_sigma = 0.0;     // m
};

struct ScenarioSpec {
  std::uint64_t seed = 1;
  double duration = 10.0;                  // s
  std::uint64_t start_ns = 1'000'000'000;  // timestamp of t = 0
  TrajectorySpec trajectory;
  double gnss_rate = 10.0;
  double imu_rate = 100.0;
  double lidar_rate = 10.0;
  double camera_rate = 10.0;
  NoiseSpec noise;
  GeodeticPoint anchor{49.2, 16.6, 250.0};
  double gravity = 9.81;
  std::vector<std::pair<double, double>> azimuth_outages;  // [from, to) in s, azimuth left blank
  std::vector<std::pair<double, double>> gnss_outages;     // [from, to) in s, no fixes at all
  std::vector<LidarSimSpec> lidars;
  std::vector<CameraSimSpec> cameras;
  std::vector<SceneBox> boxes;
  std::vector<ScenePlane> planes;

  /// Throws ConfigError when rates or duration are not positive or sensors repeat.
  void validate() const;
};

/// Parses a scenario YAML document. Unknown keys are rejected. Throws ConfigError.
ScenarioSpec parse_scenario(const std::string& text);
ScenarioSpec load_scenario(const std::filesystem::path& path);

/// Body-to-local pose at t seconds. Throws ArgumentError outside [0, duration].
RigidTransform ground_truth_pose(const ScenarioSpec& spec, double t);
Vec3 ground_truth_velocity(const ScenarioSpec& spec, double t);
Vec3 ground_truth_acceleration(const ScenarioSpec& spec, double t);
/// Body-frame angular rate.
Vec3 ground_truth_angular_velocity(const ScenarioSpec& spec);

/// Distance along a unit ray to the nearest scene surface, if within max_range.
std::optional<double> cast_ray(const ScenarioSpec& spec, const Vec3& origin, const Vec3& direction,
                               double max_range);

/// A simulated point with the time it was measured.
struct TimedPoint {
  LidarPoint point;  // sensor frame
  double time = 0.0;
};

/**
 * One 360 degree sweep over [t_start, t_end): column j fires at
 * t_start + j / steps * (t_end - t_start) from the pose at that instant.
 * Points are in the sensor frame, in acquisition order (column-major).
 * `rng` adds range noise when given.
 */
std::vector<TimedPoint> simulate_sweep(const ScenarioSpec& spec, const LidarSimSpec& lidar, double t_start,
                                       double t_end, std::mt19937_64* rng = nullptr);

/// Hull of the projected box corners clipped to the image; nullopt when any corner is behind the camera
/// or the hull misses the image. `camera_pose` maps local to camera.
std::optional<Detection2D> project_box(const SceneBox& box, const RigidTransform& camera_pose,
                                       const CameraIntrinsics& intr);

/// Pipeline configuration matching a generated dataset (sensors, calibrations, gravity, GNSS sigma).
PipelineConfig pipeline_config_for(const ScenarioSpec& spec, const std::filesystem::path& dataset_path);

inline constexpr const char* kTruthHeader = "timestamp_ns,px,py,pz,qw,qx,qy,qz,vx,vy,vz";

struct GenerationReport {
  std::map<std::string, std::size_t> records;  // per sensor label
  std::size_t total() const;
};

/**
 * Writes the dataset layout plus truth.csv, truth_objects.csv,
 * truth_anchor.csv and pipeline.yaml into `out_root`. Throws IoError.
 */
GenerationReport generate_scenario(const ScenarioSpec& spec, const std::filesystem::path& out_root);

/// Seed for one stream, derived from the master seed and a label so streams are independent.
std::uint64_t stream_seed(std::uint64_t master, std::string_view label);

}  // namespace atlas
