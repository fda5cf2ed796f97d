#pragma once

#include "atlas/scenario_gen.hpp"

namespace testing {

/// A one-second drive past a box and a wall with every sensor type, cheap to generate.
inline atlas::ScenarioSpec small_scenario() {
  using namespace atlas;
  ScenarioSpec spec;
  spec.seed = 3;
  spec.duration = 1.0;
  spec.trajectory.kind = TrajectoryKind::constant_velocity;
  spec.trajectory.velocity = Vec3(2.0, 0.0, 0.0);
  LidarSimSpec lidar;
  lidar.kind = SensorKind::lidar_left;
  lidar.rings = 4;
  lidar.steps = 256;
  lidar.extrinsic = RigidTransform::from_translation({0.0, 0.0, 1.0});
  spec.lidars.push_back(lidar);
  CameraSimSpec rgb;
  rgb.kind = SensorKind::camera_rgb_left;
  rgb.extrinsic = RigidTransform(UnitQuaternion(0.5, -0.5, 0.5, -0.5), Vec3(0.0, 0.0, 1.0));
  rgb.intrinsics = {80.0, 80.0, 40.0, 30.0, 80, 60};
  spec.cameras.push_back(rgb);
  CameraSimSpec ir = rgb;
  ir.kind = SensorKind::camera_ir;
  ir.detections = false;
  spec.cameras.push_back(ir);
  spec.boxes.push_back({Vec3(8.0, -1.0, 0.0), Vec3(9.0, 1.0, 2.0), 1});
  spec.planes.push_back({Vec3(20.0, 0.0, 0.0), Vec3(-1.0, 0.0, 0.0)});
  spec.planes.push_back({Vec3(0.0, 0.0, 0.0), Vec3(0.0, 0.0, 1.0)});
  return spec;
}

/**
 * An enclosed 40 m x 40 m x 10 m room with a single LiDAR, so every ray hits
 * and point index is a monotone proxy for acquisition time.
 */
inline atlas::ScenarioSpec room_scenario(const atlas::Vec3& velocity, int rings = 4, int steps = 1024) {
  using namespace atlas;
  ScenarioSpec spec;
  spec.seed = 5;
  spec.duration = 1.0;
  spec.trajectory.kind = velocity.norm() > 0.0 ? TrajectoryKind::constant_velocity : TrajectoryKind::stationary;
  spec.trajectory.velocity = velocity;
  LidarSimSpec lidar;
  lidar.rings = rings;
  lidar.steps = steps;
  lidar.extrinsic = RigidTransform::from_translation({0.0, 0.0, 1.0});
  spec.lidars.push_back(lidar);
  spec.planes = {{Vec3(20, 0, 0), Vec3(-1, 0, 0)}, {Vec3(-20, 0, 0), Vec3(1, 0, 0)},
                 {Vec3(0, 20, 0), Vec3(0, -1, 0)}, {Vec3(0, -20, 0), Vec3(0, 1, 0)},
                 {Vec3(0, 0, 0), Vec3(0, 0, 1)},   {Vec3(0, 0, 10), Vec3(0, 0, -1)}};
  return spec;
}

}  // namespace testing
