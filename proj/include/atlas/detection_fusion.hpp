#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "atlas/config.hpp"
#include "atlas/geometry.hpp"
#include "atlas/lidar_aggregation.hpp"
#include "atlas/sensor_data.hpp"

namespace atlas {

struct ProjectedPoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;  // camera-frame z
};

/// Where a data item came from.
struct Provenance {
  SensorId sensor;
  Timestamp timestamp;
};

struct FrustumDetection {
  Frustum frustum;
  int class_id = 0;
  double confidence = 0.0;
  double distance = 0.0;  // range along the frustum axis
  Provenance source;

  /// Point on the bounding-box center ray at `distance`.
  Vec3 center_point() const { return frustum.origin + distance * frustum.axis; }
};

struct FusedObject {
  std::uint64_t id = 0;
  Vec3 centroid = Vec3::Zero();
  int class_id = 0;
  Vec3 velocity = Vec3::Zero();
  std::deque<std::pair<Timestamp, Vec3>> history;
  Timestamp last_seen;
  Provenance source;
};

/**
 * Maps every batch point into the camera and keeps those in view.
 *
 * `camera_pose` maps the local frame to the camera frame. It is added after
 * each batch's chain and the extended chain is collapsed once per batch.
 */
std::vector<ProjectedPoint> project_cloud_to_camera(std::span<const PointCloudBatch> batches,
                                                    const RigidTransform& camera_pose, const CameraIntrinsics& intr);
std::vector<ProjectedPoint> project_cloud_to_camera(const PointCloudAggregator& aggregator,
                                                    const RigidTransform& camera_pose, const CameraIntrinsics& intr);

/// Median depth of points inside the closed bbox; mean of the middle two for even counts.
std::optional<double> median_depth_in_bbox(std::span<const ProjectedPoint> projected, const Detection2D& bbox);

/// Number of projected points inside the closed bbox.
std::size_t count_in_bbox(std::span<const ProjectedPoint> projected, const Detection2D& bbox);

/**
 * Frustum through the bbox corners of `det`.
 *
 * `camera_to_local` maps the camera frame to the local frame. `depth` is the
 * camera-frame z of the object; it is converted to a range along the
 * bbox-center ray and the near/far cuts are that range scaled by
 * (1 -/+ depth_margin). Throws ArgumentError when depth <= 0.
 */
FrustumDetection detection_to_frustum(const Detection2D& det, const CameraIntrinsics& intr,
                                      const RigidTransform& camera_to_local, double depth, double depth_margin,
                                      Provenance source = {});

/**
 * Detection-to-object association with class and distance gating.
 *
 * Object ids come from a counter that is never rewound, so ids are not reused.
 */
class ObjectAggregator {
 public:
  explicit ObjectAggregator(FusionConfig config = {}) : config_(config) {}

  const std::vector<FusedObject>& update(std::span<const FrustumDetection> detections, Timestamp now);

  const std::vector<FusedObject>& objects() const { return objects_; }
  std::uint64_t next_id() const { return next_id_; }

  /// Cost matrix (objects x detections) used by update().
  Eigen::MatrixXd cost_matrix(std::span<const FrustumDetection> detections, Timestamp now) const;

 private:
  FusionConfig config_;
  std::vector<FusedObject> objects_;
  std::uint64_t next_id_ = 1;
};

/// Functional form of ObjectAggregator::update; `next_id` is advanced for every spawned object.
std::vector<FusedObject> aggregate_objects(std::vector<FusedObject> existing,
                                           std::span<const FrustumDetection> detections, Timestamp now,
                                           const FusionConfig& cfg, std::uint64_t& next_id);

/// Centroid advanced by its velocity to `now`.
Vec3 predicted_centroid(const FusedObject& object, Timestamp now);

}  // namespace atlas
