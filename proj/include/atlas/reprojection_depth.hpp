#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "atlas/detection_fusion.hpp"
#include "atlas/geometry.hpp"
#include "atlas/lidar_aggregation.hpp"
#include "atlas/sensor_data.hpp"

namespace atlas {

/// Planar cut of a frustum at the object's measured distance, local frame.
struct FrontalPlaneQuad {
  std::array<Vec3, 4> corners;
  int class_id = 0;
  double confidence = 0.0;

  double area() const;
};

/// Per-pixel depth in metres, row-major; 0 means no data.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> depth;

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), depth(static_cast<std::size_t>(w) * h, 0.0) {}

  double& at(int u, int v) { return depth[static_cast<std::size_t>(v) * width + u]; }
  double at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
  std::size_t nonzero_count() const;
};

/// Index of the entry closest to t; ties go to the earlier entry. Throws ArgumentError when empty.
std::size_t nearest_frame(std::span<const Timestamp> timeline, Timestamp t);

/// Corner rays cut by the plane perpendicular to the center ray at the detection distance.
FrontalPlaneQuad frustum_frontal_plane(const FrustumDetection& fr);

/**
 * Axis-aligned hull of the quad in the target image, clipped to the image.
 *
 * `target_pose` maps the local frame to the target camera frame. Parts of the
 * quad behind the camera are clipped away before projection. Returns nullopt
 * when nothing of the quad is in front of the camera or the hull misses the image.
 */
std::optional<Detection2D> reproject_quad(const FrontalPlaneQuad& quad, const RigidTransform& target_pose,
                                          const CameraIntrinsics& target_intr);

/// Z-buffered sparse depth image; each point lands on its rounded pixel.
DepthImage render_depth_image(std::span<const PointCloudBatch> batches, const RigidTransform& camera_pose,
                              const CameraIntrinsics& intr);
DepthImage render_depth_image(const PointCloudAggregator& aggregator, const RigidTransform& camera_pose,
                              const CameraIntrinsics& intr);

}  // namespace atlas
