#include "atlas/detection_fusion.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "atlas/errors.hpp"
#include "atlas/munkres.hpp"

namespace atlas {
namespace {

void project_batch(const PointCloudBatch& batch, const RigidTransform& camera_pose, const CameraIntrinsics& intr,
                   std::vector<ProjectedPoint>& out) {
  const RigidTransform t = batch.chain().then(camera_pose).collapse();
  const Eigen::Matrix3d r = t.rotation().toRotationMatrix();
  for (const auto& p : batch.points()) {
    const Vec3 pc = r * p.position + t.translation();
    if (const auto px = project_point(intr, pc)) out.push_back({px->u, px->v, pc.z()});
  }
}

bool inside(const ProjectedPoint& p, const Detection2D& b) {
  return p.u >= b.x_min && p.u <= b.x_max && p.v >= b.y_min && p.v <= b.y_max;
}

}  // namespace

std::vector<ProjectedPoint> project_cloud_to_camera(std::span<const PointCloudBatch> batches,
                                                    const RigidTransform& camera_pose, const CameraIntrinsics& intr) {
  std::vector<ProjectedPoint> out;
  for (const auto& b : batches) project_batch(b, camera_pose, intr, out);
  return out;
}

std::vector<ProjectedPoint> project_cloud_to_camera(const PointCloudAggregator& aggregator,
                                                    const RigidTransform& camera_pose, const CameraIntrinsics& intr) {
  std::vector<ProjectedPoint> out;
  for (const auto& b : aggregator.batches()) project_batch(b, camera_pose, intr, out);
  return out;
}

std::optional<double> median_depth_in_bbox(std::span<const ProjectedPoint> projected, const Detection2D& bbox) {
  std::vector<double> depths;
  for (const auto& p : projected) {
    if (inside(p, bbox)) depths.push_back(p.depth);
  }
  if (depths.empty()) return std::nullopt;
  const std::size_t mid = depths.size() / 2;
  std::nth_element(depths.begin(), depths.begin() + static_cast<std::ptrdiff_t>(mid), depths.end());
  const double upper = depths[mid];
  if (depths.size() % 2 == 1) return upper;
  const double lower = *std::max_element(depths.begin(), depths.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

std::size_t count_in_bbox(std::span<const ProjectedPoint> projected, const Detection2D& bbox) {
  return static_cast<std::size_t>(
      std::count_if(projected.begin(), projected.end(), [&](const ProjectedPoint& p) { return inside(p, bbox); }));
}

FrustumDetection detection_to_frustum(const Detection2D& det, const CameraIntrinsics& intr,
                                      const RigidTransform& camera_to_local, double depth, double depth_margin,
                                      Provenance source) {
  if (!(depth > 0.0)) throw ArgumentError(fmt::format("detection_to_frustum: depth must be positive, got {}", depth));
  const UnitQuaternion& r = camera_to_local.rotation();
  const Vec3 axis_cam = pixel_ray(intr, det.center_u(), det.center_v());
  const double range = depth / axis_cam.z();

  FrustumDetection out;
  out.frustum.origin = camera_to_local.translation();
  out.frustum.axis = (r * axis_cam).normalized();
  out.frustum.corner_rays = {r * pixel_ray(intr, det.x_min, det.y_min), r * pixel_ray(intr, det.x_max, det.y_min),
                             r * pixel_ray(intr, det.x_max, det.y_max), r * pixel_ray(intr, det.x_min, det.y_max)};
  out.frustum.near_distance = range * (1.0 - depth_margin);
  out.frustum.far_distance = range * (1.0 + depth_margin);
  out.class_id = det.class_id;
  out.confidence = det.confidence;
  out.distance = range;
  out.source = std::move(source);
  return out;
}

Vec3 predicted_centroid(const FusedObject& object, Timestamp now) {
  return object.centroid + object.velocity * seconds_between(object.last_seen, now);
}

namespace {

Eigen::MatrixXd build_costs(const std::vector<FusedObject>& objects, std::span<const FrustumDetection> detections,
                            Timestamp now, const FusionConfig& cfg) {
  Eigen::MatrixXd costs(static_cast<Eigen::Index>(objects.size()), static_cast<Eigen::Index>(detections.size()));
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const Vec3 pred = predicted_centroid(objects[i], now);
    for (std::size_t j = 0; j < detections.size(); ++j) {
      double c = kForbiddenCost;
      if (objects[i].class_id == detections[j].class_id) {
        const double d = (pred - detections[j].center_point()).norm();
        if (d <= cfg.gate) c = d;
      }
      costs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
    }
  }
  return costs;
}

void absorb(FusedObject& obj, const FrustumDetection& det, Timestamp now, const FusionConfig& cfg) {
  const Vec3 pred = predicted_centroid(obj, now);
  obj.centroid = (1.0 - cfg.smoothing) * pred + cfg.smoothing * det.center_point();
  if (!obj.history.empty() && obj.history.back().first == now) {
    obj.history.back().second = obj.centroid;
  } else {
    obj.history.emplace_back(now, obj.centroid);
  }
  while (obj.history.size() > cfg.history_length) obj.history.pop_front();
  if (obj.history.size() >= 2) {
    const auto& [t1, p1] = obj.history.back();
    const auto& [t0, p0] = obj.history[obj.history.size() - 2];
    obj.velocity = (p1 - p0) / seconds_between(t0, t1);
  }
  obj.last_seen = now;
  obj.source = det.source;
}

}  // namespace

std::vector<FusedObject> aggregate_objects(std::vector<FusedObject> existing,
                                           std::span<const FrustumDetection> detections, Timestamp now,
                                           const FusionConfig& cfg, std::uint64_t& next_id) {
  std::vector<bool> matched(detections.size(), false);
  if (!existing.empty() && !detections.empty()) {
    const Eigen::MatrixXd costs = build_costs(existing, detections, now, cfg);
    for (const auto& [r, c] : munkres_assign(costs)) {
      absorb(existing[static_cast<std::size_t>(r)], detections[static_cast<std::size_t>(c)], now, cfg);
      matched[static_cast<std::size_t>(c)] = true;
    }
  }
  for (std::size_t j = 0; j < detections.size(); ++j) {
    if (matched[j]) continue;
    FusedObject obj;
    obj.id = next_id++;
    obj.class_id = detections[j].class_id;
    obj.centroid = detections[j].center_point();
    obj.history.emplace_back(now, obj.centroid);
    obj.last_seen = now;
    obj.source = detections[j].source;
    existing.push_back(std::move(obj));
  }
  std::erase_if(existing, [&](const FusedObject& o) { return seconds_between(o.last_seen, now) > cfg.ttl; });
  return existing;
}

const std::vector<FusedObject>& ObjectAggregator::update(std::span<const FrustumDetection> detections, Timestamp now) {
  objects_ = aggregate_objects(std::move(objects_), detections, now, config_, next_id_);
  return objects_;
}

Eigen::MatrixXd ObjectAggregator::cost_matrix(std::span<const FrustumDetection> detections, Timestamp now) const {
  return build_costs(objects_, detections, now, config_);
}

}  // namespace atlas
