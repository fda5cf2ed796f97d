#pragma once

#include <map>
#include <optional>
#include <vector>

#include "atlas/detection_fusion.hpp"
#include "atlas/lidar_aggregation.hpp"
#include "atlas/positioning.hpp"

namespace atlas {

/// Latest map state per category; every write replaces the previous value.
class LocalMap {
 public:
  void set_frustums(SensorKind camera, std::vector<FrustumDetection> frustums);
  /// Empty when nothing was stored for the camera yet.
  const std::vector<FrustumDetection>& get_frustums(SensorKind camera) const;

  void set_objects(std::vector<FusedObject> objects) { objects_ = std::move(objects); }
  const std::vector<FusedObject>& get_objects() const { return objects_; }

  void set_pose(const LocalPosition& pose) { pose_ = pose; }
  const std::optional<LocalPosition>& get_pose() const { return pose_; }

  void set_aggregator(const PointCloudAggregator* aggregator) { aggregator_ = aggregator; }
  const PointCloudAggregator* aggregator() const { return aggregator_; }

 private:
  std::map<SensorKind, std::vector<FrustumDetection>> frustums_;
  std::vector<FusedObject> objects_;
  std::optional<LocalPosition> pose_;
  const PointCloudAggregator* aggregator_ = nullptr;
};

}  // namespace atlas
