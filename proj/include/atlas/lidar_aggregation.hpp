#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "atlas/config.hpp"
#include "atlas/geometry.hpp"
#include "atlas/sensor_data.hpp"

namespace atlas {

/**
 * A time-local slice of a scan with its points still in the sensor frame.
 *
 * World coordinates exist only through the chain; the collapsed chain is
 * computed on first use and kept until the chain is replaced.
 */
class PointCloudBatch {
 public:
  PointCloudBatch(std::vector<LidarPoint> points, TransformChain chain, Timestamp batch_timestamp, SensorId source);

  const std::vector<LidarPoint>& points() const { return points_; }
  const TransformChain& chain() const { return chain_; }
  Timestamp batch_timestamp() const { return batch_timestamp_; }
  const SensorId& source() const { return source_; }
  std::size_t size() const { return points_.size(); }

  void set_chain(TransformChain chain);

  /// Sensor-to-local transform (the collapsed chain), cached.
  const RigidTransform& transform() const;
  bool has_cached_transform() const { return cached_.has_value(); }
  /// Number of times the chain has been collapsed; exposed for tests.
  std::size_t collapse_count() const { return collapse_count_; }

  /// Points mapped through the chain.
  std::vector<LidarPoint> world_points() const;

 private:
  std::vector<LidarPoint> points_;
  TransformChain chain_;
  Timestamp batch_timestamp_;
  SensorId source_;
  mutable std::optional<RigidTransform> cached_;
  mutable std::size_t collapse_count_ = 0;
};

/// Keeps the first point (in acquisition order) of every occupied cubic voxel of side `leaf`.
LidarScan downsample(const LidarScan& scan, double leaf);

/**
 * Splits a scan into `batch_count` contiguous index slices of ceil(n / N)
 * points. Slice k is posed at fraction (k + 0.5) / N of the way from
 * `pose_prev` (scan start) to `pose_now` (scan end), composed with the
 * sensor extrinsic.
 */
std::vector<PointCloudBatch> split_into_batches(const LidarScan& scan, const RigidTransform& pose_prev,
                                                const RigidTransform& pose_now, const RigidTransform& lidar_to_imu,
                                                int batch_count);

/// Time-windowed store of batches ordered by batch timestamp.
class PointCloudAggregator {
 public:
  void insert_batches(std::vector<PointCloudBatch> batches);

  /// Drops batches older than now - window; a batch exactly at the boundary stays.
  void evict_expired(Timestamp now, double window_seconds);

  std::vector<LidarPoint> aggregated_world_cloud() const;

  const std::deque<PointCloudBatch>& batches() const { return batches_; }
  std::size_t batch_count() const { return batches_.size(); }
  std::size_t point_count() const;
  bool empty() const { return batches_.empty(); }

 private:
  std::deque<PointCloudBatch> batches_;
};

}  // namespace atlas
