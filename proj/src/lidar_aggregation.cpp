#include "atlas/lidar_aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "atlas/errors.hpp"

namespace atlas {
namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    std::size_t h = std::hash<std::int64_t>{}(k.x);
    h ^= std::hash<std::int64_t>{}(k.y) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<std::int64_t>{}(k.z) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

}  // namespace

PointCloudBatch::PointCloudBatch(std::vector<LidarPoint> points, TransformChain chain, Timestamp batch_timestamp,
                                 SensorId source)
    : points_(std::move(points)),
      chain_(std::move(chain)),
      batch_timestamp_(batch_timestamp),
      source_(std::move(source)) {}

void PointCloudBatch::set_chain(TransformChain chain) {
  chain_ = std::move(chain);
  cached_.reset();
}

const RigidTransform& PointCloudBatch::transform() const {
  if (!cached_) {
    cached_ = chain_.collapse();
    ++collapse_count_;
  }
  return *cached_;
}

std::vector<LidarPoint> PointCloudBatch::world_points() const {
  const RigidTransform& t = transform();
  const Eigen::Matrix3d r = t.rotation().toRotationMatrix();
  std::vector<LidarPoint> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back({r * p.position + t.translation(), p.intensity});
  return out;
}

LidarScan downsample(const LidarScan& scan, double leaf) {
  if (!(leaf > 0.0)) throw ArgumentError(fmt::format("downsample: leaf must be positive, got {}", leaf));
  LidarScan out;
  out.sensor = scan.sensor;
  out.start_timestamp = scan.start_timestamp;
  out.end_timestamp = scan.end_timestamp;
  std::unordered_set<VoxelKey, VoxelKeyHash> occupied;
  occupied.reserve(scan.points.size());
  for (const auto& p : scan.points) {
    const VoxelKey key{static_cast<std::int64_t>(std::floor(p.position.x() / leaf)),
                       static_cast<std::int64_t>(std::floor(p.position.y() / leaf)),
                       static_cast<std::int64_t>(std::floor(p.position.z() / leaf))};
    if (occupied.insert(key).second) out.points.push_back(p);
  }
  return out;
}

std::vector<PointCloudBatch> split_into_batches(const LidarScan& scan, const RigidTransform& pose_prev,
                                                const RigidTransform& pose_now, const RigidTransform& lidar_to_imu,
                                                int batch_count) {
  if (batch_count < 1) throw ArgumentError(fmt::format("split_into_batches: N must be >= 1, got {}", batch_count));
  if (scan.points.empty()) throw ArgumentError("split_into_batches: empty scan");

  const std::size_t n = scan.points.size();
  const auto slices = static_cast<std::size_t>(batch_count);
  const std::size_t per_batch = (n + slices - 1) / slices;
  const double duration = static_cast<double>(scan.end_timestamp.ns - scan.start_timestamp.ns);

  std::vector<PointCloudBatch> out;
  out.reserve(slices);
  for (std::size_t k = 0; k < slices; ++k) {
    const std::size_t begin = k * per_batch;
    if (begin >= n) break;
    const std::size_t end = std::min(n, begin + per_batch);
    const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(slices);
    TransformChain chain({interpolate_pose(pose_prev, pose_now, t), lidar_to_imu});
    const Timestamp stamp{scan.start_timestamp.ns + static_cast<std::uint64_t>(std::llround(t * duration))};
    out.emplace_back(std::vector<LidarPoint>(scan.points.begin() + static_cast<std::ptrdiff_t>(begin),
                                             scan.points.begin() + static_cast<std::ptrdiff_t>(end)),
                     std::move(chain), stamp, scan.sensor);
  }
  return out;
}

void PointCloudAggregator::insert_batches(std::vector<PointCloudBatch> batches) {
  for (auto& b : batches) {
    const auto pos = std::upper_bound(batches_.begin(), batches_.end(), b.batch_timestamp(),
                                      [](Timestamp t, const PointCloudBatch& x) { return t < x.batch_timestamp(); });
    batches_.insert(pos, std::move(b));
  }
}

void PointCloudAggregator::evict_expired(Timestamp now, double window_seconds) {
  const std::uint64_t window = seconds_to_ns(window_seconds);
  if (now.ns < window) return;
  const Timestamp cutoff{now.ns - window};
  while (!batches_.empty() && batches_.front().batch_timestamp() < cutoff) batches_.pop_front();
}

std::vector<LidarPoint> PointCloudAggregator::aggregated_world_cloud() const {
  std::vector<LidarPoint> out;
  out.reserve(point_count());
  for (const auto& b : batches_) {
    auto pts = b.world_points();
    out.insert(out.end(), pts.begin(), pts.end());
  }
  return out;
}

std::size_t PointCloudAggregator::point_count() const {
  std::size_t n = 0;
  for (const auto& b : batches_) n += b.size();
  return n;
}

}  // namespace atlas
