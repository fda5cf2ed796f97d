#include "atlas/pipeline.hpp"

#include <chrono>
#include <deque>
#include <optional>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "atlas/dataset_io.hpp"
#include "atlas/detection_fusion.hpp"
#include "atlas/errors.hpp"
#include "atlas/lidar_aggregation.hpp"
#include "atlas/local_map.hpp"
#include "atlas/ply_io.hpp"
#include "atlas/positioning.hpp"
#include "atlas/reprojection_depth.hpp"
#include "atlas/writers.hpp"

namespace atlas {
namespace {

namespace fs = std::filesystem;

struct SourceFrame {
  Timestamp timestamp;
  std::vector<FrustumDetection> frustums;
};

CameraIntrinsics intrinsics_for(const PipelineConfig& cfg, SensorKind kind) {
  const auto calib = cfg.calibration(kind);
  if (!calib.intrinsics) throw ConfigError(fmt::format("sensors.{}.intrinsics is required", to_string(kind)));
  return *calib.intrinsics;
}

class Pipeline {
 public:
  explicit Pipeline(const PipelineConfig& cfg)
      : cfg_(cfg),
        out_(cfg.output_path),
        failchecker_(cfg.failcheck),
        estimator_(cfg.positioning),
        objects_(cfg.fusion) {
    fs::create_directories(out_ / "ir_annotations");
    fs::create_directories(out_ / "depth");
    trajectory_.emplace(out_ / "trajectory.csv", kTrajectoryHeader);
    objects_csv_.emplace(out_ / "objects.csv", kObjectsHeader);
    failcheck_csv_.emplace(out_ / "failcheck.csv", kFailcheckHeader);
    map_.set_aggregator(&aggregator_);
  }

  void process(SensorPacket& packet, RunReport& report) {
    if (cfg_.stages.failcheck) {
      for (auto& a : failchecker_.ingest(packet)) {
        const double score = failchecker_.reliability(a.sensor, a.timestamp).value;
        failcheck_csv_->write_line(failcheck_row(a, score));
        report.anomalies.push_back(std::move(a));
      }
    }
    std::visit([&](auto& data) { handle(data, report); }, packet.data);
  }

  void finish() {
    if (pending_pose_) trajectory_->write_line(trajectory_row(*pending_pose_));
    trajectory_->flush();
    objects_csv_->flush();
    failcheck_csv_->flush();
  }

 private:
  // One trajectory row per timestamp: the last update at a given instant wins.
  void record_pose(const LocalPosition& pose) {
    map_.set_pose(pose);
    if (pending_pose_ && pending_pose_->timestamp != pose.timestamp) {
      trajectory_->write_line(trajectory_row(*pending_pose_));
    }
    pending_pose_ = pose;
  }

  void handle(const GnssPacket& fix, RunReport&) {
    if (!cfg_.stages.positioning) return;
    record_pose(estimator_.on_gnss(fix));
  }

  void handle(const ImuPacket& sample, RunReport&) {
    if (!cfg_.stages.positioning) return;
    const LocalPosition pose = estimator_.on_imu(sample);
    if (estimator_.anchored()) record_pose(pose);
  }

  void handle(const LidarScan& raw, RunReport& report) {
    if (!cfg_.stages.aggregation) return;
    const auto& label = raw.sensor.label;
    const auto prev = estimator_.try_pose_at(raw.start_timestamp, kMaxPoseExtrapolation);
    const auto now = estimator_.try_pose_at(raw.end_timestamp, kMaxPoseExtrapolation);
    if (!prev || !now) {
      spdlog::warn("{} scan at {} ns skipped: no pose for [{}, {}] ns", label, raw.end_timestamp.ns,
                   raw.start_timestamp.ns, raw.end_timestamp.ns);
      ++report.lidar_scans_skipped;
      return;
    }
    const LidarScan scan = downsample(raw, cfg_.aggregation.voxel_leaf);
    if (scan.points.empty() || !(raw.end_timestamp > raw.start_timestamp)) {
      spdlog::warn("{} scan at {} ns skipped: empty or zero-duration", label, raw.end_timestamp.ns);
      ++report.lidar_scans_skipped;
      return;
    }
    const RigidTransform extrinsic = cfg_.calibration(raw.sensor.kind).extrinsic;
    aggregator_.insert_batches(
        split_into_batches(scan, prev->pose(), now->pose(), extrinsic, cfg_.aggregation.batch_count));
    aggregator_.evict_expired(raw.end_timestamp, cfg_.aggregation.window);
    ++report.lidar_scans_aggregated;

    const double every = cfg_.aggregation.snapshot_every;
    if (every > 0.0 && (!last_snapshot_ || seconds_between(*last_snapshot_, raw.end_timestamp) >= every)) {
      write_ply(out_ / fmt::format("aggregated_{}.ply", raw.end_timestamp.ns), aggregator_.aggregated_world_cloud());
      last_snapshot_ = raw.end_timestamp;
      ++report.snapshots;
    }
  }

  void handle(const CameraFrame& frame, RunReport& report) {
    if (frame.sensor.kind == cfg_.transfer.target_camera) {
      handle_target(frame, report);
    } else if (!frame.detections.empty()) {
      handle_detections(frame, report);
    }
  }

  std::optional<RigidTransform> camera_to_local(const CameraFrame& frame, RunReport& report) {
    const auto pose = estimator_.try_pose_at(frame.timestamp, kMaxPoseExtrapolation);
    if (!pose) {
      spdlog::warn("{} frame {} at {} ns skipped: no pose", frame.sensor.label, frame.sequence, frame.timestamp.ns);
      ++report.camera_frames_skipped;
      return std::nullopt;
    }
    return pose->pose() * cfg_.calibration(frame.sensor.kind).extrinsic;
  }

  void handle_detections(const CameraFrame& frame, RunReport& report) {
    if (!cfg_.stages.detection) return;
    const auto cam_to_local = camera_to_local(frame, report);
    if (!cam_to_local) return;
    const CameraIntrinsics intr = intrinsics_for(cfg_, frame.sensor.kind);
    const auto projected = project_cloud_to_camera(aggregator_, cam_to_local->inverse(), intr);

    std::vector<FrustumDetection> frustums;
    for (const auto& det : frame.detections) {
      const auto depth = median_depth_in_bbox(projected, det);
      if (!depth) {
        spdlog::debug("{} frame {}: no LiDAR support for class {} box", frame.sensor.label, frame.sequence,
                      det.class_id);
        continue;
      }
      spdlog::debug("{} frame {}: class {} at {:.3f} m from {} points", frame.sensor.label, frame.sequence,
                    det.class_id, *depth, count_in_bbox(projected, det));
      frustums.push_back(detection_to_frustum(det, intr, *cam_to_local, *depth, cfg_.fusion.depth_margin,
                                              {frame.sensor, frame.timestamp}));
    }
    report.frustums_built += frustums.size();
    ++report.camera_frames_fused;

    const auto& objects = objects_.update(frustums, frame.timestamp);
    map_.set_objects(objects);
    for (const auto& o : objects) objects_csv_->write_line(object_row(frame.timestamp, o));

    if (frame.sensor.kind == cfg_.transfer.source_camera) {
      source_frames_.push_back({frame.timestamp, frustums});
      const double keep = std::max(1.0, 2.0 * cfg_.transfer.max_time_offset);
      while (source_frames_.size() > 1 && seconds_between(source_frames_.front().timestamp, frame.timestamp) > keep) {
        source_frames_.pop_front();
      }
    }
    map_.set_frustums(frame.sensor.kind, std::move(frustums));
  }

  void handle_target(const CameraFrame& frame, RunReport& report) {
    if (!cfg_.stages.transfer && !cfg_.stages.depth) return;
    const auto cam_to_local = camera_to_local(frame, report);
    if (!cam_to_local) return;
    const CameraIntrinsics intr = intrinsics_for(cfg_, frame.sensor.kind);
    const RigidTransform target_pose = cam_to_local->inverse();
    const std::string stem = fmt::format("{:06d}", frame.sequence);

    if (cfg_.stages.transfer && !source_frames_.empty()) {
      std::vector<Timestamp> timeline;
      for (const auto& s : source_frames_) timeline.push_back(s.timestamp);
      const SourceFrame& src = source_frames_[nearest_frame(timeline, frame.timestamp)];
      if (std::abs(seconds_between(src.timestamp, frame.timestamp)) <= cfg_.transfer.max_time_offset) {
        std::vector<Detection2D> transferred;
        for (const auto& fr : src.frustums) {
          if (auto det = reproject_quad(frustum_frontal_plane(fr), target_pose, intr)) transferred.push_back(*det);
        }
        write_yolo_annotations(out_ / "ir_annotations" / (stem + ".txt"), intr.width, intr.height, transferred);
        ++report.annotation_files;
      }
    }
    if (cfg_.stages.depth) {
      write_depth_png(out_ / "depth" / (stem + ".png"), render_depth_image(aggregator_, target_pose, intr));
      ++report.depth_images;
    }
  }

  const PipelineConfig& cfg_;
  fs::path out_;
  FailChecker failchecker_;
  PoseEstimator estimator_;
  PointCloudAggregator aggregator_;
  ObjectAggregator objects_;
  LocalMap map_;
  std::deque<SourceFrame> source_frames_;
  std::optional<Timestamp> last_snapshot_;
  std::optional<LocalPosition> pending_pose_;
  std::optional<CsvWriter> trajectory_;
  std::optional<CsvWriter> objects_csv_;
  std::optional<CsvWriter> failcheck_csv_;
};

}  // namespace

RunReport run(const PipelineConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  config.validate();
  if (const auto level = spdlog::level::from_str(config.log_level); level != spdlog::level::off ||
                                                                    config.log_level == "off") {
    spdlog::set_level(level);
  }

  DatasetReader reader = open_dataset(config.dataset_path, config);
  RunReport report;
  report.dataset_records = reader.total_records();
  for (const auto& s : reader.sensors()) report.packets_per_sensor[s.label] = 0;

  Pipeline pipeline(config);
  while (auto packet = reader.next_packet()) {
    const Timestamp ts = packet->timestamp();
    if (config.until && ts > *config.until) break;
    ++report.packets_per_sensor[packet->sensor.label];
    ++report.total_packets;
    try {
      pipeline.process(*packet, report);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(fmt::format("{} packet at {} ns: {}", packet->sensor.label, ts.ns, e.what()));
    }
  }
  pipeline.finish();
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  spdlog::info("processed {} packets in {:.2f} s", report.total_packets, report.wall_time_seconds);
  return report;
}

}  // namespace atlas
