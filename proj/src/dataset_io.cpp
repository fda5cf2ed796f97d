#include "atlas/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "atlas/errors.hpp"
#include "atlas/ply_io.hpp"
#include "csv.hpp"

namespace fs = std::filesystem;

namespace atlas {
namespace {

void check_monotonic(const csv::Table& table, const csv::Row& row, const SensorId& sensor, Timestamp prev,
                     Timestamp now) {
  if (now < prev) {
    throw ValidationError(fmt::format("sensor {}: timestamp {} at {} row {} is earlier than previous {}",
                                      sensor.label, now.ns, table.path.string(), row.line, prev.ns));
  }
}

template <class Record>
class TableLoader : public SensorLoader {
 public:
  TableLoader(SensorId sensor, std::vector<Record> records)
      : SensorLoader(std::move(sensor)), records_(std::move(records)) {}
  std::size_t size() const override { return records_.size(); }

 protected:
  Timestamp timestamp_at(std::size_t index) const override { return key(records_[index]); }
  SensorPacket load(std::size_t index) const override { return {sensor(), records_[index]}; }

  static Timestamp key(const Record& r) { return r.timestamp; }
  std::vector<Record> records_;
};

struct LidarIndexRecord {
  Timestamp start;
  Timestamp end;
  fs::path file;
};

class LidarLoader final : public SensorLoader {
 public:
  LidarLoader(SensorId sensor, std::vector<LidarIndexRecord> records)
      : SensorLoader(std::move(sensor)), records_(std::move(records)) {}
  std::size_t size() const override { return records_.size(); }

 protected:
  Timestamp timestamp_at(std::size_t index) const override { return records_[index].end; }
  SensorPacket load(std::size_t index) const override {
    const auto& r = records_[index];
    LidarScan scan;
    scan.sensor = sensor();
    scan.start_timestamp = r.start;
    scan.end_timestamp = r.end;
    try {
      scan.points = read_ply(r.file);
    } catch (const IoError& e) {
      throw IoError(fmt::format("sensor {} at {} ns: {}", sensor().label, r.end.ns, e.what()));
    }
    return {sensor(), std::move(scan)};
  }

 private:
  std::vector<LidarIndexRecord> records_;
};

class CameraLoader final : public SensorLoader {
 public:
  CameraLoader(SensorId sensor, std::vector<CameraFrame> frames, CameraIntrinsics intr)
      : SensorLoader(std::move(sensor)), frames_(std::move(frames)), intr_(intr) {}
  std::size_t size() const override { return frames_.size(); }

 protected:
  Timestamp timestamp_at(std::size_t index) const override { return frames_[index].timestamp; }
  SensorPacket load(std::size_t index) const override {
    CameraFrame frame = frames_[index];
    try {
      frame.image = read_png(frame.image_path);
    } catch (const IoError& e) {
      throw IoError(fmt::format("sensor {} at {} ns: {}", sensor().label, frame.timestamp.ns, e.what()));
    }
    if (frame.image->width != intr_.width || frame.image->height != intr_.height) {
      throw ValidationError(fmt::format("sensor {} at {} ns: image {} is {}x{}, calibration says {}x{}",
                                        sensor().label, frame.timestamp.ns, frame.image_path.string(),
                                        frame.image->width, frame.image->height, intr_.width, intr_.height));
    }
    return {sensor(), std::move(frame)};
  }

 private:
  std::vector<CameraFrame> frames_;
  CameraIntrinsics intr_;
};

bool detection_valid(const Detection2D& d, const CameraIntrinsics& intr) {
  if (!(d.x_min < d.x_max) || !(d.y_min < d.y_max)) return false;
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) return false;
  return d.x_max > 0.0 && d.y_max > 0.0 && d.x_min < intr.width && d.y_min < intr.height;
}

}  // namespace

std::optional<Timestamp> SensorLoader::peek_timestamp() const {
  if (exhausted()) return std::nullopt;
  return timestamp_at(cursor_);
}

SensorPacket SensorLoader::next() {
  if (exhausted()) throw RangeError(fmt::format("sensor {}: no more records", sensor_.label));
  SensorPacket packet = load(cursor_);
  ++cursor_;
  return packet;
}

MemoryLoader::MemoryLoader(SensorId sensor, std::vector<SensorPacket> packets)
    : SensorLoader(std::move(sensor)), packets_(std::move(packets)) {
  for (std::size_t i = 1; i < packets_.size(); ++i) {
    if (packets_[i].timestamp() < packets_[i - 1].timestamp()) {
      throw ValidationError(fmt::format("sensor {}: packet {} is out of order", this->sensor().label, i));
    }
  }
}

std::unique_ptr<SensorLoader> make_gnss_loader(const fs::path& csv_path) {
  const auto table = csv::read(csv_path, {"timestamp_ns", "latitude_deg", "longitude_deg", "altitude_m", "azimuth_deg"});
  const SensorId id = SensorId::of(SensorKind::gnss_pose);
  std::vector<GnssPacket> records;
  records.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    GnssPacket p;
    p.timestamp = Timestamp{csv::parse<std::uint64_t>(table, row, 0)};
    p.latitude_deg = csv::parse<double>(table, row, 1);
    p.longitude_deg = csv::parse<double>(table, row, 2);
    p.altitude_m = csv::parse<double>(table, row, 3);
    if (!row.fields[4].empty()) p.azimuth_deg = csv::parse<double>(table, row, 4);
    if (std::abs(p.latitude_deg) > 90.0 || std::abs(p.longitude_deg) > 180.0) {
      throw ValidationError(fmt::format("{} row {}: latitude/longitude out of range", csv_path.string(), row.line));
    }
    if (p.azimuth_deg && !(*p.azimuth_deg >= 0.0 && *p.azimuth_deg < 360.0)) {
      throw ValidationError(fmt::format("{} row {}: azimuth {} outside [0, 360)", csv_path.string(), row.line,
                                        *p.azimuth_deg));
    }
    if (!records.empty()) check_monotonic(table, row, id, records.back().timestamp, p.timestamp);
    records.push_back(p);
  }
  return std::make_unique<TableLoader<GnssPacket>>(id, std::move(records));
}

std::unique_ptr<SensorLoader> make_imu_loader(const fs::path& csv_path) {
  const auto table =
      csv::read(csv_path, {"timestamp_ns", "ax", "ay", "az", "gx", "gy", "gz", "qw", "qx", "qy", "qz"});
  const SensorId id = SensorId::of(SensorKind::imu);
  std::vector<ImuPacket> records;
  records.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    ImuPacket p;
    p.timestamp = Timestamp{csv::parse<std::uint64_t>(table, row, 0)};
    double v[10];
    for (std::size_t i = 0; i < 10; ++i) v[i] = csv::parse<double>(table, row, i + 1);
    p.linear_acceleration = Vec3(v[0], v[1], v[2]);
    p.angular_velocity = Vec3(v[3], v[4], v[5]);
    p.absolute_orientation = UnitQuaternion(v[6], v[7], v[8], v[9]);
    if (std::abs(p.absolute_orientation.norm() - 1.0) > 1e-6) {
      throw ValidationError(fmt::format("{} row {}: orientation is not a unit quaternion", csv_path.string(), row.line));
    }
    p.absolute_orientation.normalize();
    if (!records.empty()) check_monotonic(table, row, id, records.back().timestamp, p.timestamp);
    records.push_back(p);
  }
  return std::make_unique<TableLoader<ImuPacket>>(id, std::move(records));
}

std::unique_ptr<SensorLoader> make_lidar_loader(SensorKind kind, const fs::path& dir) {
  const auto table = csv::read(dir / "timestamps.csv", {"timestamp_start_ns", "timestamp_end_ns", "filename"});
  const SensorId id = SensorId::of(kind);
  std::vector<LidarIndexRecord> records;
  records.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    LidarIndexRecord r;
    r.start = Timestamp{csv::parse<std::uint64_t>(table, row, 0)};
    r.end = Timestamp{csv::parse<std::uint64_t>(table, row, 1)};
    r.file = dir / "scans" / row.fields[2];
    if (!(r.start < r.end)) {
      throw ValidationError(fmt::format("sensor {}: {} row {} has start {} >= end {}", id.label,
                                        table.path.string(), row.line, r.start.ns, r.end.ns));
    }
    if (!records.empty()) {
      check_monotonic(table, row, id, records.back().start, r.start);
      check_monotonic(table, row, id, records.back().end, r.end);
    }
    records.push_back(std::move(r));
  }
  return std::make_unique<LidarLoader>(id, std::move(records));
}

std::unique_ptr<SensorLoader> make_camera_loader(SensorKind kind, const fs::path& dir, const CameraIntrinsics& intr) {
  const auto table = csv::read(dir / "timestamps.csv", {"timestamp_ns", "filename"});
  const SensorId id = SensorId::of(kind);
  std::vector<CameraFrame> frames;
  frames.reserve(table.rows.size());
  std::map<std::uint64_t, std::size_t> by_time;
  for (const auto& row : table.rows) {
    CameraFrame f;
    f.sensor = id;
    f.timestamp = Timestamp{csv::parse<std::uint64_t>(table, row, 0)};
    f.image_path = dir / "frames" / row.fields[1];
    f.sequence = frames.size();
    if (!frames.empty()) check_monotonic(table, row, id, frames.back().timestamp, f.timestamp);
    by_time.emplace(f.timestamp.ns, frames.size());
    frames.push_back(std::move(f));
  }

  const fs::path det_path = dir / "detections.csv";
  if (fs::exists(det_path)) {
    const auto dets =
        csv::read(det_path, {"timestamp_ns", "x_min", "y_min", "x_max", "y_max", "class_id", "confidence"});
    for (const auto& row : dets.rows) {
      const auto ts = csv::parse<std::uint64_t>(dets, row, 0);
      Detection2D d;
      d.x_min = csv::parse<double>(dets, row, 1);
      d.y_min = csv::parse<double>(dets, row, 2);
      d.x_max = csv::parse<double>(dets, row, 3);
      d.y_max = csv::parse<double>(dets, row, 4);
      d.class_id = csv::parse<int>(dets, row, 5);
      d.confidence = csv::parse<double>(dets, row, 6);
      if (!detection_valid(d, intr)) {
        throw ValidationError(fmt::format("{} row {}: degenerate or out-of-image bounding box", det_path.string(),
                                          row.line));
      }
      auto it = by_time.find(ts);
      if (it == by_time.end()) {
        throw ValidationError(
            fmt::format("{} row {}: no frame with timestamp {} in {}", det_path.string(), row.line, ts, id.label));
      }
      frames[it->second].detections.push_back(d);
    }
  }
  return std::make_unique<CameraLoader>(id, std::move(frames), intr);
}

DatasetReader::DatasetReader(std::vector<std::unique_ptr<SensorLoader>> loaders) : loaders_(std::move(loaders)) {}

void DatasetReader::add_loader(std::unique_ptr<SensorLoader> loader) { loaders_.push_back(std::move(loader)); }

std::optional<SensorPacket> DatasetReader::next_packet() {
  SensorLoader* best = nullptr;
  Timestamp best_ts;
  for (const auto& loader : loaders_) {
    const auto ts = loader->peek_timestamp();
    if (!ts) continue;
    // Strict comparisons keep the earlier kind, then the earlier-registered loader, on ties.
    if (!best || *ts < best_ts || (*ts == best_ts && loader->sensor().kind < best->sensor().kind)) {
      best = loader.get();
      best_ts = *ts;
    }
  }
  if (!best) return std::nullopt;
  return best->next();
}

std::size_t DatasetReader::total_records() const {
  std::size_t n = 0;
  for (const auto& l : loaders_) n += l->size();
  return n;
}

std::vector<SensorId> DatasetReader::sensors() const {
  std::vector<SensorId> out;
  for (const auto& l : loaders_) out.push_back(l->sensor());
  return out;
}

DatasetReader open_dataset(const fs::path& root, const PipelineConfig& config) {
  if (!fs::is_directory(root)) throw LoadError(fmt::format("dataset root {} is not a directory", root.string()));

  std::vector<std::unique_ptr<SensorLoader>> loaders;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());

  for (const auto& dir : dirs) {
    const std::string name = dir.filename().string();
    if (name == "gnss") {
      loaders.push_back(make_gnss_loader(dir / "pose.csv"));
    } else if (name == "imu") {
      loaders.push_back(make_imu_loader(dir / "imu.csv"));
    } else if (name.rfind("lidar_", 0) == 0 || name.rfind("camera_", 0) == 0) {
      const auto kind = sensor_kind_from_string(name);
      if (!kind) throw ValidationError(fmt::format("unknown sensor directory {}", dir.string()));
      if (!config.calibrations.contains(*kind)) {
        throw LoadError(fmt::format("no calibration entry sensors.{} for directory {}", name, dir.string()));
      }
      if (is_lidar(*kind)) {
        loaders.push_back(make_lidar_loader(*kind, dir));
      } else {
        const auto& intr = config.calibrations.at(*kind).intrinsics;
        if (!intr) throw LoadError(fmt::format("sensor {} has no intrinsics", name));
        loaders.push_back(make_camera_loader(*kind, dir, *intr));
      }
    }
  }
  if (loaders.empty()) {
    throw LoadError(fmt::format(
        "dataset root {} has no sensor data; missing components: gnss/pose.csv, imu/imu.csv, "
        "lidar_<label>/timestamps.csv, camera_<label>/timestamps.csv",
        root.string()));
  }
  std::stable_sort(loaders.begin(), loaders.end(),
                   [](const auto& a, const auto& b) { return a->sensor().kind < b->sensor().kind; });
  return DatasetReader(std::move(loaders));
}

}  // namespace atlas
