#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "atlas/config.hpp"
#include "atlas/sensor_data.hpp"

namespace atlas {

/**
 * One time-ordered record stream from a single sensor.
 *
 * Index files are parsed up front; payloads (PLY bodies, images) are read in
 * next() only.
 */
class SensorLoader {
 public:
  explicit SensorLoader(SensorId sensor) : sensor_(std::move(sensor)) {}
  virtual ~SensorLoader() = default;
  SensorLoader(const SensorLoader&) = delete;
  SensorLoader& operator=(const SensorLoader&) = delete;

  const SensorId& sensor() const { return sensor_; }

  /// Timestamp of the next record without consuming it; nullopt when exhausted.
  std::optional<Timestamp> peek_timestamp() const;

  /// Consumes and returns the next record. Throws IoError on unreadable payloads.
  SensorPacket next();

  bool exhausted() const { return cursor_ >= size(); }
  std::size_t consumed() const { return cursor_; }
  virtual std::size_t size() const = 0;

 protected:
  virtual Timestamp timestamp_at(std::size_t index) const = 0;
  virtual SensorPacket load(std::size_t index) const = 0;

 private:
  SensorId sensor_;
  std::size_t cursor_ = 0;
};

/// Loader over packets already in memory (tests, tools).
class MemoryLoader final : public SensorLoader {
 public:
  MemoryLoader(SensorId sensor, std::vector<SensorPacket> packets);
  std::size_t size() const override { return packets_.size(); }

 protected:
  Timestamp timestamp_at(std::size_t index) const override { return packets_[index].timestamp(); }
  SensorPacket load(std::size_t index) const override { return packets_[index]; }

 private:
  std::vector<SensorPacket> packets_;
};

/// Reads gnss/pose.csv. Throws LoadError / ValidationError.
std::unique_ptr<SensorLoader> make_gnss_loader(const std::filesystem::path& csv);
std::unique_ptr<SensorLoader> make_imu_loader(const std::filesystem::path& csv);
std::unique_ptr<SensorLoader> make_lidar_loader(SensorKind kind, const std::filesystem::path& dir);
/// `intr` drives resolution checks on images and detection bounds.
std::unique_ptr<SensorLoader> make_camera_loader(SensorKind kind, const std::filesystem::path& dir,
                                                 const CameraIntrinsics& intr);

/**
 * Merges per-sensor loaders into one stream ordered by timestamp.
 *
 * Ties are broken by sensor kind (gnss, imu, lidar_left, lidar_right,
 * cameras), then by registration order.
 */
class DatasetReader {
 public:
  DatasetReader() = default;
  explicit DatasetReader(std::vector<std::unique_ptr<SensorLoader>> loaders);

  void add_loader(std::unique_ptr<SensorLoader> loader);

  std::optional<SensorPacket> next_packet();

  std::size_t loader_count() const { return loaders_.size(); }
  const std::vector<std::unique_ptr<SensorLoader>>& loaders() const { return loaders_; }
  std::size_t total_records() const;
  std::vector<SensorId> sensors() const;

 private:
  std::vector<std::unique_ptr<SensorLoader>> loaders_;
};

/// Opens every sensor stream under `root`. Throws LoadError / ValidationError.
DatasetReader open_dataset(const std::filesystem::path& root, const PipelineConfig& config);

}  // namespace atlas
