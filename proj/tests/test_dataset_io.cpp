#include <doctest.h>

#include <random>

#include "atlas/dataset_io.hpp"
#include "atlas/errors.hpp"
#include "atlas/image_io.hpp"
#include "atlas/ply_io.hpp"
#include "atlas/scenario_gen.hpp"
#include "fixtures.hpp"
#include "oracles/merge_oracle.hpp"
#include "support.hpp"

using namespace atlas;
namespace fs = std::filesystem;

namespace {

SensorPacket imu_at(std::uint64_t ns) {
  ImuPacket p;
  p.timestamp = Timestamp{ns};
  return {SensorId::of(SensorKind::imu), p};
}

SensorPacket packet_for(SensorKind kind, std::uint64_t ns, std::size_t tag) {
  const SensorId id = SensorId::of(kind);
  switch (kind) {
    case SensorKind::gnss_pose: {
      GnssPacket g;
      g.timestamp = Timestamp{ns};
      g.altitude_m = static_cast<double>(tag);
      return {id, g};
    }
    case SensorKind::imu: {
      ImuPacket p;
      p.timestamp = Timestamp{ns};
      p.linear_acceleration.x() = static_cast<double>(tag);
      return {id, p};
    }
    case SensorKind::lidar_left:
    case SensorKind::lidar_right: {
      LidarScan s;
      s.sensor = id;
      s.start_timestamp = Timestamp{ns > 5 ? ns - 5 : 0};
      s.end_timestamp = Timestamp{ns};
      s.points.push_back({Vec3::Zero(), static_cast<double>(tag)});
      return {id, s};
    }
    default: {
      CameraFrame f;
      f.sensor = id;
      f.timestamp = Timestamp{ns};
      f.sequence = tag;
      return {id, f};
    }
  }
}

std::size_t tag_of(const SensorPacket& p) {
  return std::visit(
      [](const auto& d) -> std::size_t {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GnssPacket>) return static_cast<std::size_t>(d.altitude_m);
        if constexpr (std::is_same_v<T, ImuPacket>) return static_cast<std::size_t>(d.linear_acceleration.x());
        if constexpr (std::is_same_v<T, LidarScan>) return static_cast<std::size_t>(d.points[0].intensity);
        if constexpr (std::is_same_v<T, CameraFrame>) return d.sequence;
      },
      p.data);
}

std::vector<std::uint64_t> drain_timestamps(DatasetReader& reader) {
  std::vector<std::uint64_t> out;
  while (auto p = reader.next_packet()) out.push_back(p->timestamp().ns);
  return out;
}

struct GeneratedDataset {
  testing::TempDir dir{"dataset"};
  ScenarioSpec spec = testing::small_scenario();
  GenerationReport report;
  PipelineConfig config;
  GeneratedDataset() {
    report = generate_scenario(spec, dir.path());
    config = pipeline_config_for(spec, dir.path());
  }
};

}  // namespace

TEST_CASE("peek does not consume; exhausted loader peeks nothing") {
  MemoryLoader loader(SensorId::of(SensorKind::imu), {imu_at(5), imu_at(9)});
  CHECK(loader.peek_timestamp()->ns == 5);
  CHECK(loader.peek_timestamp()->ns == 5);
  CHECK(loader.next().timestamp().ns == 5);
  CHECK(loader.peek_timestamp()->ns == 9);
  loader.next();
  CHECK_FALSE(loader.peek_timestamp());
  CHECK(loader.exhausted());
  CHECK_THROWS_AS(loader.next(), RangeError);
}

TEST_CASE("multiplexer interleaves by timestamp") {
  DatasetReader reader;
  reader.add_loader(std::make_unique<MemoryLoader>(SensorId::of(SensorKind::imu),
                                                   std::vector{imu_at(1), imu_at(3)}));
  reader.add_loader(std::make_unique<MemoryLoader>(
      SensorId::of(SensorKind::lidar_left),
      std::vector{packet_for(SensorKind::lidar_left, 2, 0), packet_for(SensorKind::lidar_left, 4, 1)}));
  CHECK(drain_timestamps(reader) == std::vector<std::uint64_t>{1, 2, 3, 4});
}

TEST_CASE("an empty loader is neutral") {
  DatasetReader reader;
  reader.add_loader(std::make_unique<MemoryLoader>(SensorId::of(SensorKind::imu), std::vector{imu_at(1), imu_at(3)}));
  reader.add_loader(std::make_unique<MemoryLoader>(SensorId::of(SensorKind::lidar_left), std::vector<SensorPacket>{}));
  reader.add_loader(std::make_unique<MemoryLoader>(
      SensorId::of(SensorKind::camera_ir), std::vector{packet_for(SensorKind::camera_ir, 2, 0)}));
  CHECK(drain_timestamps(reader) == std::vector<std::uint64_t>{1, 2, 3});
}

TEST_CASE("equal timestamps: gnss before imu regardless of registration order") {
  DatasetReader reader;
  reader.add_loader(std::make_unique<MemoryLoader>(SensorId::of(SensorKind::imu), std::vector{imu_at(7)}));
  reader.add_loader(std::make_unique<MemoryLoader>(SensorId::of(SensorKind::gnss_pose),
                                                   std::vector{packet_for(SensorKind::gnss_pose, 7, 0)}));
  CHECK(reader.next_packet()->sensor.kind == SensorKind::gnss_pose);
  CHECK(reader.next_packet()->sensor.kind == SensorKind::imu);
  CHECK_FALSE(reader.next_packet());
}

TEST_CASE("memory loader rejects decreasing timestamps") {
  CHECK_THROWS_AS(MemoryLoader(SensorId::of(SensorKind::imu), {imu_at(5), imu_at(4)}), ValidationError);
}

TEST_CASE("merged stream equals the stable merge-sort oracle on random timelines") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> nstreams(1, 6), len(0, 40), step(0, 3);
    const int s = nstreams(rng);
    std::vector<std::vector<std::uint64_t>> streams(s);
    std::vector<SensorKind> kinds;
    std::vector<int> ranks;
    DatasetReader reader;
    for (int k = 0; k < s; ++k) {
      const SensorKind kind = kAllSensorKinds[std::uniform_int_distribution<std::size_t>(0, 6)(rng)];
      std::uint64_t t = 10;
      std::vector<SensorPacket> packets;
      const int n = len(rng);
      for (int i = 0; i < n; ++i) {
        t += static_cast<std::uint64_t>(step(rng));
        streams[k].push_back(t);
        packets.push_back(packet_for(kind, t, static_cast<std::size_t>(i)));
      }
      kinds.push_back(kind);
      ranks.push_back(static_cast<int>(kind));
      reader.add_loader(std::make_unique<MemoryLoader>(SensorId::of(kind), std::move(packets)));
    }
    const auto expected = oracle::stable_merge(streams, ranks);
    std::size_t i = 0;
    bool ok = true;
    while (auto p = reader.next_packet()) {
      if (i >= expected.size()) {
        ok = false;
        break;
      }
      const auto& e = expected[i++];
      ok = ok && p->timestamp().ns == e.timestamp && p->sensor.kind == kinds[e.stream] && tag_of(*p) == e.index;
    }
    CHECK(ok);
    CHECK(i == expected.size());
    CHECK(reader.total_records() == expected.size());
  }
}

TEST_CASE("open_dataset over a generated dataset") {
  GeneratedDataset ds;
  DatasetReader reader = open_dataset(ds.dir.path(), ds.config);
  CHECK(reader.loader_count() == 5);
  CHECK(reader.total_records() == ds.report.total());

  std::map<std::string, std::size_t> counts;
  Timestamp last;
  bool monotone = true;
  while (auto p = reader.next_packet()) {
    monotone = monotone && !(p->timestamp() < last);
    last = p->timestamp();
    ++counts[p->sensor.label];
    if (auto* frame = std::get_if<CameraFrame>(&p->data)) {
      REQUIRE(frame->image);
      CHECK(frame->image->width == 80);
    }
  }
  CHECK(monotone);
  CHECK(counts == ds.report.records);

  // Replaying yields the same sequence.
  DatasetReader again = open_dataset(ds.dir.path(), ds.config);
  DatasetReader third = open_dataset(ds.dir.path(), ds.config);
  CHECK(drain_timestamps(again) == drain_timestamps(third));
}

TEST_CASE("three-sensor dataset opens three loaders") {
  GeneratedDataset ds;
  fs::remove_all(ds.dir / "camera_ir");
  fs::remove_all(ds.dir / "camera_rgb_left");
  CHECK(open_dataset(ds.dir.path(), ds.config).loader_count() == 3);
}

TEST_CASE("empty root is a load error naming the missing components") {
  testing::TempDir dir("empty_root");
  PipelineConfig cfg;
  cfg.dataset_path = dir.path();
  try {
    open_dataset(dir.path(), cfg);
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("gnss/pose.csv") != std::string::npos);
    CHECK(msg.find("imu/imu.csv") != std::string::npos);
  }
  CHECK_THROWS_AS(open_dataset(dir / "missing", cfg), LoadError);
}

TEST_CASE("shuffled imu.csv reports the first inversion row") {
  GeneratedDataset ds;
  const fs::path imu = ds.dir / "imu/imu.csv";
  std::string text = testing::read_text(imu);
  std::vector<std::string> lines;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) lines.push_back(l);
  std::swap(lines[4], lines[5]);  // data rows 4 and 5 (file lines 5 and 6)
  std::string joined;
  for (const auto& l : lines) joined += l + "\n";
  testing::write_text(imu, joined);
  try {
    open_dataset(ds.dir.path(), ds.config);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("imu") != std::string::npos);
    CHECK(msg.find("row 6") != std::string::npos);
  }
}

TEST_CASE("missing calibration and unknown sensor directories") {
  GeneratedDataset ds;
  PipelineConfig cfg = ds.config;
  cfg.calibrations.erase(SensorKind::lidar_left);
  CHECK_THROWS_AS(open_dataset(ds.dir.path(), cfg), LoadError);
  fs::create_directories(ds.dir / "lidar_top");
  CHECK_THROWS_AS(open_dataset(ds.dir.path(), ds.config), ValidationError);
}

TEST_CASE("unreadable payload raises IoError naming the sensor and timestamp") {
  GeneratedDataset ds;
  fs::remove(ds.dir / "lidar_left/scans/000000.ply");
  DatasetReader reader = open_dataset(ds.dir.path(), ds.config);
  try {
    while (reader.next_packet()) {
    }
    FAIL("expected IoError");
  } catch (const IoError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("lidar_left") != std::string::npos);
    CHECK(msg.find("1100000000") != std::string::npos);
  }
}

TEST_CASE("detections are attached to their frames and validated") {
  GeneratedDataset ds;
  DatasetReader reader = open_dataset(ds.dir.path(), ds.config);
  std::size_t with_detections = 0;
  while (auto p = reader.next_packet()) {
    if (auto* f = std::get_if<CameraFrame>(&p->data); f && !f->detections.empty()) {
      ++with_detections;
      CHECK(f->sensor.kind == SensorKind::camera_rgb_left);
      CHECK(f->detections[0].class_id == 1);
    }
  }
  CHECK(with_detections > 0);

  testing::write_text(ds.dir / "camera_rgb_left/detections.csv",
                      "timestamp_ns,x_min,y_min,x_max,y_max,class_id,confidence\n123,1,1,5,5,0,0.5\n");
  CHECK_THROWS_AS(open_dataset(ds.dir.path(), ds.config), ValidationError);
  testing::write_text(ds.dir / "camera_rgb_left/detections.csv",
                      "timestamp_ns,x_min,y_min,x_max,y_max,class_id,confidence\n1000000000,5,1,1,5,0,0.5\n");
  CHECK_THROWS_AS(open_dataset(ds.dir.path(), ds.config), ValidationError);
}

TEST_CASE("bad CSV header and bad numbers") {
  GeneratedDataset ds;
  testing::write_text(ds.dir / "gnss/pose.csv", "time,lat\n1,2\n");
  CHECK_THROWS_AS(open_dataset(ds.dir.path(), ds.config), LoadError);
  testing::write_text(ds.dir / "gnss/pose.csv",
                      "timestamp_ns,latitude_deg,longitude_deg,altitude_m,azimuth_deg\n1,abc,16,200,\n");
  CHECK_THROWS_AS(open_dataset(ds.dir.path(), ds.config), ValidationError);
}

TEST_CASE("image resolution mismatch is a validation error at emission") {
  GeneratedDataset ds;
  write_png(ds.dir / "camera_ir/frames/000000.png", Image::filled(10, 10, 1, 8, 1));
  DatasetReader reader = open_dataset(ds.dir.path(), ds.config);
  CHECK_THROWS_AS(
      [&] {
        while (reader.next_packet()) {
        }
      }(),
      ValidationError);
}

TEST_CASE("PLY round trip keeps order and values") {
  testing::TempDir dir("ply");
  std::vector<LidarPoint> pts;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<float> u(-50.0f, 50.0f);
  for (int i = 0; i < 1000; ++i) pts.push_back({Vec3(u(rng), u(rng), u(rng)), static_cast<double>(u(rng))});
  write_ply(dir / "a.ply", pts);
  const auto back = read_ply(dir / "a.ply");
  REQUIRE(back.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK((back[i].position - pts[i].position).norm() == 0.0);
    CHECK(back[i].intensity == pts[i].intensity);
  }
  write_ply(dir / "b.ply", back);
  CHECK(testing::read_text(dir / "a.ply") == testing::read_text(dir / "b.ply"));
  testing::write_text(dir / "bad.ply", "ply\nformat ascii 1.0\nend_header\n");
  CHECK_THROWS_AS(read_ply(dir / "bad.ply"), IoError);
}

TEST_CASE("PNG round trip for gray and RGB at 8 and 16 bits") {
  testing::TempDir dir("png");
  for (int channels : {1, 3}) {
    for (int depth : {8, 16}) {
      Image img = Image::filled(7, 5, channels, depth, 0);
      for (std::size_t i = 0; i < img.samples.size(); ++i) {
        img.samples[i] = static_cast<std::uint16_t>((i * 37) % (depth == 8 ? 256 : 65536));
      }
      write_png(dir / "x.png", img);
      CHECK(read_png(dir / "x.png") == img);
    }
  }
  CHECK_THROWS_AS(read_png(dir / "nope.png"), IoError);
}
