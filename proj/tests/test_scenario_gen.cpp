#include <doctest.h>

#include <map>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "atlas/dataset_io.hpp"
#include "atlas/errors.hpp"
#include "atlas/pipeline.hpp"
#include "atlas/ply_io.hpp"
#include "atlas/scenario_gen.hpp"
#include "fixtures.hpp"
#include "support.hpp"

using namespace atlas;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = testing::read_text(e.path());
  }
  return out;
}

/// timestamp_ns -> remaining numeric columns, header skipped.
std::map<std::uint64_t, std::vector<double>> read_rows(const fs::path& p) {
  std::istringstream in(testing::read_text(p));
  std::string line;
  std::getline(in, line);
  std::map<std::uint64_t, std::vector<double>> out;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    auto& values = out[std::stoull(cell)];
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
  }
  return out;
}

ScenarioSpec noiseless(ScenarioSpec spec) {
  spec.noise = {0.0, 0.0, 0.0, 0.0, 0.0};
  return spec;
}

}  // namespace

TEST_CASE("ground truth pose examples") {
  ScenarioSpec spec;
  spec.duration = 100.0;
  CHECK(ground_truth_pose(spec, 37.0).is_approx(RigidTransform()));

  spec.trajectory.kind = TrajectoryKind::constant_velocity;
  spec.trajectory.velocity = Vec3(10, 0, 0);
  CHECK((ground_truth_pose(spec, 2.0).translation() - Vec3(20, 0, 0)).norm() < 1e-12);
  CHECK(std::abs(yaw_of(ground_truth_pose(spec, 2.0).rotation())) < 1e-12);

  spec.trajectory.kind = TrajectoryKind::circle;
  spec.trajectory.radius = 10.0;
  spec.trajectory.angular_rate = 0.1;
  // Antipode of the starting point is half a revolution away, at t = pi / omega.
  const RigidTransform half = ground_truth_pose(spec, kPi / 0.1);
  CHECK((half.translation() - Vec3(0, 20, 0)).norm() < 1e-9);
  CHECK(std::abs(std::abs(yaw_of(half.rotation())) - kPi) < 1e-9);
  CHECK_THROWS_AS(ground_truth_pose(spec, -0.1), ArgumentError);
  CHECK_THROWS_AS(ground_truth_pose(spec, 100.1), ArgumentError);
}

TEST_CASE("truth velocity and acceleration are derivatives of the pose") {
  for (auto kind : {TrajectoryKind::stationary, TrajectoryKind::constant_velocity, TrajectoryKind::circle}) {
    ScenarioSpec spec;
    spec.duration = 50.0;
    spec.trajectory.kind = kind;
    spec.trajectory.velocity = Vec3(3, -4, 0.5);
    spec.trajectory.radius = 25.0;
    spec.trajectory.angular_rate = 0.4;
    const double h = 1e-4;
    for (double t = 1.0; t < 49.0; t += 3.7) {
      const Vec3 p0 = ground_truth_pose(spec, t - h).translation(), p1 = ground_truth_pose(spec, t).translation(),
                 p2 = ground_truth_pose(spec, t + h).translation();
      CHECK(((p2 - p0) / (2 * h) - ground_truth_velocity(spec, t)).norm() < 1e-6);
      CHECK(((p2 - 2 * p1 + p0) / (h * h) - ground_truth_acceleration(spec, t)).norm() < 1e-3);
      const double dyaw = wrap_angle(yaw_of(ground_truth_pose(spec, t + h).rotation()) -
                                     yaw_of(ground_truth_pose(spec, t - h).rotation())) /
                          (2 * h);
      CHECK(std::abs(dyaw - ground_truth_angular_velocity(spec).z()) < 1e-6);
      if (kind == TrajectoryKind::circle) {
        // Heading is tangent to the motion.
        const Vec3 v = ground_truth_velocity(spec, t);
        CHECK(std::abs(wrap_angle(yaw_of(ground_truth_pose(spec, t).rotation()) - std::atan2(v.y(), v.x()))) < 1e-9);
      }
    }
  }
}

TEST_CASE("stationary scenario produces identical scans") {
  testing::TempDir dir;
  ScenarioSpec spec = noiseless(testing::small_scenario());
  spec.trajectory.kind = TrajectoryKind::stationary;
  generate_scenario(spec, dir / "data");
  const auto first = read_ply(dir / "data" / "lidar_left" / "scans" / "000000.ply");
  REQUIRE(first.size() > 100);
  for (int k = 1; k < 10; ++k) {
    const auto scan = read_ply(dir / "data" / "lidar_left" / "scans" / fmt::format("{:06d}.ply", k));
    REQUIRE(scan.size() == first.size());
    for (std::size_t i = 0; i < scan.size(); ++i) CHECK((scan[i].position - first[i].position).norm() < 1e-9);
  }
}

TEST_CASE("10 m/s toward a wall: raw scan start and end disagree by 1 m") {
  testing::TempDir dir;
  ScenarioSpec spec = noiseless(testing::room_scenario(Vec3(10, 0, 0), 1, 1000));
  spec.lidars[0].min_elevation_deg = spec.lidars[0].max_elevation_deg = 0.0;
  generate_scenario(spec, dir / "data");
  for (int k = 0; k < 5; ++k) {
    const auto scan = read_ply(dir / "data" / "lidar_left" / "scans" / fmt::format("{:06d}.ply", k));
    REQUIRE(scan.size() == 1000);
    // Column 0 and the last column both look straight ahead at the x = 20 wall.
    CHECK(scan.front().position.x() - scan.back().position.x() == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("fixed seed regenerates byte-identical datasets; seeds separate streams") {
  testing::TempDir dir;
  const ScenarioSpec spec = testing::small_scenario();
  generate_scenario(spec, dir / "a");
  generate_scenario(spec, dir / "b");
  CHECK(tree(dir / "a") == tree(dir / "b"));

  ScenarioSpec other = spec;
  other.seed = spec.seed + 1;
  generate_scenario(other, dir / "c");
  CHECK(testing::read_text(dir / "a" / "gnss" / "pose.csv") != testing::read_text(dir / "c" / "gnss" / "pose.csv"));

  // Adding a sensor leaves the other streams untouched.
  ScenarioSpec more = spec;
  CameraSimSpec right = spec.cameras[0];
  right.kind = SensorKind::camera_rgb_right;
  more.cameras.push_back(right);
  generate_scenario(more, dir / "d");
  CHECK(testing::read_text(dir / "a" / "gnss" / "pose.csv") == testing::read_text(dir / "d" / "gnss" / "pose.csv"));
  CHECK(testing::read_text(dir / "a" / "imu" / "imu.csv") == testing::read_text(dir / "d" / "imu" / "imu.csv"));
  CHECK(stream_seed(1, "gnss") != stream_seed(1, "imu"));
  CHECK(stream_seed(1, "gnss") != stream_seed(2, "gnss"));
}

TEST_CASE("generated streams are monotone and load cleanly") {
  testing::TempDir dir;
  ScenarioSpec spec = testing::small_scenario();
  spec.trajectory.kind = TrajectoryKind::circle;
  spec.trajectory.radius = 8.0;
  spec.trajectory.angular_rate = 0.5;
  spec.duration = 2.0;
  const GenerationReport gen = generate_scenario(spec, dir / "data");
  // Instantaneous sensors sample both ends of [0, duration]; sweeps must end inside it.
  CHECK(gen.records.at("gnss") == 21);
  CHECK(gen.records.at("imu") == 201);
  CHECK(gen.records.at("lidar_left") == 20);
  CHECK(gen.records.at("camera_rgb_left") == 21);
  const PipelineConfig cfg = load_config(dir / "data" / "pipeline.yaml");
  DatasetReader reader = open_dataset(cfg.dataset_path, cfg);
  std::map<std::string, std::uint64_t> last;
  std::uint64_t prev = 0;
  std::size_t n = 0;
  while (auto p = reader.next_packet()) {
    const std::uint64_t ts = p->timestamp().ns;
    CHECK(ts >= prev);
    if (last.count(p->sensor.label)) CHECK(ts > last[p->sensor.label]);
    last[p->sensor.label] = ts;
    prev = ts;
    ++n;
  }
  CHECK(n == gen.total());
}

TEST_CASE("scenario YAML: defaults, unknown keys, invalid values") {
  const ScenarioSpec s = parse_scenario(
      "seed: 9\nduration: 3\ntrajectory: {type: circle, radius: 5, angular_rate: 0.2}\n"
      "lidars:\n  lidar_left: {rings: 8}\ncameras:\n  camera_ir: {detections: false}\n"
      "scene:\n  boxes:\n    - {min: [1, 1, 0], max: [2, 2, 1], class_id: 4}\n");
  CHECK(s.seed == 9);
  CHECK(s.duration == 3.0);
  CHECK(s.trajectory.kind == TrajectoryKind::circle);
  CHECK(s.imu_rate == 100.0);
  REQUIRE(s.lidars.size() == 1);
  CHECK(s.lidars[0].rings == 8);
  CHECK(s.lidars[0].steps == 1000);
  REQUIRE(s.cameras.size() == 1);
  CHECK_FALSE(s.cameras[0].detections);
  CHECK(s.boxes.at(0).class_id == 4);

  auto err = [](const std::string& y) {
    try {
      parse_scenario(y);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(err("duraton: 3\n").find("duraton") != std::string::npos);
  CHECK(err("duration: -1\n").find("duration") != std::string::npos);
  CHECK(err("rates: {imu: 0}\n").find("imu") != std::string::npos);
  CHECK(err("trajectory: {type: spiral}\n").find("spiral") != std::string::npos);
  CHECK_FALSE(err("lidars:\n  gps_left: {}\n").empty());
  CHECK(err("sensors: {}\n").find("sensors") != std::string::npos);
  CHECK_THROWS_AS(load_scenario("/nonexistent/spec.yaml"), ConfigError);
}

TEST_CASE("noise-free closed loop: pipeline trajectory tracks truth") {
  testing::TempDir dir;
  ScenarioSpec spec = noiseless(testing::small_scenario());
  spec.duration = 10.0;
  spec.cameras.clear();
  spec.boxes.clear();
  generate_scenario(spec, dir / "data");
  PipelineConfig cfg = load_config(dir / "data" / "pipeline.yaml");
  cfg.output_path = dir / "out";
  cfg.log_level = "off";
  run(cfg);
  const auto truth = read_rows(dir / "data" / "truth.csv");
  const auto est = read_rows(dir / "out" / "trajectory.csv");
  std::size_t compared = 0;
  double worst_p = 0.0, worst_v = 0.0;
  for (const auto& [ns, e] : est) {
    const auto it = truth.find(ns);
    if (it == truth.end() || ns < spec.start_ns + 3'000'000'000ULL) continue;
    const auto& t = it->second;
    worst_p = std::max(worst_p, (Vec3(e[0], e[1], e[2]) - Vec3(t[0], t[1], t[2])).norm());
    worst_v = std::max(worst_v, (Vec3(e[7], e[8], e[9]) - Vec3(t[7], t[8], t[9])).norm());
    CHECK(std::abs(wrap_angle(yaw_of(UnitQuaternion(e[3], e[4], e[5], e[6])) -
                              yaw_of(UnitQuaternion(t[3], t[4], t[5], t[6])))) < 1e-6);
    ++compared;
  }
  MESSAGE("closed loop worst position error " << worst_p << " m, velocity " << worst_v << " m/s");
  CHECK(compared > 600);
  CHECK(worst_p < 1e-3);
  CHECK(worst_v < 1e-2);
}
