#include "atlas/scenario_gen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "atlas/errors.hpp"
#include "atlas/image_io.hpp"
#include "atlas/ply_io.hpp"
#include "yaml_util.hpp"

namespace atlas {
namespace {

namespace fs = std::filesystem;
using namespace yaml_util;

constexpr double kDeg = std::numbers::pi / 180.0;

/// Camera frame (z forward, x right, y down) to a forward-looking body frame (x forward, y left, z up).
UnitQuaternion forward_camera_rotation() {
  Eigen::Matrix3d r;
  r << 0, 0, 1,
      -1, 0, 0,
       0, -1, 0;
  return UnitQuaternion(r);
}

bool in_windows(const std::vector<std::pair<double, double>>& windows, double t) {
  return std::any_of(windows.begin(), windows.end(), [t](const auto& w) { return t >= w.first && t < w.second; });
}

/// Sample instants k * period_ns for k = 0.. while k * period <= duration.
std::vector<std::uint64_t> sample_grid(double rate, double duration) {
  const auto period = static_cast<std::uint64_t>(std::llround(1e9 / rate));
  const auto limit = static_cast<std::uint64_t>(std::llround(duration * 1e9));
  std::vector<std::uint64_t> out;
  for (std::uint64_t t = 0; t <= limit; t += period) out.push_back(t);
  return out;
}

std::optional<double> ray_box(const SceneBox& b, const Vec3& o, const Vec3& d) {
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d(a)) < 1e-15) {
      if (o(a) < b.min(a) || o(a) > b.max(a)) return std::nullopt;
      continue;
    }
    double ta = (b.min(a) - o(a)) / d(a);
    double tb = (b.max(a) - o(a)) / d(a);
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t0 > t1 || t1 <= 0.0) return std::nullopt;
  return t0 > 0.0 ? t0 : std::optional<double>{};
}

std::vector<std::pair<double, double>> parse_windows(const YAML::Node& root, const std::string& key) {
  std::vector<std::vector<double>> raw;
  read(root, key, "", raw);
  std::vector<std::pair<double, double>> out;
  for (const auto& w : raw) {
    if (w.size() != 2 || !(w[0] < w[1])) throw ConfigError(fmt::format("{} entries must be [from, to] with from < to", key));
    out.emplace_back(w[0], w[1]);
  }
  return out;
}

Vec3 parse_vec3(const YAML::Node& node, std::string_view key, const std::string& path, const Vec3& fallback) {
  std::vector<double> v;
  if (!read(node, key, path, v)) return fallback;
  if (v.size() != 3) throw ConfigError(fmt::format("{} needs 3 values{}", join(path, key), where(node)));
  return {v[0], v[1], v[2]};
}

std::string_view trajectory_name(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::stationary: return "stationary";
    case TrajectoryKind::constant_velocity: return "constant_velocity";
    case TrajectoryKind::circle: return "circle";
  }
  return "?";
}

class Gaussian {
 public:
  Gaussian(std::uint64_t seed, double sigma) : rng_(seed), sigma_(sigma) {}
  double operator()() { return sigma_ > 0.0 ? sigma_ * dist_(rng_) : 0.0; }
  Vec3 vec() { return {(*this)(), (*this)(), (*this)()}; }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> dist_{0.0, 1.0};
  double sigma_;
};

void open_csv(std::ofstream& out, const fs::path& path, std::string_view header) {
  out.open(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << header << '\n';
}

}  // namespace

void ScenarioSpec::validate() const {
  require_positive(duration, "duration");
  require_positive(gnss_rate, "rates.gnss");
  require_positive(imu_rate, "rates.imu");
  require_positive(lidar_rate, "rates.lidar");
  require_positive(camera_rate, "rates.camera");
  require_positive(gravity, "gravity");
  if (trajectory.kind == TrajectoryKind::circle) require_positive(trajectory.radius, "trajectory.radius");
  std::set<SensorKind> seen;
  for (const auto& l : lidars) {
    if (!is_lidar(l.kind)) throw ConfigError(fmt::format("{} is not a LiDAR", to_string(l.kind)));
    if (!seen.insert(l.kind).second) throw ConfigError(fmt::format("sensor {} listed twice", to_string(l.kind)));
    if (l.rings < 1 || l.steps < 1) throw ConfigError(fmt::format("lidars.{}: rings and steps must be >= 1", to_string(l.kind)));
    require_positive(l.max_range, fmt::format("lidars.{}.max_range", to_string(l.kind)));
  }
  for (const auto& c : cameras) {
    if (!is_camera(c.kind)) throw ConfigError(fmt::format("{} is not a camera", to_string(c.kind)));
    if (!seen.insert(c.kind).second) throw ConfigError(fmt::format("sensor {} listed twice", to_string(c.kind)));
    try {
      c.intrinsics.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(fmt::format("cameras.{}.intrinsics: {}", to_string(c.kind), e.what()));
    }
  }
  for (const auto& b : boxes) {
    if (!(b.min.array() < b.max.array()).all()) throw ConfigError("scene box min must be below max on every axis");
  }
  for (const auto& p : planes) {
    if (!(p.normal.norm() > 0.0)) throw ConfigError("scene plane normal must be non-zero");
  }
}

ScenarioSpec parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("scenario parse error at line {}, column {}: {}", e.mark.line + 1,
                                  e.mark.column + 1, e.msg));
  }
  ScenarioSpec spec;
  if (root.IsNull()) return spec;
  check_keys(root, "", {"seed", "duration", "start_ns", "gravity", "trajectory", "rates", "noise", "anchor",
                        "gnss_outages", "azimuth_outages", "lidars", "cameras", "scene"});
  read(root, "seed", "", spec.seed);
  read(root, "duration", "", spec.duration);
  read(root, "start_ns", "", spec.start_ns);
  read(root, "gravity", "", spec.gravity);

  if (const auto n = root["trajectory"]) {
    check_keys(n, "trajectory", {"type", "velocity", "radius", "angular_rate"});
    std::string type = "stationary";
    read(n, "type", "trajectory", type);
    if (type == "stationary") {
      spec.trajectory.kind = TrajectoryKind::stationary;
    } else if (type == "constant_velocity") {
      spec.trajectory.kind = TrajectoryKind::constant_velocity;
    } else if (type == "circle") {
      spec.trajectory.kind = TrajectoryKind::circle;
    } else {
      throw ConfigError(fmt::format("trajectory.type '{}' is not one of stationary, constant_velocity, circle{}", type,
                                    where(n["type"])));
    }
    spec.trajectory.velocity = parse_vec3(n, "velocity", "trajectory", Vec3::Zero());
    read(n, "radius", "trajectory", spec.trajectory.radius);
    read(n, "angular_rate", "trajectory", spec.trajectory.angular_rate);
  }
  if (const auto n = root["rates"]) {
    check_keys(n, "rates", {"gnss", "imu", "lidar", "camera"});
    read(n, "gnss", "rates", spec.gnss_rate);
    read(n, "imu", "rates", spec.imu_rate);
    read(n, "lidar", "rates", spec.lidar_rate);
    read(n, "camera", "rates", spec.camera_rate);
  }
  if (const auto n = root["noise"]) {
    check_keys(n, "noise",
               {"gnss_sigma", "gnss_azimuth_sigma_deg", "imu_accel_sigma", "imu_gyro_sigma", "lidar_range_sigma"});
    read(n, "gnss_sigma", "noise", spec.noise.gnss_sigma);
    read(n, "gnss_azimuth_sigma_deg", "noise", spec.noise.gnss_azimuth_sigma_deg);
    read(n, "imu_accel_sigma", "noise", spec.noise.imu_accel_sigma);
    read(n, "imu_gyro_sigma", "noise", spec.noise.imu_gyro_sigma);
    read(n, "lidar_range_sigma", "noise", spec.noise.lidar_range_sigma);
  }
  if (const auto n = root["anchor"]) {
    check_keys(n, "anchor", {"latitude_deg", "longitude_deg", "altitude_m"});
    read(n, "latitude_deg", "anchor", spec.anchor.latitude_deg);
    read(n, "longitude_deg", "anchor", spec.anchor.longitude_deg);
    read(n, "altitude_m", "anchor", spec.anchor.altitude_m);
  }
  spec.gnss_outages = parse_windows(root, "gnss_outages");
  spec.azimuth_outages = parse_windows(root, "azimuth_outages");

  if (const auto n = root["lidars"]) {
    require_map(n, "lidars");
    for (const auto& kv : n) {
      const auto name = kv.first.as<std::string>();
      const auto kind = sensor_kind_from_string(name);
      if (!kind || !is_lidar(*kind)) throw ConfigError(fmt::format("unknown key 'lidars.{}'{}", name, where(kv.first)));
      const std::string path = "lidars." + name;
      check_keys(kv.second, path,
                 {"extrinsic", "rings", "steps", "min_elevation_deg", "max_elevation_deg", "max_range"});
      LidarSimSpec l;
      l.kind = *kind;
      if (kv.second["extrinsic"]) l.extrinsic = parse_transform(kv.second["extrinsic"], path + ".extrinsic");
      read(kv.second, "rings", path, l.rings);
      read(kv.second, "steps", path, l.steps);
      read(kv.second, "min_elevation_deg", path, l.min_elevation_deg);
      read(kv.second, "max_elevation_deg", path, l.max_elevation_deg);
      read(kv.second, "max_range", path, l.max_range);
      spec.lidars.push_back(l);
    }
  }
  if (const auto n = root["cameras"]) {
    require_map(n, "cameras");
    for (const auto& kv : n) {
      const auto name = kv.first.as<std::string>();
      const auto kind = sensor_kind_from_string(name);
      if (!kind || !is_camera(*kind)) throw ConfigError(fmt::format("unknown key 'cameras.{}'{}", name, where(kv.first)));
      const std::string path = "cameras." + name;
      check_keys(kv.second, path, {"extrinsic", "intrinsics", "detections"});
      CameraSimSpec c;
      c.kind = *kind;
      c.detections = is_rgb_camera(*kind);
      c.extrinsic = RigidTransform::from_rotation(forward_camera_rotation());
      read(kv.second, "detections", path, c.detections);
      YAML::Node calib = YAML::Clone(kv.second);
      calib.remove("detections");
      const SensorCalibration cal = parse_calibration(calib, path);
      if (kv.second["extrinsic"]) c.extrinsic = cal.extrinsic;
      if (cal.intrinsics) c.intrinsics = *cal.intrinsics;
      spec.cameras.push_back(c);
    }
  }
  if (const auto n = root["scene"]) {
    check_keys(n, "scene", {"boxes", "planes"});
    if (const auto boxes = n["boxes"]) {
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        const std::string path = fmt::format("scene.boxes[{}]", i);
        check_keys(boxes[i], path, {"min", "max", "class_id"});
        SceneBox b;
        b.min = parse_vec3(boxes[i], "min", path, b.min);
        b.max = parse_vec3(boxes[i], "max", path, b.max);
        read(boxes[i], "class_id", path, b.class_id);
        spec.boxes.push_back(b);
      }
    }
    if (const auto planes = n["planes"]) {
      for (std::size_t i = 0; i < planes.size(); ++i) {
        const std::string path = fmt::format("scene.planes[{}]", i);
        check_keys(planes[i], path, {"point", "normal"});
        ScenePlane p;
        p.point = parse_vec3(planes[i], "point", path, p.point);
        p.normal = parse_vec3(planes[i], "normal", path, p.normal);
        spec.planes.push_back(p);
      }
    }
  }
  std::sort(spec.lidars.begin(), spec.lidars.end(), [](const auto& a, const auto& b) { return a.kind < b.kind; });
  std::sort(spec.cameras.begin(), spec.cameras.end(), [](const auto& a, const auto& b) { return a.kind < b.kind; });
  spec.validate();
  return spec;
}

ScenarioSpec load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read scenario file '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

RigidTransform ground_truth_pose(const ScenarioSpec& spec, double t) {
  if (t < -1e-9 || t > spec.duration + 1e-9) {
    throw ArgumentError(fmt::format("ground_truth_pose: t = {} outside [0, {}]", t, spec.duration));
  }
  const auto& tr = spec.trajectory;
  switch (tr.kind) {
    case TrajectoryKind::stationary:
      return RigidTransform::identity();
    case TrajectoryKind::constant_velocity: {
      const double yaw = std::hypot(tr.velocity.x(), tr.velocity.y()) > 0.0 ? std::atan2(tr.velocity.y(), tr.velocity.x())
                                                                             : 0.0;
      return {from_rpy(0.0, 0.0, yaw), tr.velocity * t};
    }
    case TrajectoryKind::circle: {
      const double a = tr.angular_rate * t;
      return {from_rpy(0.0, 0.0, a), Vec3(tr.radius * std::sin(a), tr.radius * (1.0 - std::cos(a)), 0.0)};
    }
  }
  return RigidTransform::identity();
}

Vec3 ground_truth_velocity(const ScenarioSpec& spec, double t) {
  const auto& tr = spec.trajectory;
  switch (tr.kind) {
    case TrajectoryKind::stationary: return Vec3::Zero();
    case TrajectoryKind::constant_velocity: return tr.velocity;
    case TrajectoryKind::circle: {
      const double a = tr.angular_rate * t;
      const double s = tr.radius * tr.angular_rate;
      return {s * std::cos(a), s * std::sin(a), 0.0};
    }
  }
  return Vec3::Zero();
}

Vec3 ground_truth_acceleration(const ScenarioSpec& spec, double t) {
  const auto& tr = spec.trajectory;
  if (tr.kind != TrajectoryKind::circle) return Vec3::Zero();
  const double a = tr.angular_rate * t;
  const double s = tr.radius * tr.angular_rate * tr.angular_rate;
  return {-s * std::sin(a), s * std::cos(a), 0.0};
}

Vec3 ground_truth_angular_velocity(const ScenarioSpec& spec) {
  if (spec.trajectory.kind != TrajectoryKind::circle) return Vec3::Zero();
  return {0.0, 0.0, spec.trajectory.angular_rate};
}

std::optional<double> cast_ray(const ScenarioSpec& spec, const Vec3& origin, const Vec3& direction, double max_range) {
  std::optional<double> best;
  auto consider = [&](double t) {
    if (t > 1e-6 && t <= max_range && (!best || t < *best)) best = t;
  };
  for (const auto& b : spec.boxes) {
    if (const auto t = ray_box(b, origin, direction)) consider(*t);
  }
  for (const auto& p : spec.planes) {
    const double dn = direction.dot(p.normal);
    if (std::abs(dn) < 1e-12) continue;
    consider((p.point - origin).dot(p.normal) / dn);
  }
  return best;
}

std::vector<TimedPoint> simulate_sweep(const ScenarioSpec& spec, const LidarSimSpec& lidar, double t_start,
                                       double t_end, std::mt19937_64* rng) {
  std::vector<TimedPoint> out;
  std::normal_distribution<double> noise(0.0, 1.0);
  const double span = t_end - t_start;
  for (int j = 0; j < lidar.steps; ++j) {
    const double t = t_start + span * static_cast<double>(j) / lidar.steps;
    const RigidTransform sensor_to_local = ground_truth_pose(spec, t) * lidar.extrinsic;
    const double az = 2.0 * std::numbers::pi * static_cast<double>(j) / lidar.steps;
    for (int i = 0; i < lidar.rings; ++i) {
      const double el =
          lidar.rings == 1
              ? 0.0
              : (lidar.min_elevation_deg + (lidar.max_elevation_deg - lidar.min_elevation_deg) * i / (lidar.rings - 1)) *
                    kDeg;
      const Vec3 d(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
      const auto range = cast_ray(spec, sensor_to_local.translation(), sensor_to_local.rotation() * d, lidar.max_range);
      if (!range) continue;
      double r = *range;
      if (rng && spec.noise.lidar_range_sigma > 0.0) r += spec.noise.lidar_range_sigma * noise(*rng);
      out.push_back({{r * d, 1.0 / (1.0 + 0.01 * r)}, t});
    }
  }
  return out;
}

std::optional<Detection2D> project_box(const SceneBox& box, const RigidTransform& camera_pose,
                                       const CameraIntrinsics& intr) {
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
  double x1 = -x0, y1 = -x0;
  for (int c = 0; c < 8; ++c) {
    const Vec3 corner((c & 1) ? box.max.x() : box.min.x(), (c & 2) ? box.max.y() : box.min.y(),
                      (c & 4) ? box.max.z() : box.min.z());
    const auto px = project_unbounded(intr, camera_pose.apply(corner));
    if (!px) return std::nullopt;
    x0 = std::min(x0, px->u);
    y0 = std::min(y0, px->v);
    x1 = std::max(x1, px->u);
    y1 = std::max(y1, px->v);
  }
  x0 = std::max(x0, 0.0);
  y0 = std::max(y0, 0.0);
  x1 = std::min(x1, static_cast<double>(intr.width));
  y1 = std::min(y1, static_cast<double>(intr.height));
  if (x0 >= x1 || y0 >= y1) return std::nullopt;
  return Detection2D{x0, y0, x1, y1, box.class_id, 0.9};
}

PipelineConfig pipeline_config_for(const ScenarioSpec& spec, const fs::path& dataset_path) {
  PipelineConfig cfg;
  cfg.dataset_path = dataset_path;
  cfg.positioning.gravity = spec.gravity;
  cfg.positioning.gnss_sigma = std::max(spec.noise.gnss_sigma, 1e-3);
  auto period_ns = [](double rate) { return static_cast<std::uint64_t>(std::llround(1e9 / rate)); };
  cfg.failcheck.expected_period_ns[SensorKind::gnss_pose] = period_ns(spec.gnss_rate);
  cfg.failcheck.expected_period_ns[SensorKind::imu] = period_ns(spec.imu_rate);
  for (const auto& l : spec.lidars) {
    cfg.failcheck.expected_period_ns[l.kind] = period_ns(spec.lidar_rate);
    cfg.calibrations[l.kind].extrinsic = l.extrinsic;
  }
  std::optional<SensorKind> source;
  bool has_ir = false;
  for (const auto& c : spec.cameras) {
    cfg.failcheck.expected_period_ns[c.kind] = period_ns(spec.camera_rate);
    cfg.calibrations[c.kind].extrinsic = c.extrinsic;
    cfg.calibrations[c.kind].intrinsics = c.intrinsics;
    if (c.detections && is_rgb_camera(c.kind) && !source) source = c.kind;
    has_ir = has_ir || c.kind == SensorKind::camera_ir;
  }
  if (source) cfg.transfer.source_camera = *source;
  if (has_ir) cfg.transfer.target_camera = SensorKind::camera_ir;
  return cfg;
}

std::size_t GenerationReport::total() const {
  std::size_t n = 0;
  for (const auto& [_, c] : records) n += c;
  return n;
}

std::uint64_t stream_seed(std::uint64_t master, std::string_view label) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::uint64_t z = master ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

GenerationReport generate_scenario(const ScenarioSpec& spec, const fs::path& out_root) {
  spec.validate();
  std::error_code ec;
  fs::create_directories(out_root, ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", out_root.string(), ec.message()));

  GenerationReport report;
  const std::uint64_t t0 = spec.start_ns;
  const Vec3 gravity(0.0, 0.0, spec.gravity);

  // Ground truth at the IMU rate.
  {
    std::ofstream truth;
    open_csv(truth, out_root / "truth.csv", kTruthHeader);
    for (const auto tn : sample_grid(spec.imu_rate, spec.duration)) {
      const double t = tn * 1e-9;
      const RigidTransform pose = ground_truth_pose(spec, t);
      const Vec3 v = ground_truth_velocity(spec, t);
      const UnitQuaternion q = canonical(pose.rotation());
      const Vec3& p = pose.translation();
      truth << fmt::format("{},{:.9f},{:.9f},{:.9f},{:.12f},{:.12f},{:.12f},{:.12f},{:.9f},{:.9f},{:.9f}\n", t0 + tn,
                           p.x(), p.y(), p.z(), q.w(), q.x(), q.y(), q.z(), v.x(), v.y(), v.z());
    }
    std::ofstream objects;
    open_csv(objects, out_root / "truth_objects.csv", "index,class_id,cx,cy,cz,min_x,min_y,min_z,max_x,max_y,max_z");
    for (std::size_t i = 0; i < spec.boxes.size(); ++i) {
      const auto& b = spec.boxes[i];
      const Vec3 c = b.centroid();
      objects << fmt::format("{},{},{:.9f},{:.9f},{:.9f},{:.9f},{:.9f},{:.9f},{:.9f},{:.9f},{:.9f}\n", i, b.class_id,
                             c.x(), c.y(), c.z(), b.min.x(), b.min.y(), b.min.z(), b.max.x(), b.max.y(), b.max.z());
    }
    std::ofstream anchor;
    open_csv(anchor, out_root / "truth_anchor.csv", "latitude_deg,longitude_deg,altitude_m");
    anchor << fmt::format("{:.12f},{:.12f},{:.6f}\n", spec.anchor.latitude_deg, spec.anchor.longitude_deg,
                          spec.anchor.altitude_m);
  }

  // GNSS.
  {
    fs::create_directories(out_root / "gnss");
    std::ofstream out;
    open_csv(out, out_root / "gnss" / "pose.csv", "timestamp_ns,latitude_deg,longitude_deg,altitude_m,azimuth_deg");
    Gaussian pos_noise(stream_seed(spec.seed, "gnss"), spec.noise.gnss_sigma);
    Gaussian az_noise(stream_seed(spec.seed, "gnss_azimuth"), spec.noise.gnss_azimuth_sigma_deg);
    std::size_t n = 0;
    for (const auto tn : sample_grid(spec.gnss_rate, spec.duration)) {
      const double t = tn * 1e-9;
      const Vec3 noise = pos_noise.vec();
      const double az_err = az_noise();
      if (in_windows(spec.gnss_outages, t)) continue;
      const RigidTransform pose = ground_truth_pose(spec, t);
      const GeodeticPoint g = enu_to_geodetic(spec.anchor, pose.translation() + noise);
      std::string az;
      if (!in_windows(spec.azimuth_outages, t)) {
        double deg = yaw_to_azimuth(yaw_of(pose.rotation())) / kDeg + az_err;
        deg = std::fmod(deg, 360.0);
        if (deg < 0.0) deg += 360.0;
        if (deg >= 360.0) deg = 0.0;
        az = fmt::format("{:.6f}", deg);
      }
      out << fmt::format("{},{:.12f},{:.12f},{:.6f},{}\n", t0 + tn, g.latitude_deg, g.longitude_deg, g.altitude_m, az);
      ++n;
    }
    report.records["gnss"] = n;
  }

  // IMU.
  {
    fs::create_directories(out_root / "imu");
    std::ofstream out;
    open_csv(out, out_root / "imu" / "imu.csv", "timestamp_ns,ax,ay,az,gx,gy,gz,qw,qx,qy,qz");
    Gaussian acc_noise(stream_seed(spec.seed, "imu_accel"), spec.noise.imu_accel_sigma);
    Gaussian gyro_noise(stream_seed(spec.seed, "imu_gyro"), spec.noise.imu_gyro_sigma);
    std::size_t n = 0;
    for (const auto tn : sample_grid(spec.imu_rate, spec.duration)) {
      const double t = tn * 1e-9;
      const RigidTransform pose = ground_truth_pose(spec, t);
      const Vec3 a = pose.rotation().conjugate() * (ground_truth_acceleration(spec, t) + gravity) + acc_noise.vec();
      const Vec3 w = ground_truth_angular_velocity(spec) + gyro_noise.vec();
      const UnitQuaternion q = canonical(pose.rotation());
      out << fmt::format("{},{:.9f},{:.9f},{:.9f},{:.9f},{:.9f},{:.9f},{:.12f},{:.12f},{:.12f},{:.12f}\n", t0 + tn,
                         a.x(), a.y(), a.z(), w.x(), w.y(), w.z(), q.w(), q.x(), q.y(), q.z());
      ++n;
    }
    report.records["imu"] = n;
  }

  // LiDAR: one sweep per period, ending no later than the duration.
  for (const auto& lidar : spec.lidars) {
    const std::string name(to_string(lidar.kind));
    const fs::path dir = out_root / name;
    fs::create_directories(dir / "scans");
    std::ofstream index;
    open_csv(index, dir / "timestamps.csv", "timestamp_start_ns,timestamp_end_ns,filename");
    std::mt19937_64 rng(stream_seed(spec.seed, name));
    const auto period = static_cast<std::uint64_t>(std::llround(1e9 / spec.lidar_rate));
    const auto limit = static_cast<std::uint64_t>(std::llround(spec.duration * 1e9));
    std::size_t n = 0;
    for (std::uint64_t start = 0; start + period <= limit; start += period, ++n) {
      const auto sweep = simulate_sweep(spec, lidar, start * 1e-9, (start + period) * 1e-9, &rng);
      std::vector<LidarPoint> points;
      points.reserve(sweep.size());
      for (const auto& p : sweep) points.push_back(p.point);
      const std::string file = fmt::format("{:06d}.ply", n);
      write_ply(dir / "scans" / file, points);
      index << fmt::format("{},{},{}\n", t0 + start, t0 + start + period, file);
    }
    report.records[name] = n;
  }

  // Cameras: flat placeholder frames, detections from the true box projections.
  for (const auto& cam : spec.cameras) {
    const std::string name(to_string(cam.kind));
    const fs::path dir = out_root / name;
    fs::create_directories(dir / "frames");
    std::ofstream index, dets;
    open_csv(index, dir / "timestamps.csv", "timestamp_ns,filename");
    if (cam.detections) open_csv(dets, dir / "detections.csv", "timestamp_ns,x_min,y_min,x_max,y_max,class_id,confidence");
    const bool ir = cam.kind == SensorKind::camera_ir;
    const Image placeholder = Image::filled(cam.intrinsics.width, cam.intrinsics.height, ir ? 1 : 3, 8, ir ? 100 : 128);
    std::optional<fs::path> first_frame;
    std::size_t n = 0;
    for (const auto tn : sample_grid(spec.camera_rate, spec.duration)) {
      const std::string file = fmt::format("{:06d}.png", n);
      const fs::path path = dir / "frames" / file;
      if (first_frame) {
        fs::copy_file(*first_frame, path, fs::copy_options::overwrite_existing, ec);
        if (ec) throw IoError(fmt::format("cannot write '{}': {}", path.string(), ec.message()));
      } else {
        write_png(path, placeholder);
        first_frame = path;
      }
      index << fmt::format("{},{}\n", t0 + tn, file);
      if (cam.detections) {
        const RigidTransform camera_pose = (ground_truth_pose(spec, tn * 1e-9) * cam.extrinsic).inverse();
        for (const auto& box : spec.boxes) {
          if (const auto d = project_box(box, camera_pose, cam.intrinsics)) {
            dets << fmt::format("{},{:.4f},{:.4f},{:.4f},{:.4f},{},{:.2f}\n", t0 + tn, d->x_min, d->y_min, d->x_max,
                                d->y_max, d->class_id, d->confidence);
          }
        }
      }
      ++n;
    }
    report.records[name] = n;
  }

  PipelineConfig cfg = pipeline_config_for(spec, ".");
  cfg.output_path = "out";
  std::ofstream yaml(out_root / "pipeline.yaml", std::ios::binary | std::ios::trunc);
  if (!yaml) throw IoError(fmt::format("cannot write '{}'", (out_root / "pipeline.yaml").string()));
  yaml << fmt::format("# generated scenario: {} trajectory, {} s, seed {}\n", trajectory_name(spec.trajectory.kind),
                      spec.duration, spec.seed)
       << to_yaml(cfg) << '\n';
  return report;
}

}  // namespace atlas
