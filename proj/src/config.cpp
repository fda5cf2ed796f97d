#include "atlas/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>
#include <string_view>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "atlas/errors.hpp"
#include "yaml_util.hpp"

namespace atlas {
namespace {

using namespace yaml_util;


std::string kind_key(SensorKind kind) {
  switch (kind) {
    case SensorKind::gnss_pose: return "gnss";
    case SensorKind::imu: return "imu";
    case SensorKind::lidar_left:
    case SensorKind::lidar_right: return "lidar";
    default: return "camera";
  }
}

}  // namespace

void FailCheckConfig::validate() const {
  for (const auto& [kind, period] : expected_period_ns) {
    if (period == 0) throw ConfigError(fmt::format("failcheck.expected_period_ms for {} must be positive", to_string(kind)));
  }
  require_positive(gap_factor, "failcheck.gap_factor");
  require_positive(imu_accel_saturation, "failcheck.imu_accel_saturation");
  if (lidar_min_points == 0) throw ConfigError("failcheck.lidar_min_points must be positive");
  require_positive(decay_half_life, "failcheck.decay_half_life");
}

void PositioningConfig::validate() const {
  require_positive(gravity, "positioning.gravity");
  require_positive(gnss_sigma, "positioning.gnss_sigma");
  require_positive(accel_sigma, "positioning.accel_sigma");
  require_positive(initial_velocity_sigma, "positioning.initial_velocity_sigma");
  if (!(rollpitch_blend_alpha > 0.0 && rollpitch_blend_alpha < 1.0)) {
    throw ConfigError(fmt::format("positioning.rollpitch_blend_alpha must be in (0, 1), got {}", rollpitch_blend_alpha));
  }
  require_positive(heading_full_trust_speed, "positioning.heading_full_trust_speed");
  require_positive(gnss_heading_sigma, "positioning.gnss_heading_sigma");
  require_positive(pose_history_length, "positioning.pose_history_length");
}

void AggregationConfig::validate() const {
  if (batch_count < 1) throw ConfigError(fmt::format("aggregation.batch_count must be >= 1, got {}", batch_count));
  require_positive(window, "aggregation.window");
  require_positive(voxel_leaf, "aggregation.voxel_leaf");
  if (!(snapshot_every >= 0.0)) throw ConfigError("aggregation.snapshot_every must be >= 0");
}

void FusionConfig::validate() const {
  if (!(depth_margin > 0.0 && depth_margin < 1.0)) {
    throw ConfigError(fmt::format("fusion.depth_margin must be in (0, 1), got {}", depth_margin));
  }
  require_positive(gate, "fusion.gate");
  require_positive(ttl, "fusion.ttl");
  if (!(smoothing > 0.0 && smoothing <= 1.0)) throw ConfigError("fusion.smoothing must be in (0, 1]");
  if (history_length < 2) throw ConfigError("fusion.history_length must be >= 2");
}

void TransferConfig::validate() const {
  if (!is_camera(source_camera)) throw ConfigError("transfer.source_camera must name a camera");
  if (!is_camera(target_camera)) throw ConfigError("transfer.target_camera must name a camera");
  require_positive(max_time_offset, "transfer.max_time_offset");
}

void StageFlags::disable(const std::string& stage) {
  if (stage == "failcheck") failcheck = false;
  else if (stage == "positioning") positioning = false;
  else if (stage == "aggregation") aggregation = false;
  else if (stage == "detection") detection = false;
  else if (stage == "transfer") transfer = false;
  else if (stage == "depth") depth = false;
  else
    throw ConfigError(fmt::format(
        "unknown stage '{}' (expected failcheck, positioning, aggregation, detection, transfer, depth)", stage));
}

void PipelineConfig::validate() const {
  if (dataset_path.empty()) throw ConfigError("missing required field dataset.path");
  if (output_path.empty()) throw ConfigError("output.path must not be empty");
  positioning.validate();
  aggregation.validate();
  failcheck.validate();
  fusion.validate();
  transfer.validate();
  for (const auto& [kind, cal] : calibrations) {
    const std::string path = fmt::format("sensors.{}", to_string(kind));
    if (is_camera(kind)) {
      if (!cal.intrinsics) throw ConfigError(fmt::format("missing required field {}.intrinsics", path));
      try {
        cal.intrinsics->validate();
      } catch (const ArgumentError& e) {
        throw ConfigError(fmt::format("{}.intrinsics: {}", path, e.what()));
      }
    } else if (cal.intrinsics) {
      throw ConfigError(fmt::format("{}.intrinsics given for a non-camera sensor", path));
    }
    for (double d : cal.distortion) {
      if (d != 0.0) throw ConfigError(fmt::format("{}.distortion must be zero (no lens distortion model)", path));
    }
  }
  static const std::vector<std::string> levels{"trace", "debug", "info", "warn", "error", "off"};
  if (std::find(levels.begin(), levels.end(), log_level) == levels.end()) {
    throw ConfigError(fmt::format("logging.level '{}' is not one of trace, debug, info, warn, error, off", log_level));
  }
}

SensorCalibration PipelineConfig::calibration(SensorKind kind) const {
  if (auto it = calibrations.find(kind); it != calibrations.end()) return it->second;
  if (kind == SensorKind::imu || kind == SensorKind::gnss_pose) return {};
  throw LookupError(fmt::format("no calibration for sensor {}", to_string(kind)));
}

PipelineConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("YAML parse error at line {}, column {}: {}", e.mark.line + 1, e.mark.column + 1, e.msg));
  }
  if (root.IsNull()) throw ConfigError("config is empty; missing required field dataset.path");
  check_keys(root, "", {"dataset", "output", "logging", "until_ns", "stages", "sensors", "positioning", "aggregation",
                        "failcheck", "fusion", "transfer"});

  PipelineConfig cfg;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };

  if (const auto n = root["dataset"]) {
    check_keys(n, "dataset", {"path"});
    std::string p;
    if (read(n, "path", "dataset", p)) cfg.dataset_path = resolve(p);
  }
  if (cfg.dataset_path.empty()) throw ConfigError("missing required field dataset.path");

  if (const auto n = root["output"]) {
    check_keys(n, "output", {"path"});
    std::string p;
    if (read(n, "path", "output", p)) cfg.output_path = resolve(p);
  }
  if (const auto n = root["logging"]) {
    check_keys(n, "logging", {"level"});
    read(n, "level", "logging", cfg.log_level);
  }
  std::uint64_t until = 0;
  if (read(root, "until_ns", "", until)) cfg.until = Timestamp{until};

  if (const auto n = root["stages"]) {
    check_keys(n, "stages", {"failcheck", "positioning", "aggregation", "detection", "transfer", "depth"});
    read(n, "failcheck", "stages", cfg.stages.failcheck);
    read(n, "positioning", "stages", cfg.stages.positioning);
    read(n, "aggregation", "stages", cfg.stages.aggregation);
    read(n, "detection", "stages", cfg.stages.detection);
    read(n, "transfer", "stages", cfg.stages.transfer);
    read(n, "depth", "stages", cfg.stages.depth);
  }

  if (const auto n = root["sensors"]) {
    require_map(n, "sensors");
    for (const auto& kv : n) {
      const auto name = kv.first.as<std::string>();
      const auto kind = sensor_kind_from_string(name);
      if (!kind) throw ConfigError(fmt::format("unknown key 'sensors.{}'{}", name, where(kv.first)));
      cfg.calibrations[*kind] = parse_calibration(kv.second, "sensors." + name);
    }
  }

  if (const auto n = root["positioning"]) {
    auto& p = cfg.positioning;
    check_keys(n, "positioning", {"gravity", "gnss_sigma", "accel_sigma", "initial_velocity_sigma",
                                  "rollpitch_blend_alpha", "heading_full_trust_speed", "gnss_heading_sigma",
                                  "pose_history_length"});
    read(n, "gravity", "positioning", p.gravity);
    read(n, "gnss_sigma", "positioning", p.gnss_sigma);
    read(n, "accel_sigma", "positioning", p.accel_sigma);
    read(n, "initial_velocity_sigma", "positioning", p.initial_velocity_sigma);
    read(n, "rollpitch_blend_alpha", "positioning", p.rollpitch_blend_alpha);
    read(n, "heading_full_trust_speed", "positioning", p.heading_full_trust_speed);
    read(n, "gnss_heading_sigma", "positioning", p.gnss_heading_sigma);
    read(n, "pose_history_length", "positioning", p.pose_history_length);
  }
  if (const auto n = root["aggregation"]) {
    auto& a = cfg.aggregation;
    check_keys(n, "aggregation", {"batch_count", "window", "voxel_leaf", "snapshot_every"});
    read(n, "batch_count", "aggregation", a.batch_count);
    read(n, "window", "aggregation", a.window);
    read(n, "voxel_leaf", "aggregation", a.voxel_leaf);
    read(n, "snapshot_every", "aggregation", a.snapshot_every);
  }
  if (const auto n = root["failcheck"]) {
    auto& f = cfg.failcheck;
    check_keys(n, "failcheck", {"expected_period_ms", "gap_factor", "imu_accel_saturation", "lidar_min_points",
                                "decay_half_life"});
    if (const auto periods = n["expected_period_ms"]) {
      check_keys(periods, "failcheck.expected_period_ms", {"gnss", "imu", "lidar", "camera"});
      for (const auto& kv : periods) {
        const auto key = kv.first.as<std::string>();
        double ms = 0.0;
        read(periods, key, "failcheck.expected_period_ms", ms);
        require_positive(ms, "failcheck.expected_period_ms." + key);
        for (auto kind : kAllSensorKinds) {
          if (kind_key(kind) == key) f.expected_period_ns[kind] = static_cast<std::uint64_t>(std::llround(ms * 1e6));
        }
      }
    }
    read(n, "gap_factor", "failcheck", f.gap_factor);
    read(n, "imu_accel_saturation", "failcheck", f.imu_accel_saturation);
    read(n, "lidar_min_points", "failcheck", f.lidar_min_points);
    read(n, "decay_half_life", "failcheck", f.decay_half_life);
  }
  if (const auto n = root["fusion"]) {
    auto& f = cfg.fusion;
    check_keys(n, "fusion", {"depth_margin", "gate", "ttl", "smoothing", "history_length"});
    read(n, "depth_margin", "fusion", f.depth_margin);
    read(n, "gate", "fusion", f.gate);
    read(n, "ttl", "fusion", f.ttl);
    read(n, "smoothing", "fusion", f.smoothing);
    read(n, "history_length", "fusion", f.history_length);
  }
  if (const auto n = root["transfer"]) {
    auto& t = cfg.transfer;
    check_keys(n, "transfer", {"source_camera", "target_camera", "max_time_offset"});
    for (auto [key, field] : {std::pair{"source_camera", &t.source_camera}, {"target_camera", &t.target_camera}}) {
      std::string name;
      if (read(n, key, "transfer", name)) {
        auto kind = sensor_kind_from_string(name);
        if (!kind) throw ConfigError(fmt::format("transfer.{}: unknown sensor '{}'", key, name));
        *field = *kind;
      }
    }
    read(n, "max_time_offset", "transfer", t.max_time_offset);
  }

  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string to_yaml(const PipelineConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(15);
  out << YAML::BeginMap;
  out << YAML::Key << "dataset" << YAML::Value << YAML::BeginMap << YAML::Key << "path" << YAML::Value
      << cfg.dataset_path.string() << YAML::EndMap;
  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap << YAML::Key << "path" << YAML::Value
      << cfg.output_path.string() << YAML::EndMap;
  out << YAML::Key << "logging" << YAML::Value << YAML::BeginMap << YAML::Key << "level" << YAML::Value
      << cfg.log_level << YAML::EndMap;
  if (cfg.until) out << YAML::Key << "until_ns" << YAML::Value << cfg.until->ns;

  const auto& s = cfg.stages;
  out << YAML::Key << "stages" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "failcheck" << YAML::Value << s.failcheck;
  out << YAML::Key << "positioning" << YAML::Value << s.positioning;
  out << YAML::Key << "aggregation" << YAML::Value << s.aggregation;
  out << YAML::Key << "detection" << YAML::Value << s.detection;
  out << YAML::Key << "transfer" << YAML::Value << s.transfer;
  out << YAML::Key << "depth" << YAML::Value << s.depth;
  out << YAML::EndMap;

  out << YAML::Key << "sensors" << YAML::Value << YAML::BeginMap;
  for (const auto& [kind, cal] : cfg.calibrations) {
    out << YAML::Key << std::string(to_string(kind)) << YAML::Value << YAML::BeginMap;
    const auto& q = cal.extrinsic.rotation();
    const auto& t = cal.extrinsic.translation();
    out << YAML::Key << "extrinsic" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "translation" << YAML::Value << YAML::Flow << std::vector<double>{t.x(), t.y(), t.z()};
    out << YAML::Key << "rotation" << YAML::Value << YAML::Flow << std::vector<double>{q.w(), q.x(), q.y(), q.z()};
    out << YAML::EndMap;
    if (cal.intrinsics) {
      const auto& in = *cal.intrinsics;
      out << YAML::Key << "intrinsics" << YAML::Value << YAML::Flow << YAML::BeginMap;
      out << YAML::Key << "fx" << YAML::Value << in.fx << YAML::Key << "fy" << YAML::Value << in.fy;
      out << YAML::Key << "cx" << YAML::Value << in.cx << YAML::Key << "cy" << YAML::Value << in.cy;
      out << YAML::Key << "width" << YAML::Value << in.width << YAML::Key << "height" << YAML::Value << in.height;
      out << YAML::EndMap;
    }
    if (!cal.distortion.empty()) out << YAML::Key << "distortion" << YAML::Value << YAML::Flow << cal.distortion;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;

  const auto& p = cfg.positioning;
  out << YAML::Key << "positioning" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "gravity" << YAML::Value << p.gravity;
  out << YAML::Key << "gnss_sigma" << YAML::Value << p.gnss_sigma;
  out << YAML::Key << "accel_sigma" << YAML::Value << p.accel_sigma;
  out << YAML::Key << "initial_velocity_sigma" << YAML::Value << p.initial_velocity_sigma;
  out << YAML::Key << "rollpitch_blend_alpha" << YAML::Value << p.rollpitch_blend_alpha;
  out << YAML::Key << "heading_full_trust_speed" << YAML::Value << p.heading_full_trust_speed;
  out << YAML::Key << "gnss_heading_sigma" << YAML::Value << p.gnss_heading_sigma;
  out << YAML::Key << "pose_history_length" << YAML::Value << p.pose_history_length;
  out << YAML::EndMap;

  const auto& a = cfg.aggregation;
  out << YAML::Key << "aggregation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "batch_count" << YAML::Value << a.batch_count;
  out << YAML::Key << "window" << YAML::Value << a.window;
  out << YAML::Key << "voxel_leaf" << YAML::Value << a.voxel_leaf;
  out << YAML::Key << "snapshot_every" << YAML::Value << a.snapshot_every;
  out << YAML::EndMap;

  const auto& f = cfg.failcheck;
  out << YAML::Key << "failcheck" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "expected_period_ms" << YAML::Value << YAML::BeginMap;
  for (auto kind : {SensorKind::gnss_pose, SensorKind::imu, SensorKind::lidar_left, SensorKind::camera_rgb_left}) {
    if (auto it = f.expected_period_ns.find(kind); it != f.expected_period_ns.end()) {
      out << YAML::Key << kind_key(kind) << YAML::Value << static_cast<double>(it->second) * 1e-6;
    }
  }
  out << YAML::EndMap;
  out << YAML::Key << "gap_factor" << YAML::Value << f.gap_factor;
  out << YAML::Key << "imu_accel_saturation" << YAML::Value << f.imu_accel_saturation;
  out << YAML::Key << "lidar_min_points" << YAML::Value << f.lidar_min_points;
  out << YAML::Key << "decay_half_life" << YAML::Value << f.decay_half_life;
  out << YAML::EndMap;

  const auto& fu = cfg.fusion;
  out << YAML::Key << "fusion" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "depth_margin" << YAML::Value << fu.depth_margin;
  out << YAML::Key << "gate" << YAML::Value << fu.gate;
  out << YAML::Key << "ttl" << YAML::Value << fu.ttl;
  out << YAML::Key << "smoothing" << YAML::Value << fu.smoothing;
  out << YAML::Key << "history_length" << YAML::Value << fu.history_length;
  out << YAML::EndMap;

  const auto& tr = cfg.transfer;
  out << YAML::Key << "transfer" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "source_camera" << YAML::Value << std::string(to_string(tr.source_camera));
  out << YAML::Key << "target_camera" << YAML::Value << std::string(to_string(tr.target_camera));
  out << YAML::Key << "max_time_offset" << YAML::Value << tr.max_time_offset;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace atlas
