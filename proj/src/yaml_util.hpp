#pragma once

// YAML reading helpers shared by the pipeline config and scenario spec parsers.
// Every failure is reported as ConfigError with the offending key path and line.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "atlas/config.hpp"
#include "atlas/errors.hpp"
#include "atlas/geometry.hpp"

namespace atlas::yaml_util {

inline std::string where(const YAML::Node& node) {
  const auto mark = node.Mark();
  if (mark.is_null()) return {};
  return fmt::format(" (line {})", mark.line + 1);
}

inline std::string join(const std::string& prefix, std::string_view key) {
  return prefix.empty() ? std::string(key) : prefix + "." + std::string(key);
}

inline void require_map(const YAML::Node& node, const std::string& path) {
  if (!node.IsMap()) throw ConfigError(fmt::format("{} must be a mapping{}", path.empty() ? "config" : path, where(node)));
}

inline void check_keys(const YAML::Node& node, const std::string& path, std::initializer_list<std::string_view> allowed) {
  require_map(node, path);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(fmt::format("unknown key '{}'{}", join(path, key), where(kv.first)));
    }
  }
}

template <class T>
inline bool read(const YAML::Node& parent, std::string_view key, const std::string& path, T& out) {
  const YAML::Node node = parent[std::string(key)];
  if (!node) return false;
  try {
    out = node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("invalid value for {}{}", join(path, key), where(node)));
  }
  return true;
}

inline void require_positive(double v, const std::string& field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(fmt::format("{} must be positive, got {}", field, v));
}

inline RigidTransform parse_transform(const YAML::Node& node, const std::string& path) {
  check_keys(node, path, {"translation", "rotation", "rpy_deg"});
  std::vector<double> t{0.0, 0.0, 0.0};
  read(node, "translation", path, t);
  if (t.size() != 3) throw ConfigError(fmt::format("{}.translation needs 3 values{}", path, where(node)));
  UnitQuaternion q = UnitQuaternion::Identity();
  std::vector<double> values;
  if (read(node, "rotation", path, values)) {
    if (values.size() != 4) throw ConfigError(fmt::format("{}.rotation needs [w, x, y, z]{}", path, where(node)));
    q = UnitQuaternion(values[0], values[1], values[2], values[3]);
    if (std::abs(q.norm() - 1.0) > 1e-6) throw ConfigError(fmt::format("{}.rotation is not a unit quaternion", path));
  }
  if (read(node, "rpy_deg", path, values)) {
    if (node["rotation"]) throw ConfigError(fmt::format("{}: give either rotation or rpy_deg, not both", path));
    if (values.size() != 3) throw ConfigError(fmt::format("{}.rpy_deg needs 3 values{}", path, where(node)));
    constexpr double deg = std::numbers::pi / 180.0;
    q = from_rpy(values[0] * deg, values[1] * deg, values[2] * deg);
  }
  return {q, Vec3(t[0], t[1], t[2])};
}

inline SensorCalibration parse_calibration(const YAML::Node& node, const std::string& path) {
  check_keys(node, path, {"extrinsic", "intrinsics", "distortion"});
  SensorCalibration cal;
  if (node["extrinsic"]) cal.extrinsic = parse_transform(node["extrinsic"], path + ".extrinsic");
  if (const auto in = node["intrinsics"]) {
    const std::string ip = path + ".intrinsics";
    check_keys(in, ip, {"fx", "fy", "cx", "cy", "width", "height"});
    CameraIntrinsics intr;
    for (auto [key, field] : {std::pair{"fx", &intr.fx}, {"fy", &intr.fy}, {"cx", &intr.cx}, {"cy", &intr.cy}}) {
      if (!read(in, key, ip, *field)) throw ConfigError(fmt::format("missing required field {}.{}", ip, key));
    }
    if (!read(in, "width", ip, intr.width)) throw ConfigError(fmt::format("missing required field {}.width", ip));
    if (!read(in, "height", ip, intr.height)) throw ConfigError(fmt::format("missing required field {}.height", ip));
    cal.intrinsics = intr;
  }
  read(node, "distortion", path, cal.distortion);
  return cal;
}

}  // namespace atlas::yaml_util
