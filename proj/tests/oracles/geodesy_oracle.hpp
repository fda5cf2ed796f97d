#pragma once

// Independent WGS84 conversions: ECEF via the semi-minor axis form and ENU via
// explicitly constructed east/north/up basis vectors; the inverse uses
// Bowring's closed-form latitude.

#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace oracle {

inline constexpr double kA = 6378137.0;
inline constexpr double kInvF = 298.257223563;

inline Eigen::Vector3d ecef(double lat_deg, double lon_deg, double h) {
  const double b = kA * (1.0 - 1.0 / kInvF);
  const double lat = lat_deg * std::numbers::pi / 180.0;
  const double lon = lon_deg * std::numbers::pi / 180.0;
  const double c = std::cos(lat), s = std::sin(lat);
  const double n = kA * kA / std::sqrt(kA * kA * c * c + b * b * s * s);
  return {(n + h) * c * std::cos(lon), (n + h) * c * std::sin(lon), (b * b / (kA * kA) * n + h) * s};
}

inline Eigen::Vector3d enu(double lat0, double lon0, double h0, double lat, double lon, double h) {
  const double la = lat0 * std::numbers::pi / 180.0;
  const double lo = lon0 * std::numbers::pi / 180.0;
  const Eigen::Vector3d up(std::cos(la) * std::cos(lo), std::cos(la) * std::sin(lo), std::sin(la));
  const Eigen::Vector3d east = Eigen::Vector3d::UnitZ().cross(up).normalized();
  const Eigen::Vector3d north = up.cross(east);
  const Eigen::Vector3d d = ecef(lat, lon, h) - ecef(lat0, lon0, h0);
  return {d.dot(east), d.dot(north), d.dot(up)};
}

struct Geodetic {
  double lat_deg, lon_deg, h;
};

inline Geodetic geodetic(const Eigen::Vector3d& e) {
  const double f = 1.0 / kInvF;
  const double b = kA * (1.0 - f);
  const double e2 = f * (2.0 - f);
  const double ep2 = (kA * kA - b * b) / (b * b);
  const double p = std::hypot(e.x(), e.y());
  const double theta = std::atan2(e.z() * kA, p * b);
  const double lat = std::atan2(e.z() + ep2 * b * std::pow(std::sin(theta), 3),
                                p - e2 * kA * std::pow(std::cos(theta), 3));
  const double n = kA / std::sqrt(1.0 - e2 * std::sin(lat) * std::sin(lat));
  return {lat * 180.0 / std::numbers::pi, std::atan2(e.y(), e.x()) * 180.0 / std::numbers::pi,
          p / std::cos(lat) - n};
}

}  // namespace oracle
