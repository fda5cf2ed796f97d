#include "atlas/geodesy.hpp"

#include <cmath>
#include <numbers>

namespace atlas {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kE2 = kWgs84F * (2.0 - kWgs84F);

Eigen::Matrix3d ecef_to_enu_rotation(double lat, double lon) {
  const double sl = std::sin(lat), cl = std::cos(lat);
  const double so = std::sin(lon), co = std::cos(lon);
  Eigen::Matrix3d r;
  r << -so, co, 0.0,
       -sl * co, -sl * so, cl,
       cl * co, cl * so, sl;
  return r;
}

}  // namespace

Vec3 geodetic_to_ecef(const GeodeticPoint& p) {
  const double lat = p.latitude_deg * kDeg;
  const double lon = p.longitude_deg * kDeg;
  const double s = std::sin(lat);
  const double n = kWgs84A / std::sqrt(1.0 - kE2 * s * s);
  return {(n + p.altitude_m) * std::cos(lat) * std::cos(lon), (n + p.altitude_m) * std::cos(lat) * std::sin(lon),
          (n * (1.0 - kE2) + p.altitude_m) * s};
}

GeodeticPoint ecef_to_geodetic(const Vec3& e) {
  const double lon = std::atan2(e.y(), e.x());
  const double rho = std::hypot(e.x(), e.y());
  // Fixed-point iteration on latitude; converges to sub-micrometre in a few steps near the surface.
  double lat = std::atan2(e.z(), rho * (1.0 - kE2));
  double h = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double s = std::sin(lat);
    const double n = kWgs84A / std::sqrt(1.0 - kE2 * s * s);
    h = rho / std::cos(lat) - n;
    lat = std::atan2(e.z(), rho * (1.0 - kE2 * n / (n + h)));
  }
  return {lat / kDeg, lon / kDeg, h};
}

Vec3 geodetic_to_enu(const GeodeticPoint& anchor, const GeodeticPoint& p) {
  const Vec3 d = geodetic_to_ecef(p) - geodetic_to_ecef(anchor);
  return ecef_to_enu_rotation(anchor.latitude_deg * kDeg, anchor.longitude_deg * kDeg) * d;
}

GeodeticPoint enu_to_geodetic(const GeodeticPoint& anchor, const Vec3& enu) {
  const Eigen::Matrix3d r = ecef_to_enu_rotation(anchor.latitude_deg * kDeg, anchor.longitude_deg * kDeg);
  return ecef_to_geodetic(geodetic_to_ecef(anchor) + r.transpose() * enu);
}

}  // namespace atlas
