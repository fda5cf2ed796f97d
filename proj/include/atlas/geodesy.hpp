#pragma once

#include "atlas/geometry.hpp"

namespace atlas {

/// WGS84 ellipsoid.
inline constexpr double kWgs84A = 6378137.0;
inline constexpr double kWgs84F = 1.0 / 298.257223563;

struct GeodeticPoint {
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
  double altitude_m = 0.0;
};

Vec3 geodetic_to_ecef(const GeodeticPoint& p);
GeodeticPoint ecef_to_geodetic(const Vec3& ecef);

/// East-north-up coordinates of `p` in the tangent frame at `anchor`.
Vec3 geodetic_to_enu(const GeodeticPoint& anchor, const GeodeticPoint& p);
GeodeticPoint enu_to_geodetic(const GeodeticPoint& anchor, const Vec3& enu);

}  // namespace atlas
