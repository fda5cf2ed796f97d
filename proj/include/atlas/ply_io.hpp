#pragma once

#include <filesystem>
#include <vector>

#include "atlas/sensor_data.hpp"

namespace atlas {

// Binary little-endian PLY with one `vertex` element carrying float
// x, y, z, intensity. Vertex order is preserved in both directions.

std::vector<LidarPoint> read_ply(const std::filesystem::path& path);
void write_ply(const std::filesystem::path& path, const std::vector<LidarPoint>& points);

}  // namespace atlas
