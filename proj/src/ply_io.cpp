#include "atlas/ply_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "atlas/errors.hpp"

namespace atlas {

static_assert(std::endian::native == std::endian::little, "PLY I/O assumes a little-endian host");

std::vector<LidarPoint> read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open PLY {}", path.string()));

  std::string line;
  std::getline(in, line);
  if (line != "ply") throw IoError(fmt::format("{}: missing 'ply' magic", path.string()));

  std::size_t count = 0;
  bool binary_le = false;
  std::vector<std::string> props;
  bool in_vertex = false;
  while (std::getline(in, line)) {
    if (line == "end_header") break;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt_name;
      ls >> fmt_name;
      binary_le = fmt_name == "binary_little_endian";
    } else if (word == "element") {
      std::string name;
      ls >> name;
      in_vertex = name == "vertex";
      if (in_vertex) {
        ls >> count;
      } else {
        throw IoError(fmt::format("{}: unsupported element '{}'", path.string(), name));
      }
    } else if (word == "property" && in_vertex) {
      std::string type, name;
      ls >> type >> name;
      if (type != "float" && type != "float32") {
        throw IoError(fmt::format("{}: property {} must be float", path.string(), name));
      }
      props.push_back(name);
    }
  }
  if (line != "end_header") throw IoError(fmt::format("{}: truncated header", path.string()));
  if (!binary_le) throw IoError(fmt::format("{}: only binary_little_endian PLY is supported", path.string()));
  if (props != std::vector<std::string>{"x", "y", "z", "intensity"}) {
    throw IoError(fmt::format("{}: expected vertex properties x y z intensity", path.string()));
  }

  std::vector<float> raw(count * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != raw.size() * sizeof(float)) {
    throw IoError(fmt::format("{}: expected {} vertices, file is truncated", path.string(), count));
  }
  std::vector<LidarPoint> points(count);
  for (std::size_t i = 0; i < count; ++i) {
    points[i].position = Vec3(raw[4 * i], raw[4 * i + 1], raw[4 * i + 2]);
    points[i].intensity = raw[4 * i + 3];
  }
  return points;
}

void write_ply(const std::filesystem::path& path, const std::vector<LidarPoint>& points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\nproperty float intensity\nend_header\n";
  std::vector<float> raw(points.size() * 4);
  for (std::size_t i = 0; i < points.size(); ++i) {
    raw[4 * i] = static_cast<float>(points[i].position.x());
    raw[4 * i + 1] = static_cast<float>(points[i].position.y());
    raw[4 * i + 2] = static_cast<float>(points[i].position.z());
    raw[4 * i + 3] = static_cast<float>(points[i].intensity);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(float)));
  if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

}  // namespace atlas
