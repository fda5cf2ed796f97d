#include "atlas/local_map.hpp"

namespace atlas {

void LocalMap::set_frustums(SensorKind camera, std::vector<FrustumDetection> frustums) {
  frustums_[camera] = std::move(frustums);
}

const std::vector<FrustumDetection>& LocalMap::get_frustums(SensorKind camera) const {
  static const std::vector<FrustumDetection> kEmpty;
  const auto it = frustums_.find(camera);
  return it == frustums_.end() ? kEmpty : it->second;
}

}  // namespace atlas
