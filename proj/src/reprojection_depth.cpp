#include "atlas/reprojection_depth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "atlas/errors.hpp"

namespace atlas {
namespace {

void render_batch(const PointCloudBatch& batch, const RigidTransform& camera_pose, const CameraIntrinsics& intr,
                  DepthImage& img) {
  const RigidTransform t = batch.chain().then(camera_pose).collapse();
  const Eigen::Matrix3d r = t.rotation().toRotationMatrix();
  for (const auto& p : batch.points()) {
    const Vec3 pc = r * p.position + t.translation();
    const auto px = project_unbounded(intr, pc);
    if (!px) continue;
    const double ur = std::round(px->u);
    const double vr = std::round(px->v);
    if (ur < 0.0 || vr < 0.0 || ur >= intr.width || vr >= intr.height) continue;
    double& cell = img.at(static_cast<int>(ur), static_cast<int>(vr));
    if (cell == 0.0 || pc.z() < cell) cell = pc.z();
  }
}

}  // namespace

double FrontalPlaneQuad::area() const {
  return 0.5 * ((corners[2] - corners[0]).cross(corners[3] - corners[1])).norm();
}

std::size_t DepthImage::nonzero_count() const {
  return static_cast<std::size_t>(std::count_if(depth.begin(), depth.end(), [](double d) { return d != 0.0; }));
}

std::size_t nearest_frame(std::span<const Timestamp> timeline, Timestamp t) {
  if (timeline.empty()) throw ArgumentError("nearest_frame: empty timeline");
  auto it = std::lower_bound(timeline.begin(), timeline.end(), t);
  if (it == timeline.end() || (it != timeline.begin() && t.ns - std::prev(it)->ns <= it->ns - t.ns)) {
    // The earlier neighbour wins; step back to the first of any run of equal stamps.
    it = std::lower_bound(timeline.begin(), it, *std::prev(it));
  }
  return static_cast<std::size_t>(it - timeline.begin());
}

FrontalPlaneQuad frustum_frontal_plane(const FrustumDetection& fr) {
  FrontalPlaneQuad quad;
  for (std::size_t i = 0; i < 4; ++i) quad.corners[i] = fr.frustum.corner_at(i, fr.distance);
  quad.class_id = fr.class_id;
  quad.confidence = fr.confidence;
  return quad;
}

std::optional<Detection2D> reproject_quad(const FrontalPlaneQuad& quad, const RigidTransform& target_pose,
                                          const CameraIntrinsics& target_intr) {
  // Clip the polygon against z >= kMinProjectionDepth (Sutherland-Hodgman, one plane).
  std::vector<Vec3> cam;
  for (const auto& c : quad.corners) cam.push_back(target_pose.apply(c));
  std::vector<Vec3> clipped;
  const double zc = kMinProjectionDepth * 2.0;
  for (std::size_t i = 0; i < cam.size(); ++i) {
    const Vec3& a = cam[i];
    const Vec3& b = cam[(i + 1) % cam.size()];
    const bool a_in = a.z() >= zc;
    const bool b_in = b.z() >= zc;
    if (a_in) clipped.push_back(a);
    if (a_in != b_in) clipped.push_back(a + (b - a) * ((zc - a.z()) / (b.z() - a.z())));
  }
  if (clipped.empty()) return std::nullopt;

  constexpr double inf = std::numeric_limits<double>::infinity();
  double x0 = inf, y0 = inf, x1 = -inf, y1 = -inf;
  for (const auto& p : clipped) {
    const auto px = project_unbounded(target_intr, p);
    if (!px) continue;
    x0 = std::min(x0, px->u);
    y0 = std::min(y0, px->v);
    x1 = std::max(x1, px->u);
    y1 = std::max(y1, px->v);
  }
  if (!(x0 <= x1)) return std::nullopt;
  x0 = std::max(x0, 0.0);
  y0 = std::max(y0, 0.0);
  x1 = std::min(x1, static_cast<double>(target_intr.width));
  y1 = std::min(y1, static_cast<double>(target_intr.height));
  if (x0 >= x1 || y0 >= y1) return std::nullopt;
  return Detection2D{x0, y0, x1, y1, quad.class_id, quad.confidence};
}

DepthImage render_depth_image(std::span<const PointCloudBatch> batches, const RigidTransform& camera_pose,
                              const CameraIntrinsics& intr) {
  DepthImage img(intr.width, intr.height);
  for (const auto& b : batches) render_batch(b, camera_pose, intr, img);
  return img;
}

DepthImage render_depth_image(const PointCloudAggregator& aggregator, const RigidTransform& camera_pose,
                              const CameraIntrinsics& intr) {
  DepthImage img(intr.width, intr.height);
  for (const auto& b : aggregator.batches()) render_batch(b, camera_pose, intr, img);
  return img;
}

}  // namespace atlas
