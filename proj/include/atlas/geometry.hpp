#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace atlas {

using Vec3 = Eigen::Vector3d;
using UnitQuaternion = Eigen::Quaterniond;

/// Returns q with the double cover resolved to w >= 0.
UnitQuaternion canonical(const UnitQuaternion& q);

/// Rotation from roll/pitch/yaw (intrinsic Z-Y-X: yaw about z, then pitch, then roll).
UnitQuaternion from_rpy(double roll, double pitch, double yaw);

/// Z-Y-X Euler angles of q, each in (-pi, pi].
Eigen::Vector3d to_rpy(const UnitQuaternion& q);

double yaw_of(const UnitQuaternion& q);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/**
 * Proper rigid motion p -> R p + t.
 *
 * The rotation is stored as a unit quaternion and renormalized on
 * construction, so a RigidTransform is always a valid SE(3) element.
 */
class RigidTransform {
 public:
  RigidTransform() = default;
  RigidTransform(const UnitQuaternion& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) { return {UnitQuaternion::Identity(), t}; }
  static RigidTransform from_rotation(const UnitQuaternion& q) { return {q, Vec3::Zero()}; }
  static RigidTransform from_matrix(const Eigen::Matrix4d& m);

  const UnitQuaternion& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 operator*(const Vec3& p) const { return apply(p); }

  RigidTransform inverse() const;
  Eigen::Matrix4d matrix() const;

  /// True when both transforms move every point of a ball of radius `scale`
  /// to within `tol` of each other.
  bool is_approx(const RigidTransform& other, double tol = 1e-9, double scale = 1.0) const;

 private:
  UnitQuaternion rotation_ = UnitQuaternion::Identity();
  Vec3 translation_ = Vec3::Zero();
};

/// a after b: compose(a, b)(p) == a(b(p)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
inline RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) { return compose(a, b); }

/// Shorter-arc slerp, falling back to normalized lerp when the two rotations
/// are numerically indistinguishable.
UnitQuaternion slerp_shortest(const UnitQuaternion& q0, const UnitQuaternion& q1, double t);

/// Linear translation / spherical rotation blend. Throws ArgumentError for t outside [0, 1].
RigidTransform interpolate_pose(const RigidTransform& p0, const RigidTransform& p1, double t);

/**
 * Ordered sequence of transforms that is only collapsed on demand.
 *
 * Elements are written left to right and applied right to left, so the
 * chain [A, B] maps p to A(B(p)).
 */
class TransformChain {
 public:
  TransformChain() = default;
  explicit TransformChain(std::vector<RigidTransform> elements) : elements_(std::move(elements)) {}

  /// Adds `t` at the right end: it acts on points before every existing element.
  TransformChain& append(const RigidTransform& t);

  /// Returns a new chain with `t` applied after every existing element.
  TransformChain then(const RigidTransform& t) const;

  RigidTransform collapse() const;

  const std::vector<RigidTransform>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }

 private:
  std::vector<RigidTransform> elements_;
};

/// Collapses the chain once and applies the result to every point.
std::vector<Vec3> evaluate_chain(const TransformChain& chain, std::span<const Vec3> points);

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

/// Pinhole intrinsics, +z optical axis, +x right, +y down.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws ArgumentError when the invariants fx, fy > 0 and 0 < c < size fail.
  void validate() const;
};

inline constexpr double kMinProjectionDepth = 1e-3;

/// Pixel of a camera-frame point, or nullopt when behind the camera or outside the image.
std::optional<Pixel> project_point(const CameraIntrinsics& intr, const Vec3& p_cam);

/// Same formula without the image-bounds check (still rejects z <= kMinProjectionDepth).
std::optional<Pixel> project_unbounded(const CameraIntrinsics& intr, const Vec3& p_cam);

/// Unit camera-frame direction whose projection is (u, v).
Vec3 pixel_ray(const CameraIntrinsics& intr, double u, double v);

/**
 * Truncated pyramid in the local frame.
 *
 * Corner rays are ordered (x_min,y_min), (x_max,y_min), (x_max,y_max),
 * (x_min,y_max) in image terms. `axis` is the ray through the bounding-box
 * center; near/far cuts are planes perpendicular to it at the given distances
 * from the origin.
 */
struct Frustum {
  Vec3 origin = Vec3::Zero();
  std::array<Vec3, 4> corner_rays{Vec3::UnitZ(), Vec3::UnitZ(), Vec3::UnitZ(), Vec3::UnitZ()};
  Vec3 axis = Vec3::UnitZ();
  double near_distance = 0.0;
  double far_distance = 0.0;

  bool contains(const Vec3& p, double tol = 1e-9) const;

  /// Point where corner ray `i` meets the plane perpendicular to `axis` at `distance`.
  Vec3 corner_at(std::size_t i, double distance) const;
};

}  // namespace atlas
