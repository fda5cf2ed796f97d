#include "atlas/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "atlas/errors.hpp"

namespace atlas {

UnitQuaternion canonical(const UnitQuaternion& q) {
  if (q.w() < 0.0) return UnitQuaternion(-q.w(), -q.x(), -q.y(), -q.z());
  return q;
}

UnitQuaternion from_rpy(double roll, double pitch, double yaw) {
  return UnitQuaternion(Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
                        Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                        Eigen::AngleAxisd(roll, Vec3::UnitX()));
}

Eigen::Vector3d to_rpy(const UnitQuaternion& q_in) {
  const UnitQuaternion q = q_in.normalized();
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  const double roll = std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y));
  const double sp = std::clamp(2.0 * (w * y - z * x), -1.0, 1.0);
  const double pitch = std::asin(sp);
  const double yaw = std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
  return {roll, pitch, yaw};
}

double yaw_of(const UnitQuaternion& q) { return to_rpy(q).z(); }

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

RigidTransform::RigidTransform(const UnitQuaternion& rotation, const Vec3& translation)
    : rotation_(rotation.normalized()), translation_(translation) {}

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& m) {
  const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  return {UnitQuaternion(r), m.topRightCorner<3, 1>()};
}

RigidTransform RigidTransform::inverse() const {
  const UnitQuaternion inv = rotation_.conjugate();
  return {inv, -(inv * translation_)};
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_.toRotationMatrix();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

bool RigidTransform::is_approx(const RigidTransform& other, double tol, double scale) const {
  const UnitQuaternion d = rotation_.conjugate() * other.rotation_;
  const double angle = 2.0 * std::atan2(d.vec().norm(), std::abs(d.w()));
  return (translation_ - other.translation_).norm() + scale * angle <= tol;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation()};
}

UnitQuaternion slerp_shortest(const UnitQuaternion& q0, const UnitQuaternion& q1_in, double t) {
  UnitQuaternion q1 = q1_in;
  double dot = q0.dot(q1);
  if (dot < 0.0) {
    q1.coeffs() = -q1.coeffs();
    dot = -dot;
  }
  if (dot > 1.0 - 1e-9) {
    UnitQuaternion out;
    out.coeffs() = (1.0 - t) * q0.coeffs() + t * q1.coeffs();
    return out.normalized();
  }
  const double theta = std::acos(std::min(dot, 1.0));
  const double s = std::sin(theta);
  UnitQuaternion out;
  out.coeffs() = (std::sin((1.0 - t) * theta) / s) * q0.coeffs() + (std::sin(t * theta) / s) * q1.coeffs();
  return out.normalized();
}

RigidTransform interpolate_pose(const RigidTransform& p0, const RigidTransform& p1, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw ArgumentError(fmt::format("interpolate_pose: t = {} outside [0, 1]", t));
  }
  if (t == 0.0) return p0;
  if (t == 1.0) return p1;
  const Vec3 translation = (1.0 - t) * p0.translation() + t * p1.translation();
  return {slerp_shortest(p0.rotation(), p1.rotation(), t), translation};
}

TransformChain& TransformChain::append(const RigidTransform& t) {
  elements_.push_back(t);
  return *this;
}

TransformChain TransformChain::then(const RigidTransform& t) const {
  std::vector<RigidTransform> elements;
  elements.reserve(elements_.size() + 1);
  elements.push_back(t);
  elements.insert(elements.end(), elements_.begin(), elements_.end());
  return TransformChain(std::move(elements));
}

RigidTransform TransformChain::collapse() const {
  RigidTransform out;
  for (const auto& e : elements_) out = compose(out, e);
  return out;
}

std::vector<Vec3> evaluate_chain(const TransformChain& chain, std::span<const Vec3> points) {
  const RigidTransform t = chain.collapse();
  const Eigen::Matrix3d r = t.rotation().toRotationMatrix();
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.emplace_back(r * p + t.translation());
  return out;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw ArgumentError(fmt::format("camera intrinsics: focal lengths must be positive (fx={}, fy={})", fx, fy));
  }
  if (width <= 0 || height <= 0) {
    throw ArgumentError(fmt::format("camera intrinsics: invalid resolution {}x{}", width, height));
  }
  if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height)) {
    throw ArgumentError(fmt::format("camera intrinsics: principal point ({}, {}) outside {}x{} image", cx, cy,
                                    width, height));
  }
}

std::optional<Pixel> project_unbounded(const CameraIntrinsics& intr, const Vec3& p) {
  if (!(p.z() > kMinProjectionDepth)) return std::nullopt;
  return Pixel{intr.fx * p.x() / p.z() + intr.cx, intr.fy * p.y() / p.z() + intr.cy};
}

std::optional<Pixel> project_point(const CameraIntrinsics& intr, const Vec3& p) {
  auto px = project_unbounded(intr, p);
  if (!px) return std::nullopt;
  if (px->u < 0.0 || px->u >= intr.width || px->v < 0.0 || px->v >= intr.height) return std::nullopt;
  return px;
}

Vec3 pixel_ray(const CameraIntrinsics& intr, double u, double v) {
  return Vec3((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0).normalized();
}

bool Frustum::contains(const Vec3& p, double tol) const {
  const Vec3 d = p - origin;
  const double s = d.dot(axis);
  if (s < near_distance - tol || s > far_distance + tol) return false;
  for (std::size_t i = 0; i < 4; ++i) {
    Vec3 n = corner_rays[i].cross(corner_rays[(i + 1) % 4]).normalized();
    if (n.dot(axis) < 0.0) n = -n;
    if (d.dot(n) < -tol) return false;
  }
  return true;
}

Vec3 Frustum::corner_at(std::size_t i, double distance) const {
  const Vec3& r = corner_rays.at(i);
  return origin + r * (distance / r.dot(axis));
}

}  // namespace atlas
