#pragma once

// Reference geometry built from plain 4x4 homogeneous matrices and elementary
// rotations, sharing no code with the library.

#include <cmath>

#include <Eigen/Core>

namespace oracle {

inline Eigen::Matrix3d rot_x(double a) {
  Eigen::Matrix3d r;
  r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return r;
}

inline Eigen::Matrix3d rot_y(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}

inline Eigen::Matrix3d rot_z(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

/// Yaw about z, then pitch about y, then roll about x (intrinsic).
inline Eigen::Matrix3d rpy_matrix(double roll, double pitch, double yaw) {
  return rot_z(yaw) * rot_y(pitch) * rot_x(roll);
}

inline Eigen::Matrix4d homogeneous(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = r;
  m.topRightCorner<3, 1>() = t;
  return m;
}

inline Eigen::Vector3d apply(const Eigen::Matrix4d& m, const Eigen::Vector3d& p) {
  return (m * p.homogeneous()).head<3>();
}

/// Pinhole projection without any validity checks.
inline Eigen::Vector2d pinhole(double fx, double fy, double cx, double cy, const Eigen::Vector3d& p) {
  return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
}

}  // namespace oracle
