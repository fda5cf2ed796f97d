#pragma once

#include <array>
#include <deque>
#include <optional>

#include <Eigen/Core>

#include "atlas/config.hpp"
#include "atlas/geodesy.hpp"
#include "atlas/geometry.hpp"
#include "atlas/sensor_data.hpp"

namespace atlas {

/// The first GNSS fix of a run; origin of the local ENU frame.
using Anchor = GeodeticPoint;

Anchor anchor_from(const GnssPacket& fix);

/// ENU metres of `fix` relative to `anchor`.
Vec3 wgs84_to_local(const Anchor& anchor, const GnssPacket& fix);

/**
 * Position/velocity filter along one axis.
 *
 * Acceleration enters as a control input; process noise follows the
 * piecewise-constant white acceleration model with standard deviation
 * `accel_sigma`.
 */
class Kalman1D {
 public:
  Kalman1D() = default;
  Kalman1D(double position, double velocity, const Eigen::Matrix2d& covariance);

  void predict(double acceleration, double dt, double accel_sigma);
  void correct(double measured_position, double measurement_sigma);

  double position() const { return state_(0); }
  double velocity() const { return state_(1); }
  const Eigen::Vector2d& state() const { return state_; }
  const Eigen::Matrix2d& covariance() const { return covariance_; }

 private:
  Eigen::Vector2d state_ = Eigen::Vector2d::Zero();
  Eigen::Matrix2d covariance_ = Eigen::Matrix2d::Identity();
};

/// Agent pose in the anchored local frame. `orientation` maps body to local.
struct LocalPosition {
  Timestamp timestamp;
  Vec3 position = Vec3::Zero();
  UnitQuaternion orientation = UnitQuaternion::Identity();
  Vec3 velocity = Vec3::Zero();

  RigidTransform pose() const { return {orientation, position}; }
};

/// Horizontal speed above which a velocity direction is used without a GNSS heading.
inline constexpr double kMinHeadingSpeed = 0.5;

/**
 * Blends a GNSS heading with the direction of travel.
 *
 * Headings are azimuths in radians: clockwise from north, in (-pi, pi]. The
 * velocity weight grows linearly with horizontal speed and saturates at
 * `heading_full_trust_speed`. Without a GNSS heading the velocity direction
 * is used above kMinHeadingSpeed; below it `previous` is returned unchanged.
 */
std::optional<double> fuse_heading(std::optional<double> gnss_heading, const Vec3& velocity,
                                   std::optional<double> previous, const PositioningConfig& cfg);

/// ENU yaw (counter-clockwise from east) for an azimuth, and back.
double azimuth_to_yaw(double azimuth);
double yaw_to_azimuth(double yaw);

/**
 * GNSS/IMU pose estimator built from three independent Kalman1D axes, a
 * gyro-integrated orientation with low-pass roll/pitch correction, and
 * velocity/GNSS heading fusion for yaw.
 */
class PoseEstimator {
 public:
  explicit PoseEstimator(PositioningConfig config = {});

  /// Throws SequencingError when fixes go backwards in time.
  LocalPosition on_gnss(const GnssPacket& fix);

  /// Throws DataError on non-finite input and SequencingError on time reversal.
  LocalPosition on_imu(const ImuPacket& sample);

  /// Pose interpolated from history. Throws RangeError outside the stored window.
  LocalPosition estimate_pose_at(Timestamp t) const;

  /// Like estimate_pose_at, but allows constant-velocity extrapolation up to
  /// `max_extrapolation` seconds past the newest entry. Nullopt when not covered.
  std::optional<LocalPosition> try_pose_at(Timestamp t, double max_extrapolation) const;

  bool anchored() const { return anchor_.has_value(); }
  const std::optional<Anchor>& anchor() const { return anchor_; }
  const std::array<Kalman1D, 3>& filters() const { return filters_; }
  const std::deque<LocalPosition>& history() const { return history_; }
  std::optional<double> fused_heading() const { return fused_heading_; }
  const UnitQuaternion& orientation() const { return orientation_; }
  /// Gravity-free local-frame acceleration from the latest IMU sample.
  const Vec3& dynamic_acceleration() const { return held_acceleration_; }
  const PositioningConfig& config() const { return config_; }

 private:
  void predict_to(Timestamp t);
  LocalPosition current(Timestamp t) const;
  void record(const LocalPosition& pose);

  PositioningConfig config_;
  std::optional<Anchor> anchor_;
  std::array<Kalman1D, 3> filters_;
  Timestamp filter_time_;
  Vec3 held_acceleration_ = Vec3::Zero();

  UnitQuaternion orientation_ = UnitQuaternion::Identity();
  bool orientation_initialized_ = false;
  std::optional<Timestamp> last_imu_;
  std::optional<Timestamp> last_gnss_;
  std::optional<double> fused_heading_;

  std::deque<LocalPosition> history_;
};

}  // namespace atlas
