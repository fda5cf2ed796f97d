#include "atlas/positioning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "atlas/errors.hpp"

namespace atlas {

Anchor anchor_from(const GnssPacket& fix) { return {fix.latitude_deg, fix.longitude_deg, fix.altitude_m}; }

Vec3 wgs84_to_local(const Anchor& anchor, const GnssPacket& fix) { return geodetic_to_enu(anchor, anchor_from(fix)); }

Kalman1D::Kalman1D(double position, double velocity, const Eigen::Matrix2d& covariance)
    : state_(position, velocity), covariance_(covariance) {}

void Kalman1D::predict(double acceleration, double dt, double accel_sigma) {
  if (dt <= 0.0) return;
  Eigen::Matrix2d f;
  f << 1.0, dt, 0.0, 1.0;
  const Eigen::Vector2d g(0.5 * dt * dt, dt);
  state_ = f * state_ + g * acceleration;
  covariance_ = f * covariance_ * f.transpose() + g * g.transpose() * (accel_sigma * accel_sigma);
  covariance_ = (0.5 * (covariance_ + covariance_.transpose())).eval();
}

void Kalman1D::correct(double measured_position, double measurement_sigma) {
  const double r = measurement_sigma * measurement_sigma;
  const double s = covariance_(0, 0) + r;
  const Eigen::Vector2d k = covariance_.col(0) / s;
  state_ += k * (measured_position - state_(0));
  // Joseph form keeps the covariance symmetric positive semi-definite.
  Eigen::Matrix2d ikh = Eigen::Matrix2d::Identity();
  ikh.col(0) -= k;
  covariance_ = ikh * covariance_ * ikh.transpose() + k * k.transpose() * r;
  covariance_ = (0.5 * (covariance_ + covariance_.transpose())).eval();
}

double azimuth_to_yaw(double azimuth) { return wrap_angle(std::numbers::pi / 2.0 - azimuth); }
double yaw_to_azimuth(double yaw) { return wrap_angle(std::numbers::pi / 2.0 - yaw); }

std::optional<double> fuse_heading(std::optional<double> gnss_heading, const Vec3& velocity,
                                   std::optional<double> previous, const PositioningConfig& cfg) {
  const double speed = std::hypot(velocity.x(), velocity.y());
  const double velocity_heading = std::atan2(velocity.x(), velocity.y());
  if (!gnss_heading) {
    if (speed > kMinHeadingSpeed) return wrap_angle(velocity_heading);
    return previous;
  }
  const double w = std::clamp(speed / cfg.heading_full_trust_speed, 0.0, 1.0);
  const double s = w * std::sin(velocity_heading) + (1.0 - w) * std::sin(*gnss_heading);
  const double c = w * std::cos(velocity_heading) + (1.0 - w) * std::cos(*gnss_heading);
  return wrap_angle(std::atan2(s, c));
}

PoseEstimator::PoseEstimator(PositioningConfig config) : config_(config) { config_.validate(); }

void PoseEstimator::predict_to(Timestamp t) {
  if (t <= filter_time_) return;
  const double dt = seconds_between(filter_time_, t);
  for (int axis = 0; axis < 3; ++axis) filters_[axis].predict(held_acceleration_(axis), dt, config_.accel_sigma);
  filter_time_ = t;
}

LocalPosition PoseEstimator::current(Timestamp t) const {
  LocalPosition out;
  out.timestamp = t;
  out.orientation = orientation_;
  if (anchor_) {
    out.position = Vec3(filters_[0].position(), filters_[1].position(), filters_[2].position());
    out.velocity = Vec3(filters_[0].velocity(), filters_[1].velocity(), filters_[2].velocity());
  }
  return out;
}

void PoseEstimator::record(const LocalPosition& pose) {
  if (!history_.empty() && history_.back().timestamp == pose.timestamp) {
    history_.back() = pose;
  } else {
    history_.push_back(pose);
  }
  const std::uint64_t keep = seconds_to_ns(config_.pose_history_length);
  while (history_.size() > 2 && pose.timestamp.ns - history_.front().timestamp.ns > keep) history_.pop_front();
}

LocalPosition PoseEstimator::on_gnss(const GnssPacket& fix) {
  if (last_gnss_ && fix.timestamp < *last_gnss_) {
    throw SequencingError(fmt::format("GNSS fix at {} ns precedes previous fix at {} ns", fix.timestamp.ns,
                                      last_gnss_->ns));
  }
  last_gnss_ = fix.timestamp;

  if (!anchor_) {
    anchor_ = anchor_from(fix);
    const double pv = config_.gnss_sigma * config_.gnss_sigma;
    const double vv = config_.initial_velocity_sigma * config_.initial_velocity_sigma;
    const Vec3 p0 = wgs84_to_local(*anchor_, fix);
    for (int axis = 0; axis < 3; ++axis) {
      filters_[axis] = Kalman1D(p0(axis), 0.0, Eigen::DiagonalMatrix<double, 2>(pv, vv).toDenseMatrix());
    }
    filter_time_ = fix.timestamp;
  } else {
    // Late fixes (older than the filter clock) are applied as-is, without rollback.
    predict_to(fix.timestamp);
    const Vec3 z = wgs84_to_local(*anchor_, fix);
    for (int axis = 0; axis < 3; ++axis) filters_[axis].correct(z(axis), config_.gnss_sigma);
  }

  std::optional<double> gnss_heading;
  if (fix.azimuth_deg) gnss_heading = wrap_angle(*fix.azimuth_deg * std::numbers::pi / 180.0);
  const Vec3 velocity(filters_[0].velocity(), filters_[1].velocity(), filters_[2].velocity());
  const bool observable = gnss_heading || std::hypot(velocity.x(), velocity.y()) > kMinHeadingSpeed;
  if (observable) {
    fused_heading_ = fuse_heading(gnss_heading, velocity, fused_heading_, config_);
    const Eigen::Vector3d rpy = to_rpy(orientation_);
    orientation_ = from_rpy(rpy.x(), rpy.y(), azimuth_to_yaw(*fused_heading_));
  }

  const LocalPosition pose = current(std::max(fix.timestamp, filter_time_));
  record(pose);
  return pose;
}

LocalPosition PoseEstimator::on_imu(const ImuPacket& sample) {
  if (!sample.linear_acceleration.allFinite() || !sample.angular_velocity.allFinite() ||
      !sample.absolute_orientation.coeffs().allFinite()) {
    throw DataError(fmt::format("IMU sample at {} ns has non-finite fields", sample.timestamp.ns));
  }
  if (last_imu_ && sample.timestamp < *last_imu_) {
    throw SequencingError(fmt::format("IMU sample at {} ns precedes previous sample at {} ns", sample.timestamp.ns,
                                      last_imu_->ns));
  }

  const Eigen::Vector3d abs_rpy = to_rpy(sample.absolute_orientation);
  if (!orientation_initialized_) {
    const double yaw = fused_heading_ ? azimuth_to_yaw(*fused_heading_) : 0.0;
    orientation_ = from_rpy(abs_rpy.x(), abs_rpy.y(), yaw);
    orientation_initialized_ = true;
  } else {
    const double dt = seconds_between(*last_imu_, sample.timestamp);
    const Vec3 rotation_vector = sample.angular_velocity * dt;
    const double angle = rotation_vector.norm();
    if (angle > 0.0) {
      orientation_ = (orientation_ * UnitQuaternion(Eigen::AngleAxisd(angle, rotation_vector / angle))).normalized();
    }
    // Blend the Euler angles directly so the correction never leaks into yaw.
    const Eigen::Vector3d rpy = to_rpy(orientation_);
    const double a = config_.rollpitch_blend_alpha;
    orientation_ = from_rpy(rpy.x() + a * wrap_angle(abs_rpy.x() - rpy.x()),
                            rpy.y() + a * wrap_angle(abs_rpy.y() - rpy.y()), rpy.z());
  }
  last_imu_ = sample.timestamp;

  const Vec3 local_accel = orientation_ * sample.linear_acceleration - Vec3(0.0, 0.0, config_.gravity);
  if (anchor_) predict_to(sample.timestamp);
  held_acceleration_ = local_accel;

  const LocalPosition pose = current(anchor_ ? std::max(sample.timestamp, filter_time_) : sample.timestamp);
  if (anchor_) record(pose);
  return pose;
}

LocalPosition PoseEstimator::estimate_pose_at(Timestamp t) const {
  if (history_.empty()) throw RangeError(fmt::format("no pose history yet (requested {} ns)", t.ns));
  const auto& first = history_.front();
  const auto& last = history_.back();
  if (t < first.timestamp || t > last.timestamp) {
    throw RangeError(fmt::format("pose at {} ns outside history [{}, {}] ns", t.ns, first.timestamp.ns,
                                 last.timestamp.ns));
  }
  auto hi = std::lower_bound(history_.begin(), history_.end(), t,
                             [](const LocalPosition& p, Timestamp ts) { return p.timestamp < ts; });
  if (hi->timestamp == t) return *hi;
  const auto lo = std::prev(hi);
  const double span = static_cast<double>(hi->timestamp.ns - lo->timestamp.ns);
  const double a = static_cast<double>(t.ns - lo->timestamp.ns) / span;
  LocalPosition out;
  out.timestamp = t;
  out.position = (1.0 - a) * lo->position + a * hi->position;
  out.velocity = (1.0 - a) * lo->velocity + a * hi->velocity;
  out.orientation = slerp_shortest(lo->orientation, hi->orientation, a);
  return out;
}

std::optional<LocalPosition> PoseEstimator::try_pose_at(Timestamp t, double max_extrapolation) const {
  if (history_.empty() || t < history_.front().timestamp) return std::nullopt;
  const auto& last = history_.back();
  if (t <= last.timestamp) return estimate_pose_at(t);
  const double dt = seconds_between(last.timestamp, t);
  if (dt > max_extrapolation) return std::nullopt;
  LocalPosition out = last;
  out.timestamp = t;
  out.position += last.velocity * dt;
  return out;
}

}  // namespace atlas
