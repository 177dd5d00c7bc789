#pragma once

#include "lidar_deskew/odometry.hpp"
#include "lidar_deskew/types.hpp"

namespace lidar_deskew {

struct DeskewReport {
  std::size_t num_rays = 0;
  std::size_t num_points = 0;
  /// Largest |corrected - raw| over all returns.
  double max_correction_displacement = 0.0;
  /// World-frame angle covered by the revolution, 2*pi +/- |delta_theta|.
  double swept_world_angle = kTwoPi;
};

struct DeskewResult {
  PointCloud cloud;
  DeskewReport report;
};

/// Tolerance on |scan_increment.dt - scan period|.
inline constexpr double kScanTimeTolerance = 1e-6;

/// Polar to Cartesian in the sensor frame, assuming a single viewpoint.
Point3 ray_to_point(const Ray& ray, MirrorDirection dir = MirrorDirection::kCounterClockwise);

/// Moves the ray's point from its own sensor pose into the end-of-scan
/// frame: (X, Y, 0) + Rz(theta) * ray_to_point(ray).
Point3 correct_point(const Ray& ray, const Pose2& pose, MirrorDirection dir = MirrorDirection::kCounterClockwise);

/// World-frame angle swept by one revolution given the vehicle yaw accrued
/// over the scan. See mirror_sign() for the sign table.
double swept_world_angle(const MotionIncrement& scan_increment, MirrorDirection dir);

/// Uncorrected cloud: every return converted with ray_to_point, as if the
/// whole scan had been taken from the end-of-scan pose.
PointCloud raw_cloud(const Scan& scan);

/// Motion-compensates a scan. `scan_increment` must span the scan period.
/// Output points are in the end-of-scan sensor frame, in ray order; no-return
/// rays are dropped. Zero motion returns the raw cloud unchanged bit for bit.
DeskewResult deskew_scan(const Scan& scan, const MotionIncrement& scan_increment);

}  // namespace lidar_deskew
