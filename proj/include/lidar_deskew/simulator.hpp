#pragma once

// Synthetic vehicle trajectories, CAN-style wheel logs and physically
// consistent rotating-LiDAR scans of a Scene.

#include <cstdint>
#include <variant>
#include <vector>

#include "lidar_deskew/odometry.hpp"
#include "lidar_deskew/scene.hpp"
#include "lidar_deskew/types.hpp"

namespace lidar_deskew {

struct LinearMotion {
  double speed = 0.0;
};

/// Constant speed and yaw rate. A zero yaw rate degrades to LinearMotion.
struct ArcMotion {
  double speed = 0.0;
  double yaw_rate = 0.0;
};

struct TimedSegment {
  double duration = 0.0;
  double speed = 0.0;
  double yaw_rate = 0.0;
};

/// Back-to-back constant-twist segments. Past the last segment the vehicle
/// keeps the last segment's twist.
struct PiecewiseMotion {
  std::vector<TimedSegment> segments;
};

using MotionKind = std::variant<LinearMotion, ArcMotion, PiecewiseMotion>;

struct TrajectorySpec {
  MotionKind kind = LinearMotion{};
  double duration = 1.0;
  Pose2 start_pose;

  void validate() const;

  /// Exact (closed-form) pose at time t, 0 <= t <= duration.
  Pose2 pose_at(double t) const;
  /// Exact arc length and heading change accrued over [t0, t1].
  MotionIncrement increment_between(double t0, double t1) const;
};

struct NoiseSpec {
  double range_sigma = 0.0;
  double wheel_tick_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Poses at t = 0, dt, 2 dt, ... and at `duration` if it is not a multiple of dt.
std::vector<StampedPose> sample_trajectory(const TrajectorySpec& spec, double dt);

/// Timestamped wheel samples; sample i covers [i / rate, (i + 1) / rate].
struct CanLog {
  double start_time = 0.0;
  std::vector<OdometrySample> samples;

  /// Converts to contiguous motion increments.
  TrajectorySegment to_segment(const WheelConfig& cfg) const;
};

/// Wheel increments that reproduce the trajectory through the
/// differential-drive model, plus optional Gaussian tick noise per wheel.
CanLog emit_can_log(const TrajectorySpec& spec, const WheelConfig& cfg, double rate_hz, const NoiseSpec& noise);

struct SimulatedScan {
  Scan scan;
  /// Noise-free world-frame hit point of every ray (NaN for no-returns).
  std::vector<Point3> true_hits;
  /// Primitive hit by every ray (meaningless for no-returns).
  std::vector<PrimitiveId> labels;
  std::vector<float> remission;
  /// Vehicle pose at scan end: the frame corrected points are expressed in.
  Pose2 end_pose;
};

/// Ray-casts one revolution from the moving sensor. Column k fires at
/// phase k / columns from the exact trajectory pose at that instant.
/// Deterministic for a given (scene, spec, scan_start, cfg, noise).
SimulatedScan simulate_scan_with_truth(const Scene& scene, const TrajectorySpec& spec, double scan_start,
                                       const LidarConfig& cfg, const NoiseSpec& noise);

Scan simulate_scan(const Scene& scene, const TrajectorySpec& spec, double scan_start, const LidarConfig& cfg,
                   const NoiseSpec& noise);

/// World angle swept by one revolution: > 2*pi means objects near the scan
/// start can be seen twice, < 2*pi leaves a blind wedge of |delta_theta|.
double coverage_analysis(const MotionIncrement& scan_increment, const LidarConfig& cfg);

}  // namespace lidar_deskew
