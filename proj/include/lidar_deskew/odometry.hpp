#pragma once

// Differential-drive dead reckoning from wheel increments, and the
// intra-scan back-projection used by the deskewer.

#include <vector>

#include "lidar_deskew/types.hpp"

namespace lidar_deskew {

/// A motion increment that starts at `start_time` and lasts `increment.dt`.
struct TimedIncrement {
  double start_time = 0.0;
  MotionIncrement increment;

  double end_time() const { return start_time + increment.dt; }
};

/// Contiguous, time-ordered increments. Construction checks contiguity
/// (each sample starts where the previous one ended, within 1e-6 s).
class TrajectorySegment {
 public:
  static constexpr double kGapTolerance = 1e-6;

  TrajectorySegment() = default;
  explicit TrajectorySegment(std::vector<TimedIncrement> samples);

  /// Builds a segment from back-to-back increments starting at `t0`.
  static TrajectorySegment from_increments(double t0, const std::vector<MotionIncrement>& increments);

  const std::vector<TimedIncrement>& samples() const { return samples_; }
  bool empty() const { return samples_.empty(); }
  double start_time() const { return samples_.empty() ? 0.0 : samples_.front().start_time; }
  double end_time() const { return samples_.empty() ? 0.0 : samples_.back().end_time(); }

 private:
  std::vector<TimedIncrement> samples_;
};

struct StampedPose {
  double time = 0.0;
  Pose2 pose;
};

/// Differential-drive kinematics: delta_x = r (dR + dL) / 2,
/// delta_theta = r (dR - dL) / L.
MotionIncrement wheel_to_increment(const OdometrySample& sample, const WheelConfig& cfg);

/// Inverse of wheel_to_increment.
OdometrySample increment_to_wheel(const MotionIncrement& inc, const WheelConfig& cfg);

/// One midpoint (second-order Runge-Kutta) step: the translation is applied
/// along the heading at the middle of the step.
Pose2 integrate_pose(const Pose2& prev, const MotionIncrement& inc);

/// Folds integrate_pose over the segment. Returns samples().size() + 1
/// poses; the first is `start` at the segment start time (0 if empty).
std::vector<StampedPose> integrate_trajectory(const Pose2& start, const TrajectorySegment& seg);

/// Sensor pose of a ray fired at `phase` of a scan, expressed in the
/// end-of-scan frame.
///
/// `scan_increment` is the whole-scan motion. Motion is assumed uniform over
/// the scan, so the part still to come after the ray is the remaining
/// fraction f = 1 - phase of it. The returned pose is one midpoint step of
/// the negated remaining motion (-f*delta_x, -f*delta_theta), which is the
/// exact inverse of the forward midpoint step. phase == 1 gives the identity.
/// Throws std::invalid_argument if phase is outside [0, 1].
Pose2 pose_at_phase(const MotionIncrement& scan_increment, double phase);

/// Sums the motion accrued over [t_begin, t_end]. Samples straddling a
/// boundary contribute proportionally to their overlap (uniform rate within
/// a sample). Throws if the segment does not cover the interval.
MotionIncrement accumulate_increment(const TrajectorySegment& seg, double t_begin, double t_end);

}  // namespace lidar_deskew
