#include "lidar_deskew/odometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lidar_deskew {

TrajectorySegment::TrajectorySegment(std::vector<TimedIncrement> samples) : samples_(std::move(samples)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (!(s.increment.dt > 0.0)) {
      std::ostringstream os;
      os << "trajectory segment: sample " << i << " has non-positive dt";
      throw std::invalid_argument(os.str());
    }
    if (i > 0 && std::abs(s.start_time - samples_[i - 1].end_time()) > kGapTolerance) {
      std::ostringstream os;
      os << "trajectory segment: sample " << i << " starts at " << s.start_time << " but previous sample ends at "
         << samples_[i - 1].end_time();
      throw std::invalid_argument(os.str());
    }
  }
}

TrajectorySegment TrajectorySegment::from_increments(double t0, const std::vector<MotionIncrement>& increments) {
  std::vector<TimedIncrement> samples;
  samples.reserve(increments.size());
  double t = t0;
  for (const auto& inc : increments) {
    samples.push_back({t, inc});
    t += inc.dt;
  }
  return TrajectorySegment(std::move(samples));
}

MotionIncrement wheel_to_increment(const OdometrySample& sample, const WheelConfig& cfg) {
  cfg.validate();
  if (!(sample.dt > 0.0)) {
    throw std::invalid_argument("odometry sample: dt must be > 0");
  }
  const double r = cfg.wheel_radius;
  return {r * (sample.delta_theta_right + sample.delta_theta_left) / 2.0,
          r * (sample.delta_theta_right - sample.delta_theta_left) / cfg.track, sample.dt};
}

OdometrySample increment_to_wheel(const MotionIncrement& inc, const WheelConfig& cfg) {
  cfg.validate();
  const double half_turn = inc.delta_theta * cfg.track / 2.0;
  return {inc.dt, (inc.delta_x + half_turn) / cfg.wheel_radius, (inc.delta_x - half_turn) / cfg.wheel_radius};
}

Pose2 integrate_pose(const Pose2& prev, const MotionIncrement& inc) {
  const double mid_heading = prev.theta() + inc.delta_theta / 2.0;
  return {prev.x() + inc.delta_x * std::cos(mid_heading), prev.y() + inc.delta_x * std::sin(mid_heading),
          prev.theta() + inc.delta_theta};
}

std::vector<StampedPose> integrate_trajectory(const Pose2& start, const TrajectorySegment& seg) {
  std::vector<StampedPose> out;
  out.reserve(seg.samples().size() + 1);
  out.push_back({seg.start_time(), start});
  for (const auto& s : seg.samples()) {
    out.push_back({s.end_time(), integrate_pose(out.back().pose, s.increment)});
  }
  return out;
}

Pose2 pose_at_phase(const MotionIncrement& scan_increment, double phase) {
  if (!(phase >= 0.0 && phase <= 1.0)) {
    throw std::invalid_argument("pose_at_phase: phase outside [0, 1]");
  }
  if (phase == 1.0) {
    return {};
  }
  const double remaining = 1.0 - phase;
  const MotionIncrement back{-scan_increment.delta_x * remaining, -scan_increment.delta_theta * remaining,
                             scan_increment.dt * remaining};
  return integrate_pose(Pose2{}, back);
}

MotionIncrement accumulate_increment(const TrajectorySegment& seg, double t_begin, double t_end) {
  if (!(t_end > t_begin)) {
    throw std::invalid_argument("accumulate_increment: empty interval");
  }
  constexpr double kTol = TrajectorySegment::kGapTolerance;
  if (seg.empty() || seg.start_time() > t_begin + kTol || seg.end_time() < t_end - kTol) {
    std::ostringstream os;
    os << "accumulate_increment: odometry covers [" << seg.start_time() << ", " << seg.end_time()
       << "] but [" << t_begin << ", " << t_end << "] was requested";
    throw std::out_of_range(os.str());
  }
  MotionIncrement total{0.0, 0.0, t_end - t_begin};
  for (const auto& s : seg.samples()) {
    const double lo = std::max(s.start_time, t_begin);
    const double hi = std::min(s.end_time(), t_end);
    if (hi <= lo) continue;
    const double w = (hi - lo) / s.increment.dt;
    if (w >= 1.0) {
      total.delta_x += s.increment.delta_x;
      total.delta_theta += s.increment.delta_theta;
    } else {
      total.delta_x += w * s.increment.delta_x;
      total.delta_theta += w * s.increment.delta_theta;
    }
  }
  return total;
}

}  // namespace lidar_deskew
