#include "lidar_deskew/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "lidar_deskew/deskew.hpp"

namespace lidar_deskew {
namespace {

constexpr double kTimeSlack = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

/// sin(x) / x, accurate near zero.
double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

/// Constant-twist motion for `tau` seconds, exact.
Pose2 advance(const Pose2& from, double speed, double yaw_rate, double tau) {
  const double turn = yaw_rate * tau;
  const double chord = speed * tau * sinc(turn / 2.0);
  const double mid = from.theta() + turn / 2.0;
  return {from.x() + chord * std::cos(mid), from.y() + chord * std::sin(mid), from.theta() + turn};
}

std::vector<TimedSegment> as_segments(const MotionKind& kind, double duration) {
  return std::visit(Overloaded{
                        [&](const LinearMotion& m) { return std::vector<TimedSegment>{{duration, m.speed, 0.0}}; },
                        [&](const ArcMotion& m) { return std::vector<TimedSegment>{{duration, m.speed, m.yaw_rate}}; },
                        [&](const PiecewiseMotion& m) { return m.segments; },
                    },
                    kind);
}

void check_time(const TrajectorySpec& spec, double t) {
  if (!(t >= -kTimeSlack && t <= spec.duration + kTimeSlack)) {
    throw std::out_of_range("trajectory: time " + std::to_string(t) + " outside [0, duration]");
  }
}

std::seed_seq scan_seed(std::uint64_t seed, double scan_start) {
  const auto t_bits = std::bit_cast<std::uint64_t>(scan_start);
  return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32U),
                       static_cast<std::uint32_t>(t_bits), static_cast<std::uint32_t>(t_bits >> 32U)};
}

}  // namespace

void TrajectorySpec::validate() const {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw std::invalid_argument("trajectory: duration must be > 0");
  }
  const auto segments = as_segments(kind, duration);
  if (segments.empty()) {
    throw std::invalid_argument("trajectory: piecewise motion needs at least one segment");
  }
  for (const auto& s : segments) {
    if (!std::isfinite(s.speed) || !std::isfinite(s.yaw_rate)) {
      throw std::invalid_argument("trajectory: speeds must be finite");
    }
    if (!(s.duration > 0.0)) {
      throw std::invalid_argument("trajectory: segment duration must be > 0");
    }
  }
}

Pose2 TrajectorySpec::pose_at(double t) const {
  check_time(*this, t);
  t = std::clamp(t, 0.0, duration);
  Pose2 pose = start_pose;
  const auto segments = as_segments(kind, duration);
  double elapsed = 0.0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    const bool last = i + 1 == segments.size();
    const double tau = last ? t - elapsed : std::min(s.duration, t - elapsed);
    if (tau <= 0.0) break;
    pose = advance(pose, s.speed, s.yaw_rate, tau);
    elapsed += tau;
  }
  return pose;
}

MotionIncrement TrajectorySpec::increment_between(double t0, double t1) const {
  check_time(*this, t0);
  check_time(*this, t1);
  if (!(t1 > t0)) {
    throw std::invalid_argument("trajectory: increment interval must have positive length");
  }
  MotionIncrement inc{0.0, 0.0, t1 - t0};
  const auto segments = as_segments(kind, duration);
  double seg_start = 0.0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    const bool last = i + 1 == segments.size();
    const double seg_end = last ? std::numeric_limits<double>::infinity() : seg_start + s.duration;
    const double overlap = std::min(seg_end, t1) - std::max(seg_start, t0);
    if (overlap > 0.0) {
      inc.delta_x += s.speed * overlap;
      inc.delta_theta += s.yaw_rate * overlap;
    }
    seg_start = seg_end;
  }
  return inc;
}

void NoiseSpec::validate() const {
  if (!(range_sigma >= 0.0) || !(wheel_tick_sigma >= 0.0)) {
    throw std::invalid_argument("noise: sigmas must be >= 0");
  }
}

std::vector<StampedPose> sample_trajectory(const TrajectorySpec& spec, double dt) {
  spec.validate();
  if (!(dt > 0.0) || dt > spec.duration) {
    throw std::invalid_argument("sample_trajectory: dt must be in (0, duration]");
  }
  std::vector<StampedPose> out;
  const auto steps = static_cast<std::size_t>(std::floor(spec.duration / dt + 1e-9));
  out.reserve(steps + 2);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = std::min(static_cast<double>(i) * dt, spec.duration);
    out.push_back({t, spec.pose_at(t)});
  }
  if (spec.duration - out.back().time > 1e-12) {
    out.push_back({spec.duration, spec.pose_at(spec.duration)});
  }
  return out;
}

TrajectorySegment CanLog::to_segment(const WheelConfig& cfg) const {
  std::vector<MotionIncrement> increments;
  increments.reserve(samples.size());
  for (const auto& s : samples) increments.push_back(wheel_to_increment(s, cfg));
  return TrajectorySegment::from_increments(start_time, increments);
}

CanLog emit_can_log(const TrajectorySpec& spec, const WheelConfig& cfg, double rate_hz, const NoiseSpec& noise) {
  spec.validate();
  cfg.validate();
  noise.validate();
  if (!(rate_hz > 0.0)) {
    throw std::invalid_argument("emit_can_log: rate must be > 0");
  }
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> tick(0.0, 1.0);

  CanLog log;
  const auto count = static_cast<std::size_t>(std::floor(spec.duration * rate_hz + 1e-9));
  log.samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t0 = static_cast<double>(i) / rate_hz;
    const double t1 = static_cast<double>(i + 1) / rate_hz;
    MotionIncrement inc = spec.increment_between(t0, std::min(t1, spec.duration));
    inc.dt = 1.0 / rate_hz;
    OdometrySample s = increment_to_wheel(inc, cfg);
    if (noise.wheel_tick_sigma > 0.0) {
      s.delta_theta_right += noise.wheel_tick_sigma * tick(rng);
      s.delta_theta_left += noise.wheel_tick_sigma * tick(rng);
    }
    log.samples.push_back(s);
  }
  return log;
}

SimulatedScan simulate_scan_with_truth(const Scene& scene, const TrajectorySpec& spec, double scan_start,
                                       const LidarConfig& cfg, const NoiseSpec& noise) {
  cfg.validate();
  spec.validate();
  noise.validate();
  scene.validate();
  check_time(spec, scan_start);
  check_time(spec, scan_start + cfg.scan_period);

  auto seq = scan_seed(noise.seed, scan_start);
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> range_noise(0.0, 1.0);

  const std::size_t columns = cfg.num_columns();
  const std::size_t beams = cfg.num_beams();
  const double sign = mirror_sign(cfg.mirror_direction);

  std::vector<double> cos_incl(beams);
  std::vector<double> sin_incl(beams);
  for (std::size_t b = 0; b < beams; ++b) {
    cos_incl[b] = std::cos(cfg.beam_inclinations[b]);
    sin_incl[b] = std::sin(cfg.beam_inclinations[b]);
  }

  std::vector<Ray> rays;
  std::vector<Point3> hits;
  std::vector<PrimitiveId> labels;
  std::vector<float> remission;
  rays.reserve(columns * beams);
  hits.reserve(columns * beams);
  labels.reserve(columns * beams);
  remission.reserve(columns * beams);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < columns; ++k) {
    const double azimuth = kTwoPi * static_cast<double>(k) / static_cast<double>(columns);
    const double phase = azimuth / kTwoPi;
    const Pose2 pose = spec.pose_at(scan_start + phase * cfg.scan_period);
    const Point3 origin{pose.x(), pose.y(), cfg.sensor_height};
    const double yaw = pose.theta() + sign * azimuth;
    const double cy = std::cos(yaw);
    const double sy = std::sin(yaw);
    for (std::size_t b = 0; b < beams; ++b) {
      const Point3 dir{cos_incl[b] * cy, cos_incl[b] * sy, sin_incl[b]};
      const auto hit = scene.raycast(origin, dir, cfg.max_range);
      double range = kNoReturn;
      if (hit) {
        range = hit->distance;
        if (noise.range_sigma > 0.0) {
          range = std::max(0.0, range + noise.range_sigma * range_noise(rng));
        }
        if (range > cfg.max_range) range = kNoReturn;
        hits.push_back(origin + hit->distance * dir);
        labels.push_back(hit->primitive);
        remission.push_back(hit->remission);
      } else {
        hits.push_back({nan, nan, nan});
        labels.push_back({});
        remission.push_back(0.0F);
      }
      rays.emplace_back(b, cfg.beam_inclinations[b], azimuth, range);
    }
  }

  return SimulatedScan{Scan(std::move(rays), scan_start, cfg), std::move(hits), std::move(labels),
                       std::move(remission), spec.pose_at(scan_start + cfg.scan_period)};
}

Scan simulate_scan(const Scene& scene, const TrajectorySpec& spec, double scan_start, const LidarConfig& cfg,
                   const NoiseSpec& noise) {
  return simulate_scan_with_truth(scene, spec, scan_start, cfg, noise).scan;
}

double coverage_analysis(const MotionIncrement& scan_increment, const LidarConfig& cfg) {
  return swept_world_angle(scan_increment, cfg.mirror_direction);
}

}  // namespace lidar_deskew
