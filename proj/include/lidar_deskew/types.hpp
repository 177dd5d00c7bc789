#pragma once

// Domain types and frame conventions shared by the whole toolkit.
//
// Frames:
//   * Sensor frame: x forward, y left, z up, origin at the LiDAR optical
//     centre. The sensor sits on the vehicle origin (no lever arm) at a
//     height `LidarConfig::sensor_height` above the ground.
//   * Azimuth alpha of a ray is the mirror angle travelled since scan start,
//     in [0, 2*pi). The geometric angle of the ray in the sensor frame is
//     mirror_sign(direction) * alpha.
//   * Corrected points are expressed in the sensor frame at scan END
//     (alpha = 2*pi), which is fixed with respect to the vehicle.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lidar_deskew {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle to (-pi, pi]. Throws std::invalid_argument on NaN/inf.
double normalize_angle(double theta);

enum class MirrorDirection { kCounterClockwise, kClockwise };

// Sign convention table, shared by the simulator and the deskewer.
//
//   mirror direction   | mirror_sign | vehicle yaw adds to sweep when
//   -------------------+-------------+-------------------------------
//   counter-clockwise  |     +1      | delta_theta > 0 (left turn)
//   clockwise          |     -1      | delta_theta < 0 (right turn)
//
// The world-frame angle swept by one revolution is
//   2*pi + mirror_sign * delta_theta_scan.
inline constexpr double mirror_sign(MirrorDirection dir) {
  return dir == MirrorDirection::kCounterClockwise ? 1.0 : -1.0;
}

std::string to_string(MirrorDirection dir);
MirrorDirection mirror_direction_from_string(const std::string& s);

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Point3 operator*(double s, const Point3& p) { return {s * p.x, s * p.y, s * p.z}; }
  friend bool operator==(const Point3&, const Point3&) = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double distance(const Point3& a, const Point3& b) { return (a - b).norm(); }

struct PointCloud {
  std::vector<Point3> points;
  /// Either empty or the same length as `points`.
  std::vector<float> remission;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_remission() const { return !remission.empty(); }

  /// Appends `other`; remission is kept only if both clouds carry it.
  void append(const PointCloud& other);
};

/// Planar pose (X, Y, heading). Heading is always stored in (-pi, pi].
class Pose2 {
 public:
  Pose2() = default;
  Pose2(double x, double y, double theta);

  double x() const { return x_; }
  double y() const { return y_; }
  double theta() const { return theta_; }

  /// this * other (apply `other` in this pose's frame).
  Pose2 compose(const Pose2& other) const;
  Pose2 inverse() const;
  /// Maps a point from this pose's local frame into the parent frame; z is untouched.
  Point3 transform(const Point3& p) const;

  bool is_identity() const { return x_ == 0.0 && y_ == 0.0 && theta_ == 0.0; }
  friend bool operator==(const Pose2&, const Pose2&) = default;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double theta_ = 0.0;
};

struct LidarConfig {
  double scan_period = 0.1;
  /// One inclination per beam (radians, strictly inside (-pi/2, pi/2)).
  std::vector<double> beam_inclinations;
  double azimuth_step = kTwoPi / 2048.0;
  MirrorDirection mirror_direction = MirrorDirection::kClockwise;
  double max_range = 120.0;
  double sensor_height = 1.9;

  std::size_t num_beams() const { return beam_inclinations.size(); }
  /// Number of azimuth columns in one revolution (2*pi / azimuth_step).
  std::size_t num_columns() const;

  /// Throws std::invalid_argument when an invariant does not hold.
  void validate() const;

  /// 10 Hz, 64 beams evenly spread over [-24.8 deg, +2 deg], clockwise mirror.
  static LidarConfig hdl64_like(std::size_t columns = 2048);
  static LidarConfig evenly_spaced(std::size_t beams, double min_inclination, double max_inclination,
                                   std::size_t columns, double scan_period);
};

inline constexpr double kNoReturn = -1.0;

struct Ray {
  std::size_t beam_index = 0;
  double inclination = 0.0;
  /// Mirror angle since scan start, in [0, 2*pi).
  double azimuth = 0.0;
  /// Measured range in metres, or kNoReturn.
  double range = kNoReturn;
  /// Fraction of the scan elapsed when the ray fired (azimuth / 2*pi).
  double phase = 0.0;

  Ray() = default;
  Ray(std::size_t beam, double inclination_rad, double azimuth_rad, double range_m);

  bool is_return() const { return range >= 0.0; }
  friend bool operator==(const Ray&, const Ray&) = default;
};

/// One mirror revolution. Construction validates the azimuth ordering
/// invariant and the ray fields; a malformed scan cannot exist.
class Scan {
 public:
  Scan(std::vector<Ray> rays, double start_time, LidarConfig config);

  const std::vector<Ray>& rays() const { return rays_; }
  double start_time() const { return start_time_; }
  double end_time() const { return start_time_ + config_.scan_period; }
  const LidarConfig& config() const { return config_; }

  std::size_t num_returns() const;
  /// Timestamp of a ray under the uniform-mirror-rate model.
  double ray_time(const Ray& ray) const { return start_time_ + config_.scan_period * ray.phase; }

 private:
  std::vector<Ray> rays_;
  double start_time_ = 0.0;
  LidarConfig config_;
};

struct WheelConfig {
  double wheel_radius = 0.3;
  double track = 1.5;

  void validate() const;
};

/// Wheel angle increments over `dt` seconds.
struct OdometrySample {
  double dt = 0.0;
  double delta_theta_right = 0.0;
  double delta_theta_left = 0.0;

  friend bool operator==(const OdometrySample&, const OdometrySample&) = default;
};

/// Planar motion over `dt`: signed arc length and signed heading change.
struct MotionIncrement {
  double delta_x = 0.0;
  double delta_theta = 0.0;
  double dt = 0.0;

  double linear_rate() const { return delta_x / dt; }
  /// Yaw rate. `delta_theta` itself is an increment, not a rate.
  double angular_rate() const { return delta_theta / dt; }

  friend bool operator==(const MotionIncrement&, const MotionIncrement&) = default;
};

}  // namespace lidar_deskew
