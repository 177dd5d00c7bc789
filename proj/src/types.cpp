#include "lidar_deskew/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lidar_deskew {

double normalize_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("normalize_angle: non-finite angle");
  }
  if (theta > -std::numbers::pi && theta <= std::numbers::pi) {
    return theta;
  }
  // Shift to (0, 2pi] then back, so an exact -pi lands on +pi.
  double r = std::fmod(theta + std::numbers::pi, kTwoPi);
  if (r <= 0.0) {
    r += kTwoPi;
  }
  return r - std::numbers::pi;
}

std::string to_string(MirrorDirection dir) {
  return dir == MirrorDirection::kCounterClockwise ? "ccw" : "cw";
}

MirrorDirection mirror_direction_from_string(const std::string& s) {
  if (s == "ccw" || s == "counterclockwise") return MirrorDirection::kCounterClockwise;
  if (s == "cw" || s == "clockwise") return MirrorDirection::kClockwise;
  throw std::invalid_argument("unknown mirror direction '" + s + "' (expected cw or ccw)");
}

void PointCloud::append(const PointCloud& other) {
  const bool keep_remission = (has_remission() || empty()) && other.has_remission();
  points.insert(points.end(), other.points.begin(), other.points.end());
  if (keep_remission) {
    remission.insert(remission.end(), other.remission.begin(), other.remission.end());
  } else {
    remission.clear();
  }
}

Pose2::Pose2(double x, double y, double theta) : x_(x), y_(y), theta_(normalize_angle(theta)) {}

Pose2 Pose2::compose(const Pose2& other) const {
  const double c = std::cos(theta_);
  const double s = std::sin(theta_);
  return {x_ + c * other.x_ - s * other.y_, y_ + s * other.x_ + c * other.y_, theta_ + other.theta_};
}

Pose2 Pose2::inverse() const {
  const double c = std::cos(theta_);
  const double s = std::sin(theta_);
  return {-(c * x_ + s * y_), s * x_ - c * y_, -theta_};
}

Point3 Pose2::transform(const Point3& p) const {
  const double c = std::cos(theta_);
  const double s = std::sin(theta_);
  return {x_ + c * p.x - s * p.y, y_ + s * p.x + c * p.y, p.z};
}

std::size_t LidarConfig::num_columns() const {
  return static_cast<std::size_t>(std::llround(kTwoPi / azimuth_step));
}

void LidarConfig::validate() const {
  if (!(scan_period > 0.0) || !std::isfinite(scan_period)) {
    throw std::invalid_argument("lidar config: scan period must be > 0");
  }
  if (!(azimuth_step > 0.0) || !std::isfinite(azimuth_step)) {
    throw std::invalid_argument("lidar config: azimuth step must be > 0");
  }
  const double columns = kTwoPi / azimuth_step;
  if (std::abs(columns - std::round(columns)) * azimuth_step > 1e-9) {
    throw std::invalid_argument("lidar config: azimuth step must evenly divide 2*pi");
  }
  if (beam_inclinations.empty()) {
    throw std::invalid_argument("lidar config: at least one beam is required");
  }
  for (double w : beam_inclinations) {
    if (!(std::abs(w) < std::numbers::pi / 2.0)) {
      throw std::invalid_argument("lidar config: beam inclination outside (-pi/2, pi/2)");
    }
  }
  if (!(max_range > 0.0)) {
    throw std::invalid_argument("lidar config: max range must be > 0");
  }
  if (!std::isfinite(sensor_height)) {
    throw std::invalid_argument("lidar config: sensor height must be finite");
  }
}

LidarConfig LidarConfig::evenly_spaced(std::size_t beams, double min_inclination, double max_inclination,
                                       std::size_t columns, double scan_period) {
  LidarConfig cfg;
  cfg.scan_period = scan_period;
  cfg.azimuth_step = kTwoPi / static_cast<double>(columns);
  cfg.beam_inclinations.resize(beams);
  for (std::size_t i = 0; i < beams; ++i) {
    const double t = beams == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(beams - 1);
    cfg.beam_inclinations[i] = min_inclination + t * (max_inclination - min_inclination);
  }
  return cfg;
}

LidarConfig LidarConfig::hdl64_like(std::size_t columns) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  LidarConfig cfg = evenly_spaced(64, -24.8 * kDeg, 2.0 * kDeg, columns, 0.1);
  cfg.mirror_direction = MirrorDirection::kClockwise;
  cfg.max_range = 120.0;
  cfg.sensor_height = 1.9;
  return cfg;
}

Ray::Ray(std::size_t beam, double inclination_rad, double azimuth_rad, double range_m)
    : beam_index(beam),
      inclination(inclination_rad),
      azimuth(azimuth_rad),
      range(range_m),
      phase(azimuth_rad / kTwoPi) {}

namespace {

[[noreturn]] void scan_error(std::size_t index, const std::string& what) {
  std::ostringstream os;
  os << "invalid scan: ray " << index << ": " << what;
  throw std::invalid_argument(os.str());
}

}  // namespace

Scan::Scan(std::vector<Ray> rays, double start_time, LidarConfig config)
    : rays_(std::move(rays)), start_time_(start_time), config_(std::move(config)) {
  config_.validate();
  if (!std::isfinite(start_time_)) {
    throw std::invalid_argument("invalid scan: non-finite start time");
  }
  if (rays_.empty()) {
    throw std::invalid_argument("empty scan");
  }
  double previous = 0.0;
  for (std::size_t i = 0; i < rays_.size(); ++i) {
    const Ray& r = rays_[i];
    if (!(r.azimuth >= 0.0 && r.azimuth < kTwoPi)) scan_error(i, "azimuth outside [0, 2pi)");
    if (r.azimuth < previous) scan_error(i, "azimuth regression");
    previous = r.azimuth;
    if (r.beam_index >= config_.num_beams()) scan_error(i, "beam index out of range");
    if (!(std::abs(r.inclination) < std::numbers::pi / 2.0)) scan_error(i, "inclination outside (-pi/2, pi/2)");
    if (std::abs(r.phase - r.azimuth / kTwoPi) > 1e-12) scan_error(i, "phase inconsistent with azimuth");
    if (!std::isfinite(r.range)) scan_error(i, "non-finite range");
    if (r.range < 0.0 && r.range != kNoReturn) scan_error(i, "negative range other than the no-return sentinel");
    if (r.range > config_.max_range) scan_error(i, "range beyond max range");
  }
}

std::size_t Scan::num_returns() const {
  return static_cast<std::size_t>(std::count_if(rays_.begin(), rays_.end(), [](const Ray& r) { return r.is_return(); }));
}

void WheelConfig::validate() const {
  if (!(wheel_radius > 0.0) || !std::isfinite(wheel_radius)) {
    throw std::invalid_argument("wheel config: wheel radius must be > 0");
  }
  if (!(track > 0.0) || !std::isfinite(track)) {
    throw std::invalid_argument("wheel config: track must be > 0");
  }
}

}  // namespace lidar_deskew
