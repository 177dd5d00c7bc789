#include "lidar_deskew/deskew.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lidar_deskew {

Point3 ray_to_point(const Ray& ray, MirrorDirection dir) {
  const double alpha = mirror_sign(dir) * ray.azimuth;
  const double horizontal = ray.range * std::cos(ray.inclination);
  return {horizontal * std::cos(alpha), horizontal * std::sin(alpha), ray.range * std::sin(ray.inclination)};
}

Point3 correct_point(const Ray& ray, const Pose2& pose, MirrorDirection dir) {
  const Point3 p = ray_to_point(ray, dir);
  if (pose.is_identity()) {
    return p;
  }
  return pose.transform(p);
}

double swept_world_angle(const MotionIncrement& scan_increment, MirrorDirection dir) {
  return kTwoPi + mirror_sign(dir) * scan_increment.delta_theta;
}

PointCloud raw_cloud(const Scan& scan) {
  const auto dir = scan.config().mirror_direction;
  PointCloud cloud;
  cloud.points.reserve(scan.rays().size());
  for (const Ray& ray : scan.rays()) {
    if (ray.is_return()) cloud.points.push_back(ray_to_point(ray, dir));
  }
  return cloud;
}

DeskewResult deskew_scan(const Scan& scan, const MotionIncrement& scan_increment) {
  if (std::abs(scan_increment.dt - scan.config().scan_period) > kScanTimeTolerance) {
    std::ostringstream os;
    os << "deskew_scan: increment spans " << scan_increment.dt << " s but the scan period is "
       << scan.config().scan_period << " s";
    throw std::invalid_argument(os.str());
  }
  const auto dir = scan.config().mirror_direction;

  DeskewResult result;
  result.report.num_rays = scan.rays().size();
  result.report.swept_world_angle = swept_world_angle(scan_increment, dir);
  result.cloud.points.reserve(scan.rays().size());

  // Rays of one firing column share a phase, hence a pose.
  double column_phase = -1.0;
  Pose2 column_pose;
  for (const Ray& ray : scan.rays()) {
    if (!ray.is_return()) continue;
    if (ray.phase != column_phase) {
      column_phase = ray.phase;
      column_pose = pose_at_phase(scan_increment, ray.phase);
    }
    const Point3 corrected = correct_point(ray, column_pose, dir);
    const double moved = distance(corrected, ray_to_point(ray, dir));
    result.report.max_correction_displacement = std::max(result.report.max_correction_displacement, moved);
    result.cloud.points.push_back(corrected);
  }
  result.report.num_points = result.cloud.points.size();
  return result;
}

}  // namespace lidar_deskew
