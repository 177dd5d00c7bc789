#include "lidar_deskew/metrics.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "lidar_deskew/kdtree.hpp"

namespace lidar_deskew {
namespace {

Eigen::Vector3d to_eigen(const Point3& p) { return {p.x, p.y, p.z}; }
Point3 to_point(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

Eigen::Isometry3d to_isometry(const Pose2& pose) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = Eigen::AngleAxisd(pose.theta(), Eigen::Vector3d::UnitZ()).toRotationMatrix();
  t.translation() = Eigen::Vector3d(pose.x(), pose.y(), 0.0);
  return t;
}

Pose2 to_pose2(const Eigen::Isometry3d& t) {
  const Eigen::Matrix3d r = t.linear();
  return {t.translation().x(), t.translation().y(), std::atan2(r(1, 0), r(0, 0))};
}

struct Pairs {
  std::vector<Eigen::Vector3d> source;
  std::vector<Eigen::Vector3d> target;
  double sum_distance = 0.0;
};

Pairs correspond(const std::vector<Eigen::Vector3d>& source, const KdTree& tree, const Eigen::Isometry3d& pose,
                 double max_distance) {
  Pairs pairs;
  pairs.source.reserve(source.size());
  pairs.target.reserve(source.size());
  for (const auto& s : source) {
    const Eigen::Vector3d moved = pose * s;
    if (const auto nn = tree.nearest(to_point(moved), max_distance)) {
      pairs.source.push_back(s);
      pairs.target.push_back(to_eigen(tree.point(nn->index)));
      pairs.sum_distance += std::sqrt(nn->squared_distance);
    }
  }
  return pairs;
}

// Closed-form least-squares rigid transform mapping pairs.source onto pairs.target.
Eigen::Isometry3d align(const Pairs& pairs, bool planar) {
  const double n = static_cast<double>(pairs.source.size());
  Eigen::Vector3d cs = Eigen::Vector3d::Zero();
  Eigen::Vector3d ct = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < pairs.source.size(); ++i) {
    cs += pairs.source[i];
    ct += pairs.target[i];
  }
  cs /= n;
  ct /= n;

  Eigen::Isometry3d out = Eigen::Isometry3d::Identity();
  if (planar) {
    double dot = 0.0;
    double cross = 0.0;
    for (std::size_t i = 0; i < pairs.source.size(); ++i) {
      const Eigen::Vector3d a = pairs.source[i] - cs;
      const Eigen::Vector3d b = pairs.target[i] - ct;
      dot += a.x() * b.x() + a.y() * b.y();
      cross += a.x() * b.y() - a.y() * b.x();
    }
    const double yaw = std::atan2(cross, dot);
    out.linear() = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    Eigen::Vector3d t = ct - out.linear() * cs;
    t.z() = 0.0;
    out.translation() = t;
    return out;
  }

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < pairs.source.size(); ++i) {
    h += (pairs.source[i] - cs) * (pairs.target[i] - ct).transpose();
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) {
    d(2, 2) = -1.0;  // reflection guard
  }
  out.linear() = svd.matrixV() * d * svd.matrixU().transpose();
  out.translation() = ct - out.linear() * cs;
  return out;
}

struct CellKey {
  std::int64_t x, y, z;
  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    // Large-prime spatial hash.
    return static_cast<std::size_t>(k.x * 73856093LL) ^ static_cast<std::size_t>(k.y * 19349663LL) ^
           static_cast<std::size_t>(k.z * 83492791LL);
  }
};

}  // namespace

void IcpParams::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("icp: max_iterations must be >= 1");
  if (!(convergence_eps > 0.0)) throw std::invalid_argument("icp: convergence_eps must be > 0");
  if (!(max_correspondence_distance > 0.0)) throw std::invalid_argument("icp: max_correspondence_distance must be > 0");
}

IcpResult icp_match(const PointCloud& source, const PointCloud& target, const Pose2& init, const IcpParams& params) {
  params.validate();
  if (source.empty() || target.empty()) {
    throw std::invalid_argument("icp_match: source and target must be non-empty");
  }

  std::vector<Eigen::Vector3d> src;
  const std::size_t stride = params.max_source_points > 0 && source.size() > params.max_source_points
                                 ? (source.size() + params.max_source_points - 1) / params.max_source_points
                                 : 1;
  src.reserve(source.size() / stride + 1);
  for (std::size_t i = 0; i < source.size(); i += stride) src.push_back(to_eigen(source.points[i]));

  const KdTree tree(target.points);
  IcpResult result;
  Eigen::Isometry3d pose = to_isometry(init);

  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    const Pairs pairs = correspond(src, tree, pose, params.max_correspondence_distance);
    result.iterations = iter;
    if (pairs.source.empty()) {
      std::ostringstream os;
      os << "no correspondences within " << params.max_correspondence_distance << " m at iteration " << iter;
      result.diagnostics = os.str();
      result.converged = false;
      result.transform = pose;
      result.relative_pose = to_pose2(pose);
      result.num_inliers = 0;
      result.mean_p2p_error = 0.0;
      return result;
    }
    const Eigen::Isometry3d next = align(pairs, params.planar);
    const Eigen::Isometry3d step = next * pose.inverse();
    const double moved = step.translation().norm();
    const double turned = Eigen::AngleAxisd(step.linear()).angle();
    pose = next;
    if (moved < params.convergence_eps && turned < params.convergence_eps) {
      result.converged = true;
      break;
    }
  }

  const Pairs final_pairs = correspond(src, tree, pose, params.max_correspondence_distance);
  result.transform = pose;
  result.relative_pose = to_pose2(pose);
  result.num_inliers = final_pairs.source.size();
  if (final_pairs.source.empty()) {
    result.converged = false;
    result.diagnostics = "no correspondences at the final pose";
  } else {
    result.mean_p2p_error = final_pairs.sum_distance / static_cast<double>(final_pairs.source.size());
    if (!result.converged) result.diagnostics = "iteration cap reached";
  }
  return result;
}

OccupancyResult occupancy_count(const PointCloud& cloud, double cell_size) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw std::invalid_argument("occupancy_count: cell size must be > 0");
  }
  std::unordered_set<CellKey, CellKeyHash> cells;
  cells.reserve(cloud.size());
  for (const auto& p : cloud.points) {
    cells.insert({static_cast<std::int64_t>(std::floor(p.x / cell_size)),
                  static_cast<std::int64_t>(std::floor(p.y / cell_size)),
                  static_cast<std::int64_t>(std::floor(p.z / cell_size))});
  }
  return {cell_size, cells.size()};
}

SurfaceError point_to_surface_error(const PointCloud& cloud, const Scene& scene) {
  if (scene.empty()) {
    throw std::invalid_argument("point_to_surface_error: scene is empty");
  }
  SurfaceError out;
  out.per_point.reserve(cloud.size());
  double sum_sq = 0.0;
  for (const auto& p : cloud.points) {
    const double d = scene.distance_to_surface(p);
    out.per_point.push_back(d);
    sum_sq += d * d;
    out.max = std::max(out.max, d);
  }
  if (!cloud.empty()) {
    out.rms = std::sqrt(sum_sq / static_cast<double>(cloud.size()));
  }
  return out;
}

}  // namespace lidar_deskew
