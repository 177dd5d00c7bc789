#pragma once

// Map-quality metrics: scan-to-scan ICP residual, voxel occupancy
// compactness and ground-truth point-to-surface error.

#include <Eigen/Geometry>
#include <string>
#include <vector>

#include "lidar_deskew/scene.hpp"
#include "lidar_deskew/types.hpp"

namespace lidar_deskew {

struct IcpParams {
  int max_iterations = 50;
  /// Stop when the pose update moves less than this (metres, and radians).
  double convergence_eps = 1e-4;
  double max_correspondence_distance = 2.0;
  /// Restrict the alignment to (x, y, yaw). When false, full 6-DoF.
  bool planar = true;
  /// Uniformly decimate the source to at most this many points (0 = all).
  std::size_t max_source_points = 0;

  void validate() const;
};

struct IcpResult {
  /// Planar part of the estimated source-to-target transform.
  Pose2 relative_pose;
  Eigen::Isometry3d transform = Eigen::Isometry3d::Identity();
  /// Mean distance over the inlier correspondences at the final pose.
  double mean_p2p_error = 0.0;
  int iterations = 0;
  bool converged = false;
  std::size_t num_inliers = 0;
  std::string diagnostics;
};

/// Point-to-point ICP aligning `source` onto `target`, starting from `init`.
/// Throws std::invalid_argument if either cloud is empty.
IcpResult icp_match(const PointCloud& source, const PointCloud& target, const Pose2& init,
                    const IcpParams& params = {});

struct OccupancyResult {
  double cell_size = 0.0;
  std::size_t occupied_cells = 0;
};

/// Number of distinct cells (floor(x/s), floor(y/s), floor(z/s)) holding at
/// least one point. Equal to the leaf count of a fixed-depth octree.
OccupancyResult occupancy_count(const PointCloud& cloud, double cell_size);

struct SurfaceError {
  double rms = 0.0;
  double max = 0.0;
  std::vector<double> per_point;
};

SurfaceError point_to_surface_error(const PointCloud& cloud, const Scene& scene);

}  // namespace lidar_deskew
