#pragma once

// End-to-end orchestration used by the CLI: simulate, deskew, evaluate and
// write everything to an output directory.
//
// Output layout (all under one directory):
//   scans/scan_0000.txt ...   simulated scans
//   can.log                   wheel odometry
//   poses.csv                 ground-truth end-of-scan poses
//   scene.json                the scene the scans were taken of
//   raw/scan_0000.<ext>       uncorrected scans, world frame
//   corrected/scan_0000.<ext> deskewed scans, world frame
//   raw_map.<ext>, corrected_map.<ext>
//   deskew_report.csv
//   icp.csv, occupancy.csv, gt_error.csv, summary.csv
//   map_topdown.svg, scan_topdown.svg

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "lidar_deskew/config.hpp"
#include "lidar_deskew/deskew.hpp"
#include "lidar_deskew/io.hpp"
#include "lidar_deskew/metrics.hpp"
#include "lidar_deskew/simulator.hpp"

namespace lidar_deskew {

/// 0 means one worker per hardware thread.
unsigned resolve_jobs(unsigned jobs);

/// Runs fn(0) ... fn(n - 1) on up to `jobs` threads. Rethrows the first
/// exception (lowest index) after all workers finish.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

struct SimulationOutput {
  std::vector<SimulatedScan> scans;
  CanLog can_log;
  std::vector<ScanPose> poses;
};

SimulationOutput run_simulation(const RunConfig& cfg, unsigned jobs = 1);
void write_simulation(const SimulationOutput& sim, const Scene& scene, const std::filesystem::path& dir);

/// All scans/scan_*.txt files of `dir` (or `dir` itself if it holds them),
/// in file name order.
std::vector<Scan> load_scans(const std::filesystem::path& dir);

/// Sensor frame at `end_pose` to world: lift by the sensor height, then apply the pose.
PointCloud to_world(const PointCloud& sensor_cloud, const Pose2& end_pose, double sensor_height);

/// Pose at time t from integrating the odometry sample by sample from the
/// identity at the segment start. Partial samples contribute proportionally.
Pose2 dead_reckon(const TrajectorySegment& odom, double t);
std::vector<ScanPose> dead_reckon_scan_poses(const std::vector<Scan>& scans, const TrajectorySegment& odom);

struct DeskewRun {
  std::vector<PointCloud> raw;
  std::vector<PointCloud> corrected;
  std::vector<DeskewReport> reports;
  std::vector<MotionIncrement> increments;
  std::vector<ScanPose> poses;
};

/// Deskews every scan with the odometry accrued over it and places raw and
/// corrected clouds in the world with `poses` (dead reckoning if empty).
DeskewRun run_deskew(const std::vector<Scan>& scans, const TrajectorySegment& odom, std::vector<ScanPose> poses,
                     unsigned jobs = 1);
void write_deskew_run(const DeskewRun& run, const std::filesystem::path& dir, CloudFormat format);

PointCloud merge(const std::vector<PointCloud>& clouds);

struct IcpPairRow {
  std::size_t source = 0;
  std::size_t target = 0;
  IcpResult raw;
  IcpResult corrected;
};

struct OccupancyRow {
  double cell_size = 0.0;
  std::size_t raw = 0;
  std::size_t corrected = 0;
};

struct GtErrorRow {
  std::size_t scan = 0;
  double raw_rms = 0.0;
  double raw_max = 0.0;
  double corrected_rms = 0.0;
  double corrected_max = 0.0;
};

struct EvaluationReport {
  std::vector<IcpPairRow> icp;
  std::vector<OccupancyRow> occupancy;
  std::vector<GtErrorRow> gt_error;

  double mean_icp_raw() const;
  double mean_icp_corrected() const;
};

/// ICP of every consecutive pair (scan i+1 onto scan i, identity start since
/// the clouds are already posed), occupancy of the merged maps per cell
/// size, and point-to-surface error per scan when a scene is given.
EvaluationReport evaluate(const std::vector<PointCloud>& raw, const std::vector<PointCloud>& corrected,
                          const Scene* scene, const std::vector<double>& cell_sizes, const IcpParams& icp,
                          unsigned jobs = 1);
void write_evaluation(const EvaluationReport& report, const std::filesystem::path& dir);

/// Top-down SVGs of the merged maps and of the first scan, raw in red and
/// corrected in cyan, ground truth in green.
void write_plots(const std::vector<PointCloud>& raw, const std::vector<PointCloud>& corrected, const Scene* scene,
                 const std::filesystem::path& dir);

/// Raw and corrected world clouds stored by write_deskew_run.
struct StoredRun {
  std::vector<PointCloud> raw;
  std::vector<PointCloud> corrected;
};
StoredRun load_deskew_run(const std::filesystem::path& dir);

/// simulate -> write -> deskew (CAN odometry, ground-truth poses) -> evaluate -> plots.
EvaluationReport run_pipeline(const RunConfig& cfg, const std::filesystem::path& out_dir, unsigned jobs = 1);

}  // namespace lidar_deskew
