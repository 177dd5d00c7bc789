#include "lidar_deskew/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <optional>
#include <stdexcept>
#include <thread>

#include "lidar_deskew/svg.hpp"

namespace lidar_deskew {
namespace fs = std::filesystem;

namespace {

std::string numbered(const char* stem, std::size_t i, const std::string& ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04zu", stem, i);
  return std::string(buf) + ext;
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::vector<std::string>& extensions) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: '" + dir.string() + "'");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (std::find(extensions.begin(), extensions.end(), ext) != extensions.end()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string yes_no(bool b) { return b ? "1" : "0"; }

double mean_of(const std::vector<IcpPairRow>& rows, bool corrected) {
  if (rows.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : rows) sum += corrected ? r.corrected.mean_p2p_error : r.raw.mean_p2p_error;
  return sum / static_cast<double>(rows.size());
}

}  // namespace

unsigned resolve_jobs(unsigned jobs) {
  if (jobs > 0) return jobs;
  return std::max(1U, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(resolve_jobs(jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work);
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

SimulationOutput run_simulation(const RunConfig& cfg, unsigned jobs) {
  cfg.validate();
  std::vector<std::optional<SimulatedScan>> scans(cfg.num_scans);
  parallel_for(cfg.num_scans, jobs, [&](std::size_t i) {
    const double start = cfg.first_scan_start + static_cast<double>(i) * cfg.lidar.scan_period;
    scans[i] = simulate_scan_with_truth(cfg.scene, cfg.trajectory, start, cfg.lidar, cfg.noise);
  });
  SimulationOutput out;
  for (std::size_t i = 0; i < scans.size(); ++i) {
    const Scan& scan = scans[i]->scan;
    out.poses.push_back({i, scan.start_time(), scan.end_time(), scans[i]->end_pose});
    out.scans.push_back(std::move(*scans[i]));
  }
  out.can_log = emit_can_log(cfg.trajectory, cfg.wheel, cfg.can_rate_hz, cfg.noise);
  return out;
}

void write_simulation(const SimulationOutput& sim, const Scene& scene, const fs::path& dir) {
  for (std::size_t i = 0; i < sim.scans.size(); ++i) {
    write_scan_file(sim.scans[i].scan, dir / "scans" / numbered("scan", i, ".txt"));
  }
  write_odometry_log_file(sim.can_log, dir / "can.log");
  write_scan_poses(sim.poses, dir / "poses.csv");
  auto out = open_output(dir / "scene.json");
  out << scene_to_json(scene);
}

std::vector<Scan> load_scans(const fs::path& dir) {
  const fs::path source = fs::is_directory(dir / "scans") ? dir / "scans" : dir;
  std::vector<Scan> scans;
  for (const auto& file : sorted_files(source, {".txt"})) scans.push_back(parse_scan_file(file));
  if (scans.empty()) throw std::runtime_error("no scan files (*.txt) in '" + source.string() + "'");
  return scans;
}

PointCloud to_world(const PointCloud& sensor_cloud, const Pose2& end_pose, double sensor_height) {
  PointCloud out;
  out.points.reserve(sensor_cloud.size());
  for (const auto& p : sensor_cloud.points) out.points.push_back(end_pose.transform({p.x, p.y, p.z + sensor_height}));
  out.remission = sensor_cloud.remission;
  return out;
}

Pose2 dead_reckon(const TrajectorySegment& odom, double t) {
  if (odom.empty()) throw std::invalid_argument("dead_reckon: empty odometry");
  const double tol = TrajectorySegment::kGapTolerance;
  if (t < odom.start_time() - tol || t > odom.end_time() + tol) {
    throw std::out_of_range("dead_reckon: time " + format_double(t) + " outside odometry [" +
                            format_double(odom.start_time()) + ", " + format_double(odom.end_time()) + "]");
  }
  Pose2 pose;
  for (const auto& s : odom.samples()) {
    if (s.end_time() <= t) {
      pose = integrate_pose(pose, s.increment);
      continue;
    }
    if (s.start_time < t) {
      const double f = (t - s.start_time) / s.increment.dt;
      pose = integrate_pose(pose, {f * s.increment.delta_x, f * s.increment.delta_theta, f * s.increment.dt});
    }
    break;
  }
  return pose;
}

std::vector<ScanPose> dead_reckon_scan_poses(const std::vector<Scan>& scans, const TrajectorySegment& odom) {
  std::vector<ScanPose> poses;
  poses.reserve(scans.size());
  for (std::size_t i = 0; i < scans.size(); ++i) {
    poses.push_back({i, scans[i].start_time(), scans[i].end_time(), dead_reckon(odom, scans[i].end_time())});
  }
  return poses;
}

DeskewRun run_deskew(const std::vector<Scan>& scans, const TrajectorySegment& odom, std::vector<ScanPose> poses,
                     unsigned jobs) {
  if (poses.empty()) {
    poses = dead_reckon_scan_poses(scans, odom);
  } else if (poses.size() != scans.size()) {
    throw std::invalid_argument("run_deskew: " + std::to_string(poses.size()) + " poses for " +
                                std::to_string(scans.size()) + " scans");
  }
  for (std::size_t i = 0; i < scans.size(); ++i) {
    if (std::abs(poses[i].end_time - scans[i].end_time()) > kScanTimeTolerance) {
      throw std::invalid_argument("run_deskew: pose " + std::to_string(i) + " ends at " +
                                  format_double(poses[i].end_time) + " but its scan ends at " +
                                  format_double(scans[i].end_time()));
    }
  }

  DeskewRun run;
  run.raw.resize(scans.size());
  run.corrected.resize(scans.size());
  run.reports.resize(scans.size());
  run.increments.resize(scans.size());
  parallel_for(scans.size(), jobs, [&](std::size_t i) {
    const Scan& scan = scans[i];
    const double h = scan.config().sensor_height;
    const Pose2& end = poses[i].end_pose;
    run.increments[i] = accumulate_increment(odom, scan.start_time(), scan.end_time());
    auto result = deskew_scan(scan, run.increments[i]);
    run.reports[i] = result.report;
    run.raw[i] = to_world(raw_cloud(scan), end, h);
    run.corrected[i] = to_world(result.cloud, end, h);
  });
  run.poses = std::move(poses);
  return run;
}

PointCloud merge(const std::vector<PointCloud>& clouds) {
  PointCloud out;
  std::size_t total = 0;
  for (const auto& c : clouds) total += c.size();
  out.points.reserve(total);
  bool first = true;
  for (const auto& c : clouds) {
    if (first) {
      out = c;
      out.points.reserve(total);
      first = false;
    } else {
      out.append(c);
    }
  }
  return out;
}

void write_deskew_run(const DeskewRun& run, const fs::path& dir, CloudFormat format) {
  const std::string ext = extension_of(format);
  for (std::size_t i = 0; i < run.raw.size(); ++i) {
    write_point_cloud(run.raw[i], dir / "raw" / numbered("scan", i, ext), format);
    write_point_cloud(run.corrected[i], dir / "corrected" / numbered("scan", i, ext), format);
  }
  write_point_cloud(merge(run.raw), dir / ("raw_map" + ext), format);
  write_point_cloud(merge(run.corrected), dir / ("corrected_map" + ext), format);

  std::vector<CsvRow> rows;
  for (std::size_t i = 0; i < run.reports.size(); ++i) {
    const auto& r = run.reports[i];
    const auto& inc = run.increments[i];
    rows.push_back({std::to_string(i), format_double(run.poses[i].start_time), format_double(run.poses[i].end_time),
                    format_double(inc.delta_x), format_double(inc.delta_theta), std::to_string(r.num_rays),
                    std::to_string(r.num_points), format_double(r.max_correction_displacement),
                    format_double(r.swept_world_angle)});
  }
  write_csv(dir / "deskew_report.csv",
            {"scan", "start_time", "end_time", "delta_x", "delta_theta", "num_rays", "num_points",
             "max_correction_displacement", "swept_world_angle"},
            rows);
  write_scan_poses(run.poses, dir / "deskew_poses.csv");
}

double EvaluationReport::mean_icp_raw() const { return mean_of(icp, false); }
double EvaluationReport::mean_icp_corrected() const { return mean_of(icp, true); }

EvaluationReport evaluate(const std::vector<PointCloud>& raw, const std::vector<PointCloud>& corrected,
                          const Scene* scene, const std::vector<double>& cell_sizes, const IcpParams& icp,
                          unsigned jobs) {
  if (raw.size() != corrected.size()) {
    throw std::invalid_argument("evaluate: " + std::to_string(raw.size()) + " raw clouds but " +
                                std::to_string(corrected.size()) + " corrected");
  }
  icp.validate();
  EvaluationReport report;

  const std::size_t pairs = raw.size() > 1 ? raw.size() - 1 : 0;
  report.icp.resize(pairs);
  parallel_for(pairs, jobs, [&](std::size_t i) {
    auto& row = report.icp[i];
    row.source = i + 1;
    row.target = i;
    row.raw = icp_match(raw[i + 1], raw[i], Pose2{}, icp);
    row.corrected = icp_match(corrected[i + 1], corrected[i], Pose2{}, icp);
  });

  if (!cell_sizes.empty()) {
    const PointCloud raw_map = merge(raw);
    const PointCloud corrected_map = merge(corrected);
    for (double cell : cell_sizes) {
      report.occupancy.push_back({cell, occupancy_count(raw_map, cell).occupied_cells,
                                  occupancy_count(corrected_map, cell).occupied_cells});
    }
  }

  if (scene != nullptr && !scene->empty()) {
    report.gt_error.resize(raw.size());
    parallel_for(raw.size(), jobs, [&](std::size_t i) {
      const auto r = point_to_surface_error(raw[i], *scene);
      const auto c = point_to_surface_error(corrected[i], *scene);
      report.gt_error[i] = {i, r.rms, r.max, c.rms, c.max};
    });
  }
  return report;
}

void write_evaluation(const EvaluationReport& report, const fs::path& dir) {
  std::vector<CsvRow> icp_rows;
  for (const auto& r : report.icp) {
    icp_rows.push_back({std::to_string(r.source), std::to_string(r.target), format_double(r.raw.mean_p2p_error),
                        std::to_string(r.raw.iterations), yes_no(r.raw.converged), std::to_string(r.raw.num_inliers),
                        format_double(r.corrected.mean_p2p_error), std::to_string(r.corrected.iterations),
                        yes_no(r.corrected.converged), std::to_string(r.corrected.num_inliers)});
  }
  write_csv(dir / "icp.csv",
            {"source", "target", "raw_mean_p2p", "raw_iterations", "raw_converged", "raw_inliers",
             "corrected_mean_p2p", "corrected_iterations", "corrected_converged", "corrected_inliers"},
            icp_rows);

  std::vector<CsvRow> occ_rows;
  for (const auto& r : report.occupancy) {
    const double reduction =
        r.raw > 0 ? 1.0 - static_cast<double>(r.corrected) / static_cast<double>(r.raw) : 0.0;
    occ_rows.push_back({format_double(r.cell_size), std::to_string(r.raw), std::to_string(r.corrected),
                        format_double(reduction)});
  }
  write_csv(dir / "occupancy.csv", {"cell_size", "raw", "corrected", "reduction"}, occ_rows);

  std::vector<CsvRow> gt_rows;
  double raw_rms = 0.0;
  double corrected_rms = 0.0;
  for (const auto& r : report.gt_error) {
    gt_rows.push_back({std::to_string(r.scan), format_double(r.raw_rms), format_double(r.raw_max),
                       format_double(r.corrected_rms), format_double(r.corrected_max)});
    raw_rms += r.raw_rms;
    corrected_rms += r.corrected_rms;
  }
  if (!report.gt_error.empty()) {
    write_csv(dir / "gt_error.csv", {"scan", "raw_rms", "raw_max", "corrected_rms", "corrected_max"}, gt_rows);
  }

  std::vector<CsvRow> summary;
  if (!report.icp.empty()) {
    summary.push_back({"icp_mean_p2p", format_double(report.mean_icp_raw()), format_double(report.mean_icp_corrected())});
  }
  for (const auto& r : report.occupancy) {
    summary.push_back({"occupied_cells@" + format_double(r.cell_size), std::to_string(r.raw),
                       std::to_string(r.corrected)});
  }
  if (!report.gt_error.empty()) {
    const auto n = static_cast<double>(report.gt_error.size());
    summary.push_back({"gt_rms_mean", format_double(raw_rms / n), format_double(corrected_rms / n)});
  }
  write_csv(dir / "summary.csv", {"metric", "raw", "corrected"}, summary);
}

void write_plots(const std::vector<PointCloud>& raw, const std::vector<PointCloud>& corrected, const Scene* scene,
                 const fs::path& dir) {
  if (raw.empty()) return;
  const PointCloud raw_map = merge(raw);
  const PointCloud corrected_map = merge(corrected);
  write_topdown_svg(dir / "map_topdown.svg", {{"raw", "red", &raw_map}, {"corrected", "cyan", &corrected_map}},
                    "merged map", scene);
  write_topdown_svg(dir / "scan_topdown.svg", {{"raw", "red", &raw.front()}, {"corrected", "cyan", &corrected.front()}},
                    "first scan", scene);
}

StoredRun load_deskew_run(const fs::path& dir) {
  const std::vector<std::string> exts{".ply", ".xyz", ".txt"};
  StoredRun run;
  for (const auto& f : sorted_files(dir / "raw", exts)) run.raw.push_back(read_point_cloud(f));
  for (const auto& f : sorted_files(dir / "corrected", exts)) run.corrected.push_back(read_point_cloud(f));
  if (run.raw.empty()) throw std::runtime_error("no clouds in '" + (dir / "raw").string() + "'");
  if (run.raw.size() != run.corrected.size()) {
    throw std::runtime_error("'" + dir.string() + "' holds " + std::to_string(run.raw.size()) + " raw but " +
                             std::to_string(run.corrected.size()) + " corrected clouds");
  }
  return run;
}

EvaluationReport run_pipeline(const RunConfig& cfg, const fs::path& out_dir, unsigned jobs) {
  const auto sim = run_simulation(cfg, jobs);
  write_simulation(sim, cfg.scene, out_dir);

  std::vector<Scan> scans;
  scans.reserve(sim.scans.size());
  for (const auto& s : sim.scans) scans.push_back(s.scan);
  const auto run = run_deskew(scans, sim.can_log.to_segment(cfg.wheel), sim.poses, jobs);
  write_deskew_run(run, out_dir, cfg.cloud_format);

  auto report = evaluate(run.raw, run.corrected, &cfg.scene, cfg.cell_sizes, cfg.icp, jobs);
  write_evaluation(report, out_dir);
  write_plots(run.raw, run.corrected, &cfg.scene, out_dir);
  return report;
}

}  // namespace lidar_deskew
