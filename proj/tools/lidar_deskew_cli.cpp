// lidar-deskew: simulate scans, deskew them with wheel odometry and
// evaluate the result. Run without arguments for usage.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lidar_deskew/config.hpp"
#include "lidar_deskew/io.hpp"
#include "lidar_deskew/metrics.hpp"
#include "lidar_deskew/pipeline.hpp"

namespace fs = std::filesystem;
using namespace lidar_deskew;

namespace {

constexpr int kUsageExit = 2;
constexpr const char* kOutEnv = "LIDAR_DESKEW_OUT";

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

fs::path output_dir(const std::string& flag, const fs::path& fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutEnv); env != nullptr && *env != '\0') return env;
  return fallback;
}

struct IcpFlags {
  IcpParams params;
  bool full_3d = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--max-iterations", params.max_iterations, "ICP iteration cap")->capture_default_str();
    cmd->add_option("--eps", params.convergence_eps, "stop when the pose update is below this (m, rad)")
        ->capture_default_str();
    cmd->add_option("--max-dist", params.max_correspondence_distance, "correspondence rejection distance (m)")
        ->capture_default_str();
    cmd->add_option("--max-source-points", params.max_source_points, "decimate the source cloud (0 = all)")
        ->capture_default_str();
    cmd->add_flag("--full-3d", full_3d, "6-DoF alignment instead of planar");
  }

  IcpParams get() const {
    IcpParams p = params;
    p.planar = !full_3d;
    p.validate();
    return p;
  }
};

RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
  RunConfig cfg = load_run_config(path);
  if (seed) {
    cfg.seed = *seed;
    cfg.noise.seed = *seed;
  }
  cfg.validate();
  return cfg;
}

void print_evaluation(const EvaluationReport& report) {
  if (!report.icp.empty()) {
    std::cout << "icp mean_p2p raw " << num(report.mean_icp_raw()) << " corrected "
              << num(report.mean_icp_corrected()) << " (" << report.icp.size() << " pairs)\n";
  }
  for (const auto& o : report.occupancy) {
    std::cout << "occupied cells @" << num(o.cell_size) << " m raw " << o.raw << " corrected " << o.corrected
              << "\n";
  }
  if (!report.gt_error.empty()) {
    double raw = 0.0;
    double corrected = 0.0;
    for (const auto& g : report.gt_error) {
      raw += g.raw_rms;
      corrected += g.corrected_rms;
    }
    const auto n = static_cast<double>(report.gt_error.size());
    std::cout << "gt rms raw " << num(raw / n) << " corrected " << num(corrected / n) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiDAR scan deskewing with wheel odometry"};
  app.name("lidar-deskew");
  app.require_subcommand(1);
  app.footer(std::string("Environment: ") + kOutEnv + " sets the default output directory.");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "simulate scans, CAN odometry and ground-truth poses");
  std::string sim_config;
  std::string sim_out;
  std::optional<std::uint64_t> sim_seed;
  unsigned sim_jobs = 1;
  simulate->add_option("--config", sim_config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim_out, "output directory");
  simulate->add_option("--seed", sim_seed, "override the configured seed");
  simulate->add_option("--jobs", sim_jobs, "worker threads (0 = all cores)")->capture_default_str();

  // deskew
  auto* deskew = app.add_subcommand("deskew", "deskew scans with wheel odometry");
  std::string dk_scans;
  std::string dk_odom;
  std::string dk_poses;
  std::string dk_out;
  std::string dk_format = "ply";
  WheelConfig dk_wheel;
  unsigned dk_jobs = 1;
  deskew->add_option("--scans", dk_scans, "directory of scan files")->required()->check(CLI::ExistingDirectory);
  deskew->add_option("--odom", dk_odom, "odometry log")->required()->check(CLI::ExistingFile);
  deskew->add_option("--poses", dk_poses, "end-of-scan poses (CSV); dead reckoning if omitted")
      ->check(CLI::ExistingFile);
  deskew->add_option("--wheel-radius", dk_wheel.wheel_radius, "wheel radius (m)")->capture_default_str();
  deskew->add_option("--track", dk_wheel.track, "track width (m)")->capture_default_str();
  deskew->add_option("--out", dk_out, "output directory");
  deskew->add_option("--format", dk_format, "cloud format")->check(CLI::IsMember({"ply", "xyz"}))->capture_default_str();
  deskew->add_option("--jobs", dk_jobs, "worker threads (0 = all cores)")->capture_default_str();

  // icp
  auto* icp = app.add_subcommand("icp", "ICP of consecutive clouds (file i+1 onto file i)");
  std::vector<std::string> icp_files;
  std::string icp_out;
  IcpFlags icp_flags;
  icp->add_option("files", icp_files, "point clouds (.ply or xyz)")->required()->expected(2, -1)->check(
      CLI::ExistingFile);
  icp->add_option("--out", icp_out, "write the results table to this CSV");
  icp_flags.add_to(icp);

  // octree
  auto* octree = app.add_subcommand("octree", "occupied cell count of point clouds");
  std::vector<double> oct_cells{0.1};
  std::vector<std::string> oct_files;
  octree->add_option("--cell", oct_cells, "cell size (m), repeatable")->allow_extra_args(false)->capture_default_str();
  octree->add_option("files", oct_files, "point clouds")->required()->check(CLI::ExistingFile);

  // gt-error
  auto* gt = app.add_subcommand("gt-error", "point-to-surface error against a scene");
  std::string gt_scene;
  std::vector<std::string> gt_files;
  gt->add_option("--scene", gt_scene, "scene (JSON)")->required()->check(CLI::ExistingFile);
  gt->add_option("files", gt_files, "point clouds in the scene frame")->required()->check(CLI::ExistingFile);

  // report
  auto* report = app.add_subcommand("report", "metric tables and top-down plots for a deskew run");
  std::string rep_run;
  std::string rep_scene;
  std::string rep_out;
  std::vector<double> rep_cells{0.1};
  unsigned rep_jobs = 1;
  IcpFlags rep_icp;
  report->add_option("--run", rep_run, "directory written by deskew or pipeline")->required()->check(
      CLI::ExistingDirectory);
  report->add_option("--scene", rep_scene, "scene (JSON); default <run>/scene.json if present")->check(
      CLI::ExistingFile);
  report->add_option("--cell", rep_cells, "cell size (m), repeatable")->allow_extra_args(false)->capture_default_str();
  report->add_option("--out", rep_out, "output directory (default: the run directory)");
  report->add_option("--jobs", rep_jobs, "worker threads (0 = all cores)")->capture_default_str();
  rep_icp.add_to(report);

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "simulate, deskew and report in one go");
  std::string pl_config;
  std::string pl_out;
  std::optional<std::uint64_t> pl_seed;
  unsigned pl_jobs = 1;
  pipeline->add_option("--config", pl_config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  pipeline->add_option("--out", pl_out, "output directory");
  pipeline->add_option("--seed", pl_seed, "override the configured seed");
  pipeline->add_option("--jobs", pl_jobs, "worker threads (0 = all cores)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (argc > 1) std::cerr << "lidar-deskew: " << e.what() << "\n\n";
    const CLI::App* failed = &app;
    for (auto* sub : app.get_subcommands()) failed = sub;
    std::cerr << failed->help();
    return kUsageExit;
  }

  try {
    if (simulate->parsed()) {
      const auto cfg = load_config(sim_config, sim_seed);
      const fs::path out = output_dir(sim_out, cfg.output_dir);
      const auto sim = run_simulation(cfg, sim_jobs);
      write_simulation(sim, cfg.scene, out);
      std::cout << "wrote " << sim.scans.size() << " scans, " << sim.can_log.samples.size()
                << " odometry samples to " << out.string() << "\n";
    } else if (deskew->parsed()) {
      dk_wheel.validate();
      const auto scans = load_scans(dk_scans);
      const auto odom = parse_odometry_log(dk_odom).to_segment(dk_wheel);
      std::vector<ScanPose> poses;
      if (!dk_poses.empty()) poses = parse_scan_poses(dk_poses);
      const fs::path out = output_dir(dk_out, "out");
      const auto run = run_deskew(scans, odom, poses, dk_jobs);
      write_deskew_run(run, out, cloud_format_from_string(dk_format));
      for (std::size_t i = 0; i < run.reports.size(); ++i) {
        const auto& r = run.reports[i];
        std::cout << "scan " << i << " points " << r.num_points << " max_correction " << num(r.max_correction_displacement)
                  << " swept_angle " << num(r.swept_world_angle) << "\n";
      }
      std::cout << "wrote raw and corrected clouds to " << out.string() << "\n";
    } else if (icp->parsed()) {
      const auto params = icp_flags.get();
      std::vector<PointCloud> clouds;
      for (const auto& f : icp_files) clouds.push_back(read_point_cloud(f));
      std::vector<CsvRow> rows;
      std::cout << "source target mean_p2p iterations converged inliers\n";
      for (std::size_t i = 0; i + 1 < clouds.size(); ++i) {
        const auto r = icp_match(clouds[i + 1], clouds[i], Pose2{}, params);
        std::cout << icp_files[i + 1] << " " << icp_files[i] << " " << num(r.mean_p2p_error) << " " << r.iterations
                  << " " << (r.converged ? 1 : 0) << " " << r.num_inliers << "\n";
        if (!r.diagnostics.empty()) std::cerr << "warning: " << r.diagnostics << "\n";
        rows.push_back({icp_files[i + 1], icp_files[i], format_double(r.mean_p2p_error), std::to_string(r.iterations),
                        r.converged ? "1" : "0", std::to_string(r.num_inliers), format_double(r.relative_pose.x()),
                        format_double(r.relative_pose.y()), format_double(r.relative_pose.theta())});
      }
      if (!icp_out.empty()) {
        write_csv(icp_out, {"source", "target", "mean_p2p", "iterations", "converged", "inliers", "x", "y", "theta"},
                  rows);
      }
    } else if (octree->parsed()) {
      for (const auto& f : oct_files) {
        const auto cloud = read_point_cloud(f);
        for (double cell : oct_cells) {
          std::cout << f << " cell " << num(cell) << " occupied " << occupancy_count(cloud, cell).occupied_cells
                    << "\n";
        }
      }
    } else if (gt->parsed()) {
      const Scene scene = load_scene(gt_scene);
      for (const auto& f : gt_files) {
        const auto e = point_to_surface_error(read_point_cloud(f), scene);
        std::cout << f << " rms " << num(e.rms) << " max " << num(e.max) << " points " << e.per_point.size()
                  << "\n";
      }
    } else if (report->parsed()) {
      const fs::path run_dir = rep_run;
      std::optional<Scene> scene;
      if (!rep_scene.empty()) {
        scene = load_scene(rep_scene);
      } else if (fs::exists(run_dir / "scene.json")) {
        scene = load_scene(run_dir / "scene.json");
      }
      const fs::path out = rep_out.empty() ? run_dir : fs::path(rep_out);
      const auto stored = load_deskew_run(run_dir);
      const Scene* scene_ptr = scene ? &*scene : nullptr;
      const auto result = evaluate(stored.raw, stored.corrected, scene_ptr, rep_cells, rep_icp.get(), rep_jobs);
      write_evaluation(result, out);
      write_plots(stored.raw, stored.corrected, scene_ptr, out);
      print_evaluation(result);
    } else if (pipeline->parsed()) {
      const auto cfg = load_config(pl_config, pl_seed);
      const fs::path out = output_dir(pl_out, cfg.output_dir);
      print_evaluation(run_pipeline(cfg, out, pl_jobs));
      std::cout << "outputs in " << out.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "lidar-deskew: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
