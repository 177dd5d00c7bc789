// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "lidar_deskew/config.hpp"
#include "lidar_deskew/deskew.hpp"
#include "lidar_deskew/metrics.hpp"
#include "lidar_deskew/odometry.hpp"
#include "lidar_deskew/pipeline.hpp"
#include "lidar_deskew/simulator.hpp"
#include "support.hpp"

using namespace lidar_deskew;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

fs::path configs_dir() { return LIDAR_DESKEW_CONFIGS; }

double horizontal_distance(const Point3& a, const Point3& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Simulated scan plus its deskewed and raw clouds, both in the world frame,
/// with the ray index of every returned point.
struct Processed {
  SimulatedScan sim;
  MotionIncrement increment;
  PointCloud raw_sensor;
  PointCloud corrected_sensor;
  PointCloud raw_world;
  PointCloud corrected_world;
  std::vector<std::size_t> ray_of_point;
};

Processed process(const Scene& scene, const TrajectorySpec& spec, double start, const LidarConfig& lidar,
                  const NoiseSpec& noise, const WheelConfig& wheel = {}) {
  NoiseSpec can_noise;
  const auto odom = emit_can_log(spec, wheel, 100.0, can_noise).to_segment(wheel);
  Processed p{simulate_scan_with_truth(scene, spec, start, lidar, noise), {}, {}, {}, {}, {}, {}};
  p.increment = accumulate_increment(odom, p.sim.scan.start_time(), p.sim.scan.end_time());
  p.raw_sensor = raw_cloud(p.sim.scan);
  p.corrected_sensor = deskew_scan(p.sim.scan, p.increment).cloud;
  p.raw_world = to_world(p.raw_sensor, p.sim.end_pose, lidar.sensor_height);
  p.corrected_world = to_world(p.corrected_sensor, p.sim.end_pose, lidar.sensor_height);
  const auto& rays = p.sim.scan.rays();
  for (std::size_t i = 0; i < rays.size(); ++i) {
    if (rays[i].is_return()) p.ray_of_point.push_back(i);
  }
  return p;
}

LidarConfig flat_lidar() {
  LidarConfig cfg;
  cfg.beam_inclinations = {0.0};
  return cfg;
}

Scene wall_scene(double x, double half_width, double height) {
  Scene s;
  s.fences.push_back({x, -half_width, x, half_width, height});
  return s;
}

/// Largest and mean raw-to-corrected displacement over the scan-start rays.
std::pair<double, double> scan_start_displacement(const Processed& p) {
  double max = 0.0;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < p.ray_of_point.size(); ++k) {
    if (p.sim.scan.rays()[p.ray_of_point[k]].phase != 0.0) continue;
    const double d = (p.corrected_sensor.points[k] - p.raw_sensor.points[k]).norm();
    max = std::max(max, d);
    sum += d;
    ++n;
  }
  return {max, n > 0 ? sum / static_cast<double>(n) : -1.0};
}

Outcome translation_gap() {
  TrajectorySpec spec;
  spec.kind = LinearMotion{50.0 / 3.6};
  spec.duration = 0.2;
  NoiseSpec noise;
  noise.range_sigma = 0.01;
  noise.seed = 1;
  const auto p = process(wall_scene(30.0, 30.0, 10.0), spec, 0.0, LidarConfig::hdl64_like(), noise);
  const auto [max, mean] = scan_start_displacement(p);
  return {std::abs(mean - 1.389) <= 0.01 && std::abs(max - 1.389) <= 0.01,
          fmt("scan-start displacement %.4f m (max %.4f), expected 1.389 +/- 0.01", mean, max)};
}

Outcome rotation_gap() {
  TrajectorySpec spec;
  spec.kind = ArcMotion{0.0, 25.0 * kDeg};
  spec.duration = 0.2;
  const auto p = process(wall_scene(50.0, 20.0, 5.0), spec, 0.0, flat_lidar(), NoiseSpec{});
  const auto& first = p.raw_sensor.points.front();
  const double range = std::hypot(first.x, first.y);
  const auto [max, mean] = scan_start_displacement(p);
  return {std::abs(mean - 2.18) <= 0.02 && std::abs(range - 50.0) < 1e-9,
          fmt("displacement of the %.2f m scan-start point %.4f m, expected 2.18 +/- 0.02", range, mean)};
}

Outcome post_centroid() {
  Scene scene;
  scene.posts = {{10.05, -0.45, 0.15, 3.0}, {14.05, 4.55, 0.15, 3.0}, {20.05, -3.55, 0.15, 3.0},
                 {6.05, 3.05, 0.15, 3.0}};
  TrajectorySpec spec;
  spec.kind = LinearMotion{10.0};
  spec.duration = 0.2;
  NoiseSpec noise;
  noise.range_sigma = 0.01;
  noise.seed = 3;
  const auto p = process(scene, spec, 0.0, LidarConfig::hdl64_like(), noise);

  // The post sitting at the scan-start azimuth.
  Point3 truth{}, raw{}, corrected{};
  std::size_t n = 0;
  double max_phase = 0.0;
  for (std::size_t k = 0; k < p.ray_of_point.size(); ++k) {
    const std::size_t r = p.ray_of_point[k];
    const auto& label = p.sim.labels[r];
    if (label.kind != PrimitiveKind::kPost || label.index != 0) continue;
    truth = truth + p.sim.true_hits[r];
    raw = raw + p.raw_world.points[k];
    corrected = corrected + p.corrected_world.points[k];
    max_phase = std::max(max_phase, p.sim.scan.rays()[r].phase);
    ++n;
  }
  if (n == 0) return {false, "no returns on the foreground post"};
  const double inv = 1.0 / static_cast<double>(n);
  const double raw_err = horizontal_distance(inv * raw, inv * truth);
  const double corrected_err = horizontal_distance(inv * corrected, inv * truth);
  return {std::abs(raw_err - 1.0) <= 0.05 && corrected_err < 0.02,
          fmt("%zu post points (phase <= %.3f): raw centroid error %.4f m, corrected %.4f m", n, max_phase, raw_err,
              corrected_err)};
}

/// Sorted values split wherever consecutive values are more than `gap` apart;
/// returns the sizes of the groups.
std::vector<std::size_t> gap_clusters(std::vector<double> v, double gap) {
  std::sort(v.begin(), v.end());
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i == 0 || v[i] - v[i - 1] > gap) sizes.push_back(0);
    ++sizes.back();
  }
  return sizes;
}

Outcome fence_duplication() {
  const double sigma = 0.01;
  const double fence_x = 25.05;
  Scene scene = wall_scene(fence_x, 10.0, 3.0);
  TrajectorySpec spec;
  spec.kind = ArcMotion{10.0, -25.0 * kDeg};
  spec.duration = 0.6;
  LidarConfig lidar = LidarConfig::hdl64_like();
  lidar.mirror_direction = MirrorDirection::kClockwise;
  NoiseSpec noise;
  noise.range_sigma = sigma;
  noise.seed = 4;

  // Signed offsets of the fence points from the fence plane, merged over 5 scans.
  std::vector<double> raw_offsets, corrected_offsets;
  double swept = 0.0;
  for (int s = 0; s < 5; ++s) {
    const auto p = process(scene, spec, 0.1 * s, lidar, noise);
    swept = swept_world_angle(p.increment, lidar.mirror_direction);
    for (std::size_t k = 0; k < p.ray_of_point.size(); ++k) {
      if (p.sim.labels[p.ray_of_point[k]].kind != PrimitiveKind::kFence) continue;
      raw_offsets.push_back(p.raw_world.points[k].x - fence_x);
      corrected_offsets.push_back(p.corrected_world.points[k].x - fence_x);
    }
  }
  // Clusters of at least 10 points; a lone tail sample is not a fence copy.
  auto count = [&](const std::vector<double>& v) {
    const auto sizes = gap_clusters(v, 3.0 * sigma);
    return std::count_if(sizes.begin(), sizes.end(), [](std::size_t n) { return n >= 10; });
  };
  const auto raw_n = count(raw_offsets);
  const auto corrected_n = count(corrected_offsets);
  return {raw_n == 2 && corrected_n == 1,
          fmt("%zu fence points, swept angle %.2f deg: raw %ld clusters, corrected %ld (gap > %.2f m)",
              raw_offsets.size(), swept / kDeg, static_cast<long>(raw_n), static_cast<long>(corrected_n),
              3.0 * sigma)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

struct PipelineRuns {
  fixtures::TempDir rotation_a{"acc_rot_a"};
  fixtures::TempDir rotation_b{"acc_rot_b"};
  fixtures::TempDir linear{"acc_lin"};
  RunConfig rotation_cfg = load_run_config(configs_dir() / "rotation25.json");
  RunConfig linear_cfg = load_run_config(configs_dir() / "linear10.json");
  EvaluationReport rotation;
  EvaluationReport rotation_again;
  EvaluationReport linear_report;
  bool ran = false;

  void run() {
    if (ran) return;
    rotation = run_pipeline(rotation_cfg, rotation_a.path(), 1);
    rotation_again = run_pipeline(rotation_cfg, rotation_b.path(), 2);
    linear_report = run_pipeline(linear_cfg, linear.path(), 1);
    ran = true;
  }
};

PipelineRuns& runs() {
  static PipelineRuns r;
  r.run();
  return r;
}

Outcome occupancy_direction() {
  auto& r = runs();
  const auto occ = std::find_if(r.rotation.occupancy.begin(), r.rotation.occupancy.end(),
                                [](const OccupancyRow& o) { return o.cell_size == 0.1; });
  if (occ == r.rotation.occupancy.end()) return {false, "no 0.1 m occupancy row"};
  const double reduction = 1.0 - static_cast<double>(occ->corrected) / static_cast<double>(occ->raw);
  const auto lin = r.linear_report.occupancy.front();
  const double lin_reduction = 1.0 - static_cast<double>(lin.corrected) / static_cast<double>(lin.raw);
  return {r.rotation_cfg.num_scans >= 15 && occ->corrected < occ->raw,
          fmt("rotation, %zu scans @0.1 m: raw %zu corrected %zu, reduction %.2f%% (linear: %.2f%%)",
              r.rotation_cfg.num_scans, occ->raw, occ->corrected, 100.0 * reduction, 100.0 * lin_reduction)};
}

Outcome icp_direction() {
  auto& r = runs();
  const bool enough = r.rotation.icp.size() >= 15 && r.linear_report.icp.size() >= 15;
  const bool rot = r.rotation.mean_icp_corrected() <= r.rotation.mean_icp_raw();
  const bool lin = r.linear_report.mean_icp_corrected() <= r.linear_report.mean_icp_raw();
  return {enough && rot && lin,
          fmt("rotation %zu pairs: raw %.7f corrected %.7f; linear %zu pairs: raw %.7f corrected %.7f",
              r.rotation.icp.size(), r.rotation.mean_icp_raw(), r.rotation.mean_icp_corrected(),
              r.linear_report.icp.size(), r.linear_report.mean_icp_raw(), r.linear_report.mean_icp_corrected())};
}

Outcome integration_oracle() {
  const double radius = 5.0;
  const double angle = 2.0;
  auto endpoint_error = [&](int steps) {
    const double ds = radius * angle / steps;
    const std::vector<MotionIncrement> incs(steps, MotionIncrement{ds, angle / steps, 0.01});
    const Pose2 end = integrate_trajectory(Pose2{}, TrajectorySegment::from_increments(0.0, incs)).back().pose;
    return std::hypot(end.x() - radius * std::sin(angle), end.y() - radius * (1.0 - std::cos(angle)));
  };
  const double e100 = endpoint_error(100);
  const double e200 = endpoint_error(200);
  const double ratio = e100 / e200;
  return {e100 < 1e-3 && ratio >= 3.5, fmt("100 steps: %.3e m; 200 steps: %.3e m; ratio %.2f", e100, e200, ratio)};
}

Outcome closure() {
  const Scene scene = load_scene(configs_dir() / "street_scene.json");
  std::string detail;
  bool pass = true;
  for (const char* name : {"linear10.json", "rotation25.json", "piecewise.json"}) {
    auto cfg = load_run_config(configs_dir() / name);
    cfg.noise = NoiseSpec{};
    double worst = 0.0;
    for (std::size_t i = 0; i < cfg.num_scans; ++i) {
      const auto p = process(scene, cfg.trajectory, 0.1 * static_cast<double>(i), cfg.lidar, cfg.noise, cfg.wheel);
      worst = std::max(worst, point_to_surface_error(p.corrected_world, scene).rms);
    }
    pass = pass && worst < 1e-3;
    detail += fmt("%s%s worst rms %.2e m", detail.empty() ? "" : "; ", name, worst);
  }
  return {pass, detail};
}

Outcome identity() {
  const Scene scene = load_scene(configs_dir() / "street_scene.json");
  TrajectorySpec still;
  still.kind = LinearMotion{0.0};
  NoiseSpec noise;
  noise.range_sigma = 0.01;
  noise.seed = 9;
  const Scan scan = simulate_scan(scene, still, 0.0, LidarConfig::hdl64_like(), noise);
  const auto raw = raw_cloud(scan);
  const auto corrected = deskew_scan(scan, MotionIncrement{0.0, 0.0, scan.config().scan_period});
  const bool same = raw.size() == corrected.cloud.size() &&
                    std::memcmp(raw.points.data(), corrected.cloud.points.data(), raw.size() * sizeof(Point3)) == 0;

  bool exact_end = true;
  for (const MotionIncrement inc : {MotionIncrement{1.389, 0.0, 0.1}, MotionIncrement{0.5, 0.0436, 0.1},
                                    MotionIncrement{-3.0, -1.2, 0.1}, MotionIncrement{0.0, 3.1, 0.1}}) {
    const Pose2 p = pose_at_phase(inc, 1.0);
    exact_end = exact_end && p.x() == 0.0 && p.y() == 0.0 && p.theta() == 0.0;
  }
  return {same && exact_end, fmt("%zu points bit-identical: %s; pose at phase 1 exactly zero: %s", raw.size(),
                                 same ? "yes" : "no", exact_end ? "yes" : "no")};
}

Outcome determinism() {
  auto& r = runs();
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(r.rotation_a.path())) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), r.rotation_a.path()));
  }
  std::sort(files.begin(), files.end());
  std::size_t b_count = 0;
  for (const auto& e : fs::recursive_directory_iterator(r.rotation_b.path())) b_count += e.is_regular_file();
  std::size_t differing = 0;
  std::size_t bytes = 0;
  for (const auto& f : files) {
    const auto a = slurp(r.rotation_a.path() / f);
    bytes += a.size();
    if (a != slurp(r.rotation_b.path() / f)) ++differing;
  }
  return {differing == 0 && b_count == files.size() && !files.empty(),
          fmt("%zu files (%zu bytes) compared, %zu differ", files.size(), bytes, differing)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"translation gap", translation_gap},
      {"rotation gap", rotation_gap},
      {"foreground post centroid", post_centroid},
      {"fence duplication", fence_duplication},
      {"occupancy direction", occupancy_direction},
      {"icp direction", icp_direction},
      {"integration oracle", integration_oracle},
      {"closure", closure},
      {"identity", identity},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
