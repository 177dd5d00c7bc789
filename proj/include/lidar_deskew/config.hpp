#pragma once

// Declarative JSON run configuration (schema 1).
//
//   {
//     "schema": 1,
//     "scene": "scene.json" | { ...scene object... },
//     "trajectory": {"kind": "linear" | "arc" | "piecewise", ...},
//     "lidar": {"preset": "hdl64", "columns": 2048, ...},
//     "wheel": {"radius": 0.3, "track": 1.5},
//     "noise": {"range_sigma": 0.0, "wheel_tick_sigma": 0.0},
//     "can_rate_hz": 100,
//     "num_scans": 15,
//     "first_scan_start": 0.0,
//     "output_dir": "out",
//     "cloud_format": "ply",
//     "cell_sizes": [0.1],
//     "icp": {"max_iterations": 50, "convergence_eps": 1e-4,
//             "max_correspondence_distance": 2.0, "planar": true,
//             "max_source_points": 0},
//     "seed": 42
//   }
//
// Relative paths are resolved against the directory of the config file.
// The README documents every field.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lidar_deskew/io.hpp"
#include "lidar_deskew/metrics.hpp"
#include "lidar_deskew/scene.hpp"
#include "lidar_deskew/simulator.hpp"

namespace lidar_deskew {

inline constexpr int kConfigSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::optional<std::filesystem::path> scene_path;
  Scene scene;
  TrajectorySpec trajectory;
  LidarConfig lidar = LidarConfig::hdl64_like();
  WheelConfig wheel;
  NoiseSpec noise;
  double can_rate_hz = 100.0;
  std::size_t num_scans = 15;
  double first_scan_start = 0.0;
  std::filesystem::path output_dir = "out";
  CloudFormat cloud_format = CloudFormat::kPlyBinary;
  std::vector<double> cell_sizes{0.1};
  IcpParams icp;
  std::uint64_t seed = 0;

  /// Throws ConfigError when the run cannot be carried out as configured
  /// (e.g. the scans do not fit inside the trajectory duration).
  void validate() const;
};

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);

Scene parse_scene(const std::string& json_text);
Scene load_scene(const std::filesystem::path& path);
std::string scene_to_json(const Scene& scene);

TrajectorySpec parse_trajectory(const std::string& json_text);

}  // namespace lidar_deskew
