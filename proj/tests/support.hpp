#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "lidar_deskew/types.hpp"

namespace lidar_deskew::fixtures {

inline constexpr double kDeg = std::numbers::pi / 180.0;

inline LidarConfig small_lidar(std::size_t columns = 360, std::size_t beams = 8, double min_deg = -15.0,
                               double max_deg = 2.0, MirrorDirection dir = MirrorDirection::kClockwise) {
  auto cfg = LidarConfig::evenly_spaced(beams, min_deg * kDeg, max_deg * kDeg, columns, 0.1);
  cfg.mirror_direction = dir;
  return cfg;
}

/// One horizontal beam, for exact planar geometry.
inline LidarConfig flat_lidar(std::size_t columns = 360, MirrorDirection dir = MirrorDirection::kClockwise) {
  LidarConfig cfg;
  cfg.beam_inclinations = {0.0};
  cfg.azimuth_step = kTwoPi / static_cast<double>(columns);
  cfg.mirror_direction = dir;
  return cfg;
}

inline PointCloud random_cloud(std::size_t n, std::uint64_t seed, double extent = 10.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-extent, extent);
  PointCloud cloud;
  for (std::size_t i = 0; i < n; ++i) cloud.points.push_back({u(rng), u(rng), 0.2 * u(rng)});
  return cloud;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("lidar_deskew_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace lidar_deskew::fixtures
