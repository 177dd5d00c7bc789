#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lidar_deskew/scene.hpp"
#include "lidar_deskew/types.hpp"

namespace lidar_deskew {

struct SvgLayer {
  std::string name;
  std::string color;
  const PointCloud* cloud = nullptr;
};

struct SvgOptions {
  double width_px = 1000.0;
  /// Points at or below this height are left out (hides the ground).
  double min_z = 0.2;
  /// Per-layer cap; layers are decimated uniformly above it.
  std::size_t max_points_per_layer = 60000;
  /// Plot extent; points outside are dropped. Zero extent means "fit".
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
};

/// Top-down orthographic plot: one <g> per layer, optional ground-truth
/// scene outlines drawn underneath in green.
std::string render_topdown_svg(const std::vector<SvgLayer>& layers, const std::string& title, const Scene* scene,
                               const SvgOptions& options = {});

void write_topdown_svg(const std::filesystem::path& path, const std::vector<SvgLayer>& layers,
                       const std::string& title, const Scene* scene, const SvgOptions& options = {});

}  // namespace lidar_deskew
