#pragma once

// Parametric ground-truth world made of analytic primitives: a ground
// plane, vertical cylinders (posts), vertical rectangles (fences) and
// axis-aligned boxes. Supports exact ray casting and exact unsigned
// point-to-surface distance.

#include <optional>
#include <string>
#include <vector>

#include "lidar_deskew/types.hpp"

namespace lidar_deskew {

struct Post {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.1;
  double height = 3.0;
};

struct Fence {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 1.0;
  double y2 = 0.0;
  double height = 1.5;
};

struct Box {
  Point3 min;
  Point3 max;
};

enum class PrimitiveKind { kGround, kPost, kFence, kBox };

struct PrimitiveId {
  PrimitiveKind kind = PrimitiveKind::kGround;
  std::size_t index = 0;

  friend bool operator==(const PrimitiveId&, const PrimitiveId&) = default;
};

std::string to_string(PrimitiveKind kind);

struct RayHit {
  double distance = 0.0;
  PrimitiveId primitive;
  float remission = 0.0F;
};

struct Scene {
  bool ground = true;
  std::vector<Post> posts;
  std::vector<Fence> fences;
  std::vector<Box> boxes;

  /// Throws std::invalid_argument if a primitive has non-positive extent.
  void validate() const;
  bool empty() const { return !ground && posts.empty() && fences.empty() && boxes.empty(); }

  /// Nearest intersection of origin + t * direction with t in (0, max_range].
  /// `direction` must be unit length. Ties go to the primitive inserted first
  /// (ground, then posts, fences, boxes, each in list order).
  std::optional<RayHit> raycast(const Point3& origin, const Point3& direction, double max_range) const;

  /// Unsigned distance from `p` to the closest primitive surface.
  double distance_to_surface(const Point3& p) const;

  /// Same scene rigidly moved by a planar pose. Boxes must stay axis-aligned,
  /// so this throws unless the rotation is a multiple of pi/2 or there are
  /// no boxes.
  Scene transformed(const Pose2& pose) const;
};

/// Constant remission per primitive kind (no intensity physics).
float remission_of(PrimitiveKind kind);

}  // namespace lidar_deskew
