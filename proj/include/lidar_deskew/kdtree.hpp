#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lidar_deskew/types.hpp"

namespace lidar_deskew {

/// Static 3-d tree over a point set, for nearest-neighbour correspondence
/// search. The tree keeps its own copy of the points.
class KdTree {
 public:
  struct Neighbor {
    std::size_t index = 0;
    double squared_distance = 0.0;
  };

  explicit KdTree(std::span<const Point3> points, std::size_t leaf_size = 12);

  std::size_t size() const { return points_.size(); }
  const Point3& point(std::size_t i) const { return points_[i]; }

  /// Closest point within `max_distance` (inclusive), if any. Ties resolve to
  /// the smallest index.
  std::optional<Neighbor> nearest(const Point3& query, double max_distance) const;

 private:
  struct Node {
    // Leaf when split_axis < 0: points are order_[begin, end).
    int split_axis = -1;
    double split_value = 0.0;
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t left = 0;
    std::size_t right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end);
  void search(std::size_t node, const Point3& q, Neighbor& best, bool& found) const;

  std::vector<Point3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_;
};

}  // namespace lidar_deskew
