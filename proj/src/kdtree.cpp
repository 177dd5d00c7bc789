#include "lidar_deskew/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace lidar_deskew {
namespace {

double coord(const Point3& p, int axis) {
  switch (axis) {
    case 0: return p.x;
    case 1: return p.y;
    default: return p.z;
  }
}

double squared(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

KdTree::KdTree(std::span<const Point3> points, std::size_t leaf_size)
    : points_(points.begin(), points.end()), order_(points.size()), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
    build(0, points_.size());
  }
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back({-1, 0.0, begin, end, 0, 0});
  if (end - begin <= leaf_size_) {
    return id;
  }

  // Split on the widest axis of the bounding box.
  Point3 lo = points_[order_[begin]];
  Point3 hi = lo;
  for (std::size_t i = begin; i < end; ++i) {
    const Point3& p = points_[order_[i]];
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const double ext[3] = {hi.x - lo.x, hi.y - lo.y, hi.z - lo.z};
  const int axis = static_cast<int>(std::max_element(ext, ext + 3) - ext);
  if (ext[axis] == 0.0) {
    return id;  // all points coincide
  }

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin), order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                     return coord(points_[a], axis) < coord(points_[b], axis);
                   });
  const double split = coord(points_[order_[mid]], axis);

  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  nodes_[id].split_axis = axis;
  nodes_[id].split_value = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(std::size_t node_id, const Point3& q, Neighbor& best, bool& found) const {
  const Node& node = nodes_[node_id];
  if (node.split_axis < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const std::size_t idx = order_[i];
      const double d2 = squared(points_[idx], q);
      if (d2 < best.squared_distance || (d2 == best.squared_distance && (!found || idx < best.index))) {
        best = {idx, d2};
        found = true;
      }
    }
    return;
  }
  const double diff = coord(q, node.split_axis) - node.split_value;
  const std::size_t near = diff < 0.0 ? node.left : node.right;
  const std::size_t far = diff < 0.0 ? node.right : node.left;
  search(near, q, best, found);
  if (diff * diff <= best.squared_distance) {
    search(far, q, best, found);
  }
}

std::optional<KdTree::Neighbor> KdTree::nearest(const Point3& query, double max_distance) const {
  if (nodes_.empty() || !(max_distance >= 0.0)) {
    return std::nullopt;
  }
  Neighbor best{0, max_distance * max_distance};
  bool found = false;
  search(0, query, best, found);
  if (!found) {
    return std::nullopt;
  }
  return best;
}

}  // namespace lidar_deskew
