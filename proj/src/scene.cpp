#include "lidar_deskew/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lidar_deskew {
namespace {

constexpr double kMinHit = 1e-9;
constexpr double kParallel = 1e-15;

struct Candidate {
  double t = std::numeric_limits<double>::infinity();
  PrimitiveId id;
};

void consider(Candidate& best, double t, double max_range, PrimitiveId id) {
  // Strict comparison keeps the earlier primitive on exact ties.
  if (t > kMinHit && t <= max_range && t < best.t) {
    best.t = t;
    best.id = id;
  }
}

double hit_post(const Post& post, const Point3& o, const Point3& d) {
  double best = std::numeric_limits<double>::infinity();
  const double ox = o.x - post.x;
  const double oy = o.y - post.y;
  const double a = d.x * d.x + d.y * d.y;
  if (a > kParallel) {
    const double b = 2.0 * (ox * d.x + oy * d.y);
    const double c = ox * ox + oy * oy - post.radius * post.radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      // Numerically stable quadratic roots.
      const double q = -0.5 * (b + std::copysign(sq, b));
      double t0 = q / a;
      double t1 = q != 0.0 ? c / q : t0;
      if (t0 > t1) std::swap(t0, t1);
      for (double t : {t0, t1}) {
        const double z = o.z + t * d.z;
        if (t > kMinHit && z >= 0.0 && z <= post.height) {
          best = std::min(best, t);
          break;
        }
      }
    }
  }
  if (std::abs(d.z) > kParallel) {
    for (double cap_z : {post.height, 0.0}) {
      const double t = (cap_z - o.z) / d.z;
      const double px = ox + t * d.x;
      const double py = oy + t * d.y;
      if (t > kMinHit && px * px + py * py <= post.radius * post.radius) best = std::min(best, t);
    }
  }
  return best;
}

double hit_fence(const Fence& f, const Point3& o, const Point3& d) {
  const double ux = f.x2 - f.x1;
  const double uy = f.y2 - f.y1;
  const double len2 = ux * ux + uy * uy;
  // Plane normal (-uy, ux, 0).
  const double denom = -uy * d.x + ux * d.y;
  if (std::abs(denom) < kParallel) return std::numeric_limits<double>::infinity();
  const double t = (-uy * (f.x1 - o.x) + ux * (f.y1 - o.y)) / denom;
  if (!(t > kMinHit)) return std::numeric_limits<double>::infinity();
  const double hx = o.x + t * d.x - f.x1;
  const double hy = o.y + t * d.y - f.y1;
  const double hz = o.z + t * d.z;
  const double s = (hx * ux + hy * uy) / len2;
  if (s < 0.0 || s > 1.0 || hz < 0.0 || hz > f.height) return std::numeric_limits<double>::infinity();
  return t;
}

double hit_box(const Box& b, const Point3& o, const Point3& d) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  const double origin[3] = {o.x, o.y, o.z};
  const double dir[3] = {d.x, d.y, d.z};
  const double lo[3] = {b.min.x, b.min.y, b.min.z};
  const double hi[3] = {b.max.x, b.max.y, b.max.z};
  for (int axis = 0; axis < 3; ++axis) {
    if (std::abs(dir[axis]) < kParallel) {
      if (origin[axis] < lo[axis] || origin[axis] > hi[axis]) return std::numeric_limits<double>::infinity();
      continue;
    }
    double t0 = (lo[axis] - origin[axis]) / dir[axis];
    double t1 = (hi[axis] - origin[axis]) / dir[axis];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::numeric_limits<double>::infinity();
  }
  // Origin inside the box sees the inner face.
  return t_near > kMinHit ? t_near : t_far;
}

double post_distance(const Post& post, const Point3& p) {
  const double rho = std::hypot(p.x - post.x, p.y - post.y);
  const bool inside = rho <= post.radius && p.z >= 0.0 && p.z <= post.height;
  if (inside) {
    return std::min({post.radius - rho, p.z, post.height - p.z});
  }
  const double dr = std::max(rho - post.radius, 0.0);
  const double dz = std::max({-p.z, p.z - post.height, 0.0});
  return std::hypot(dr, dz);
}

double fence_distance(const Fence& f, const Point3& p) {
  const double ux = f.x2 - f.x1;
  const double uy = f.y2 - f.y1;
  const double s = std::clamp(((p.x - f.x1) * ux + (p.y - f.y1) * uy) / (ux * ux + uy * uy), 0.0, 1.0);
  const double cz = std::clamp(p.z, 0.0, f.height);
  return std::sqrt(std::pow(p.x - (f.x1 + s * ux), 2) + std::pow(p.y - (f.y1 + s * uy), 2) + std::pow(p.z - cz, 2));
}

double box_distance(const Box& b, const Point3& p) {
  const double dx = std::max({b.min.x - p.x, p.x - b.max.x, 0.0});
  const double dy = std::max({b.min.y - p.y, p.y - b.max.y, 0.0});
  const double dz = std::max({b.min.z - p.z, p.z - b.max.z, 0.0});
  if (dx > 0.0 || dy > 0.0 || dz > 0.0) {
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return std::min({p.x - b.min.x, b.max.x - p.x, p.y - b.min.y, b.max.y - p.y, p.z - b.min.z, b.max.z - p.z});
}

}  // namespace

std::string to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::kGround: return "ground";
    case PrimitiveKind::kPost: return "post";
    case PrimitiveKind::kFence: return "fence";
    case PrimitiveKind::kBox: return "box";
  }
  return "unknown";
}

float remission_of(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::kGround: return 0.15F;
    case PrimitiveKind::kPost: return 0.6F;
    case PrimitiveKind::kFence: return 0.45F;
    case PrimitiveKind::kBox: return 0.3F;
  }
  return 0.0F;
}

void Scene::validate() const {
  auto fail = [](const std::string& what, std::size_t i) {
    std::ostringstream os;
    os << "scene: " << what << " " << i << " has non-positive extent";
    throw std::invalid_argument(os.str());
  };
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (!(posts[i].radius > 0.0) || !(posts[i].height > 0.0)) fail("post", i);
  }
  for (std::size_t i = 0; i < fences.size(); ++i) {
    const auto& f = fences[i];
    if (!(std::hypot(f.x2 - f.x1, f.y2 - f.y1) > 0.0) || !(f.height > 0.0)) fail("fence", i);
  }
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    if (!(b.max.x > b.min.x && b.max.y > b.min.y && b.max.z > b.min.z)) fail("box", i);
  }
}

std::optional<RayHit> Scene::raycast(const Point3& origin, const Point3& direction, double max_range) const {
  Candidate best;
  if (ground && direction.z < -kParallel) {
    consider(best, -origin.z / direction.z, max_range, {PrimitiveKind::kGround, 0});
  }
  for (std::size_t i = 0; i < posts.size(); ++i) {
    consider(best, hit_post(posts[i], origin, direction), max_range, {PrimitiveKind::kPost, i});
  }
  for (std::size_t i = 0; i < fences.size(); ++i) {
    consider(best, hit_fence(fences[i], origin, direction), max_range, {PrimitiveKind::kFence, i});
  }
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    consider(best, hit_box(boxes[i], origin, direction), max_range, {PrimitiveKind::kBox, i});
  }
  if (!std::isfinite(best.t)) {
    return std::nullopt;
  }
  return RayHit{best.t, best.id, remission_of(best.id.kind)};
}

double Scene::distance_to_surface(const Point3& p) const {
  double best = std::numeric_limits<double>::infinity();
  if (ground) best = std::abs(p.z);
  for (const auto& post : posts) best = std::min(best, post_distance(post, p));
  for (const auto& f : fences) best = std::min(best, fence_distance(f, p));
  for (const auto& b : boxes) best = std::min(best, box_distance(b, p));
  return best;
}

Scene Scene::transformed(const Pose2& pose) const {
  Scene out = *this;
  for (auto& post : out.posts) {
    const Point3 c = pose.transform({post.x, post.y, 0.0});
    post.x = c.x;
    post.y = c.y;
  }
  for (auto& f : out.fences) {
    const Point3 a = pose.transform({f.x1, f.y1, 0.0});
    const Point3 b = pose.transform({f.x2, f.y2, 0.0});
    f.x1 = a.x;
    f.y1 = a.y;
    f.x2 = b.x;
    f.y2 = b.y;
  }
  if (!out.boxes.empty()) {
    const double quarter_turns = pose.theta() / (std::numbers::pi / 2.0);
    if (std::abs(quarter_turns - std::round(quarter_turns)) > 1e-12) {
      throw std::invalid_argument("scene: boxes only support rotations by multiples of pi/2");
    }
    for (auto& b : out.boxes) {
      const Point3 c1 = pose.transform(b.min);
      const Point3 c2 = pose.transform(b.max);
      b.min = {std::min(c1.x, c2.x), std::min(c1.y, c2.y), b.min.z};
      b.max = {std::max(c1.x, c2.x), std::max(c1.y, c2.y), b.max.z};
    }
  }
  return out;
}

}  // namespace lidar_deskew
