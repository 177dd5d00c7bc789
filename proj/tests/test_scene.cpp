#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lidar_deskew/scene.hpp"

using namespace lidar_deskew;
using std::numbers::pi;

TEST(Scene, GroundHit) {
  Scene s;
  const double incl = -10.0 * pi / 180.0;
  const Point3 dir{std::cos(incl), 0.0, std::sin(incl)};
  const auto hit = s.raycast({0.0, 0.0, 2.0}, dir, 100.0);
  ASSERT_TRUE(hit);
  EXPECT_NEAR(hit->distance, 2.0 / std::sin(-incl), 1e-12);
  EXPECT_EQ(hit->primitive.kind, PrimitiveKind::kGround);
  EXPECT_FALSE(s.raycast({0.0, 0.0, 2.0}, {1.0, 0.0, 0.0}, 100.0));
  EXPECT_FALSE(s.raycast({0.0, 0.0, 2.0}, dir, 5.0));
}

TEST(Scene, PostSideAndCap) {
  Scene s;
  s.ground = false;
  s.posts.push_back({10.0, 0.0, 0.1, 3.0});
  const auto side = s.raycast({0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}, 100.0);
  ASSERT_TRUE(side);
  EXPECT_NEAR(side->distance, 9.9, 1e-12);
  EXPECT_EQ(side->primitive, (PrimitiveId{PrimitiveKind::kPost, 0}));
  // Straight down onto the top cap.
  const auto cap = s.raycast({10.0, 0.05, 5.0}, {0.0, 0.0, -1.0}, 100.0);
  ASSERT_TRUE(cap);
  EXPECT_NEAR(cap->distance, 2.0, 1e-12);
  // Above the post.
  EXPECT_FALSE(s.raycast({0.0, 0.0, 3.5}, {1.0, 0.0, 0.0}, 100.0));
  // Grazing past.
  EXPECT_FALSE(s.raycast({0.0, 0.2, 1.0}, {1.0, 0.0, 0.0}, 100.0));
}

TEST(Scene, FenceHitRespectsExtent) {
  Scene s;
  s.ground = false;
  s.fences.push_back({5.0, -1.0, 5.0, 1.0, 1.5});
  const auto hit = s.raycast({0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}, 100.0);
  ASSERT_TRUE(hit);
  EXPECT_NEAR(hit->distance, 5.0, 1e-12);
  EXPECT_EQ(hit->primitive.kind, PrimitiveKind::kFence);
  EXPECT_FALSE(s.raycast({0.0, 0.0, 2.0}, {1.0, 0.0, 0.0}, 100.0));
  const double a = std::atan2(2.0, 5.0);
  EXPECT_FALSE(s.raycast({0.0, 0.0, 1.0}, {std::cos(a), std::sin(a), 0.0}, 100.0));
  // Seen from behind as well.
  EXPECT_TRUE(s.raycast({10.0, 0.0, 1.0}, {-1.0, 0.0, 0.0}, 100.0));
}

TEST(Scene, BoxHitFromOutsideAndInside) {
  Scene s;
  s.ground = false;
  s.boxes.push_back({{4.0, -2.0, 0.0}, {6.0, 2.0, 3.0}});
  const auto outside = s.raycast({0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}, 100.0);
  ASSERT_TRUE(outside);
  EXPECT_NEAR(outside->distance, 4.0, 1e-12);
  const auto inside = s.raycast({5.0, 0.0, 1.0}, {1.0, 0.0, 0.0}, 100.0);
  ASSERT_TRUE(inside);
  EXPECT_NEAR(inside->distance, 1.0, 1e-12);
}

TEST(Scene, NearestHitWinsAndTiesGoToFirstInserted) {
  Scene s;
  s.ground = false;
  s.fences.push_back({8.0, -1.0, 8.0, 1.0, 2.0});
  s.fences.push_back({5.0, -1.0, 5.0, 1.0, 2.0});
  s.fences.push_back({5.0, -2.0, 5.0, 2.0, 2.0});
  const auto hit = s.raycast({0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}, 100.0);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->primitive, (PrimitiveId{PrimitiveKind::kFence, 1}));
}

TEST(Scene, DistanceToSurface) {
  Scene s;
  s.posts.push_back({10.0, 0.0, 0.5, 3.0});
  s.fences.push_back({-5.0, -5.0, 5.0, -5.0, 1.0});
  s.boxes.push_back({{20.0, 20.0, 0.0}, {22.0, 24.0, 5.0}});
  EXPECT_NEAR(s.distance_to_surface({0.0, 0.0, 4.0}), 4.0, 1e-12);
  EXPECT_NEAR(s.distance_to_surface({10.0, 2.0, 1.0}), 1.0, 1e-12);    // post side, ground at 1
  EXPECT_NEAR(s.distance_to_surface({10.0, 2.0, 2.0}), 1.5, 1e-12);    // post side
  EXPECT_NEAR(s.distance_to_surface({0.0, -5.3, 0.8}), 0.3, 1e-12);    // fence face
  EXPECT_NEAR(s.distance_to_surface({0.0, -5.0, 3.0}), 2.0, 1e-12);    // above fence top edge
  EXPECT_NEAR(s.distance_to_surface({21.0, 22.0, 3.0}), 1.0, 1e-12);   // inside the box
  EXPECT_NEAR(s.distance_to_surface({19.0, 22.0, 8.0}), std::hypot(1.0, 3.0), 1e-12);
}

TEST(Scene, RaycastHitsLieOnSurfaces) {
  Scene s;
  s.posts.push_back({7.0, 3.0, 0.2, 2.0});
  s.fences.push_back({-6.0, 4.0, 6.0, -3.0, 1.7});
  s.boxes.push_back({{-12.0, -9.0, 0.0}, {-8.0, 9.0, 4.0}});
  const Point3 origin{0.3, -0.2, 1.9};
  int hits = 0;
  for (int i = 0; i < 720; ++i) {
    for (double incl : {-0.3, -0.05, 0.0, 0.03}) {
      const double a = kTwoPi * i / 720.0;
      const Point3 d{std::cos(incl) * std::cos(a), std::cos(incl) * std::sin(a), std::sin(incl)};
      const auto hit = s.raycast(origin, d, 100.0);
      if (!hit) continue;
      ++hits;
      ASSERT_LT(s.distance_to_surface(origin + hit->distance * d), 1e-9);
    }
  }
  EXPECT_GT(hits, 1000);
}

TEST(Scene, ValidateAndEmpty) {
  Scene s;
  EXPECT_FALSE(s.empty());
  s.ground = false;
  EXPECT_TRUE(s.empty());
  s.posts.push_back({0.0, 0.0, 0.0, 1.0});
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.posts.clear();
  s.fences.push_back({1.0, 1.0, 1.0, 1.0, 1.0});
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.fences.clear();
  s.boxes.push_back({{0.0, 0.0, 0.0}, {1.0, -1.0, 1.0}});
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Scene, TransformedMovesPrimitives) {
  Scene s;
  s.posts.push_back({1.0, 0.0, 0.1, 2.0});
  s.fences.push_back({0.0, 2.0, 1.0, 2.0, 1.0});
  s.boxes.push_back({{2.0, 0.0, 0.0}, {3.0, 1.0, 1.0}});
  const Pose2 pose(5.0, 1.0, pi / 2);
  const Scene t = s.transformed(pose);
  EXPECT_NEAR(t.posts[0].x, 5.0, 1e-12);
  EXPECT_NEAR(t.posts[0].y, 2.0, 1e-12);
  EXPECT_NEAR(t.fences[0].x1, 3.0, 1e-12);
  EXPECT_NEAR(t.boxes[0].min.x, 4.0, 1e-12);
  EXPECT_NEAR(t.boxes[0].max.y, 4.0, 1e-12);
  EXPECT_THROW(s.transformed(Pose2(0.0, 0.0, 0.3)), std::invalid_argument);
}
