#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace fbr;

namespace {

// 10 m square arena at 0.1 m; the free interior spans [0.1, 9.9).
OccupancyGrid arena() {
  return OccupancyGrid(100, 100, 0.1, std::vector<Terrain>(10000, Terrain::Free), true);
}

}  // namespace

TEST(SimulateLidar, FourBeamsHitWallsAtFourMetres) {
  // interior wall ring whose inner faces are 4 m from the centre
  const int w = 100;
  std::vector<Terrain> cells(static_cast<std::size_t>(w * w), Terrain::Free);
  for (int i = 0; i < w; ++i) {
    for (int j : {9, 90}) {
      cells[static_cast<std::size_t>(j * w + i)] = Terrain::Obstacle;
      cells[static_cast<std::size_t>(i * w + j)] = Terrain::Obstacle;
    }
  }
  const OccupancyGrid g(w, w, 0.1, std::move(cells), true);
  const Pose o{5.0, 5.0};
  const auto scan = simulate_lidar(g, o, 10.0, 4);
  ASSERT_EQ(scan.beams.size(), 4u);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_DOUBLE_EQ(scan.beams[j].angle, 2.0 * std::numbers::pi * static_cast<double>(j) / 4.0);
    EXPECT_TRUE(scan.beams[j].hit);
    EXPECT_NEAR(scan.beams[j].hit_range, 4.0, 0.1);
    EXPECT_NEAR(scan.beams[j].hit_range, oracle::ray_distance(g, o.x, o.y, scan.beams[j].angle, 10.0), 1e-9);
  }
}

TEST(SimulateLidar, EverythingBeyondRange) {
  const auto g = arena();
  const auto scan = simulate_lidar(g, Pose{5.0, 5.0}, 2.0, 8);
  for (const auto& b : scan.beams) {
    EXPECT_FALSE(b.hit);
    EXPECT_DOUBLE_EQ(b.hit_range, 2.0);
  }
}

TEST(SimulateLidar, Preconditions) {
  const auto g = arena();
  EXPECT_THROW(simulate_lidar(g, Pose{5.0, 5.0}, 10.0, 0), GeometryError);
  EXPECT_THROW(simulate_lidar(g, Pose{0.05, 0.05}, 10.0, 8), GeometryError);
}

TEST(IntegrateScan, SingleBeamCorridor) {
  const auto g = arena();
  KnownMap k(g.shape());
  const Pose o{5.05, 5.05};
  const RayHit r = raycast(g, o, 0.0, 10.0);  // border column x = 99 starts at 9.9 m
  ASSERT_NEAR(r.hit_range, 4.85, 1e-9);
  const Beam b{0.0, r.hit_range, r.hit};
  integrate_scan(k, LidarScan{o, {b}});
  for (int x = 50; x < 99; ++x) EXPECT_EQ(k.at(Cell{x, 50}), Knowledge::Free) << x;
  EXPECT_EQ(k.at(Cell{99, 50}), Knowledge::Obstacle);
  EXPECT_EQ(k.known_count(), 50u);
  EXPECT_EQ(k.at(Cell{50, 51}), Knowledge::Unknown);
}

TEST(IntegrateScan, IdempotentAndMissBeam) {
  const auto g = arena();
  KnownMap k(g.shape());
  const auto scan = simulate_lidar(g, Pose{3.0, 3.0}, 2.0, 90);
  integrate_scan(k, scan);
  const KnownMap once = k;
  integrate_scan(k, scan);
  EXPECT_EQ(k, once);
  for (std::size_t i = 0; i < k.shape().size(); ++i) EXPECT_NE(k.at(i), Knowledge::Obstacle);
}

TEST(IntegrateScan, NeverDemotes) {
  const auto g = arena();
  KnownMap k(g.shape());
  k.set(Cell{40, 30}, Knowledge::Obstacle);
  integrate_scan(k, LidarScan{Pose{3.05, 3.05}, {Beam{0.0, 3.0, false}}});
  EXPECT_EQ(k.at(Cell{40, 30}), Knowledge::Obstacle);
  EXPECT_THROW(integrate_scan(k, LidarScan{Pose{-1.0, 3.0}, {}}), GeometryError);
}

TEST(IntegrateScan, SoundAgainstGroundTruth) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::random_grid(rng, 60, 60, 0.05);
    KnownMap k(g.shape());
    std::size_t known = 0;
    std::uniform_int_distribution<int> c(1, 58);
    for (int s = 0; s < 10; ++s) {
      const Cell at{c(rng), c(rng)};
      if (!g.is_free(at)) continue;
      integrate_scan(k, simulate_lidar(g, g.shape().center_of(at), 3.0, 360));
      ASSERT_GE(k.known_count(), known);
      known = k.known_count();
    }
    for (std::size_t i = 0; i < k.shape().size(); ++i) {
      if (k.at(i) == Knowledge::Unknown) continue;
      const bool free = g.cells()[i] == Terrain::Free;
      ASSERT_EQ(k.at(i) == Knowledge::Free, free) << "cell " << i;
    }
  }
}

TEST(MergeMaps, IdentityCommutativityAndJoin) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = oracle::random_known(rng, 12, 9, 0.4, 0.2);
    const auto b = oracle::random_known(rng, 12, 9, 0.4, 0.2);
    const KnownMap blank(a.shape());
    EXPECT_EQ(merge_maps({a, blank}), a);
    const auto ab = merge_maps({a, b});
    EXPECT_EQ(ab, merge_maps({b, a}));
    EXPECT_GE(ab.known_count(), std::max(a.known_count(), b.known_count()));
    for (std::size_t i = 0; i < ab.shape().size(); ++i) {
      if (a.at(i) == Knowledge::Obstacle || b.at(i) == Knowledge::Obstacle) EXPECT_EQ(ab.at(i), Knowledge::Obstacle);
      else if (a.at(i) == Knowledge::Free || b.at(i) == Knowledge::Free) EXPECT_EQ(ab.at(i), Knowledge::Free);
      else EXPECT_EQ(ab.at(i), Knowledge::Unknown);
    }
  }
}

TEST(MergeMaps, FreeVersusObstacle) {
  KnownMap a(GridShape{2, 1, 0.1}), b(GridShape{2, 1, 0.1});
  a.set(Cell{0, 0}, Knowledge::Free);
  b.set(Cell{0, 0}, Knowledge::Obstacle);
  EXPECT_EQ(merge_maps({a, b}).at(Cell{0, 0}), Knowledge::Obstacle);
}

TEST(MergeMaps, DimensionMismatch) {
  EXPECT_THROW(merge_maps({KnownMap(GridShape{2, 2, 0.1}), KnownMap(GridShape{3, 2, 0.1})}), GeometryError);
  EXPECT_THROW(merge_maps(std::vector<KnownMap>{}), GeometryError);
}

TEST(KnownMap, Dump) {
  KnownMap k(GridShape{3, 1, 0.1});
  k.set(Cell{0, 0}, Knowledge::Obstacle);
  k.set(Cell{1, 0}, Knowledge::Free);
  EXPECT_EQ(dump(k), "#. \n");
}
