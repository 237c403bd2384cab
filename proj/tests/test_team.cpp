#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace fbr;

namespace {

OccupancyGrid open_room(int w = 100, int h = 100) {
  return OccupancyGrid(w, h, 0.1, std::vector<Terrain>(static_cast<std::size_t>(w * h), Terrain::Free), true);
}

CommGraph graph_of(std::size_t n, const std::vector<std::pair<int, int>>& edges) {
  CommGraph g(n);
  for (auto [a, b] : edges) g.add_edge(a, b);
  return g;
}

Partition singletons(int n) {
  Partition p;
  for (int i = 0; i < n; ++i) p.push_back({i});
  return p;
}

}  // namespace

TEST(CommGraph, RangeAndLineOfSight) {
  const auto g = open_room();
  EXPECT_TRUE(build_comm_graph({Pose{3.0, 5.0}, Pose{5.0, 5.0}}, g, 2.7).has_edge(0, 1));
  EXPECT_FALSE(build_comm_graph({Pose{3.0, 5.0}, Pose{6.0, 5.0}}, g, 2.7).has_edge(0, 1));

  std::vector<Terrain> cells(10000, Terrain::Free);
  for (int y = 0; y < 100; ++y) cells[static_cast<std::size_t>(y * 100 + 50)] = Terrain::Obstacle;
  const OccupancyGrid walled(100, 100, 0.1, std::move(cells), true);
  const Pose a{4.55, 5.0}, b{5.55, 5.0};
  EXPECT_FALSE(oracle::los(walled, walled.shape().cell_of(a), walled.shape().cell_of(b)));
  EXPECT_FALSE(build_comm_graph({a, b}, walled, 2.7).has_edge(0, 1));
}

TEST(CommGraph, SymmetricAndMatchesOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const auto g = oracle::random_grid(rng, 50, 50, 0.08);
    std::vector<Pose> poses;
    std::uniform_int_distribution<int> c(0, 49);
    while (poses.size() < 6) {
      const Cell at{c(rng), c(rng)};
      if (g.is_free(at)) poses.push_back(g.shape().center_of(at));
    }
    const auto graph = build_comm_graph(poses, g, 2.7);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        if (i == j) continue;
        const bool expect = distance(poses[static_cast<std::size_t>(i)], poses[static_cast<std::size_t>(j)]) <= 2.7 &&
                            oracle::los(g, g.shape().cell_of(poses[static_cast<std::size_t>(i)]),
                                        g.shape().cell_of(poses[static_cast<std::size_t>(j)]));
        ASSERT_EQ(graph.has_edge(i, j), expect);
        ASSERT_EQ(graph.has_edge(i, j), graph.has_edge(j, i));
      }
  }
}

TEST(UpdateClusters, MultiHopChain) {
  const auto up = update_clusters(singletons(3), graph_of(3, {{0, 1}, {1, 2}}));
  EXPECT_EQ(up.clusters, (Partition{{0, 1, 2}}));
  ASSERT_EQ(up.merges.size(), 1u);
  EXPECT_EQ(up.merges[0].sources, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(UpdateClusters, NoEdgesNoEvents) {
  const Partition p{{0, 2}, {1}};
  const auto up = update_clusters(p, graph_of(3, {}));
  EXPECT_EQ(up.clusters, p);
  EXPECT_TRUE(up.merges.empty());
  EXPECT_TRUE(up.splits.empty());
}

TEST(UpdateClusters, PairJoinsSingleton) {
  const auto up = update_clusters(Partition{{0, 1}, {2}}, graph_of(3, {{1, 2}}));
  EXPECT_EQ(up.clusters, (Partition{{0, 1, 2}}));
  EXPECT_EQ(up.merges.size(), 1u);
}

TEST(UpdateClusters, ConnectedClusterStaysTogetherWithoutEdges) {
  // membership is sticky: losing an edge alone never splits a cluster
  const auto up = update_clusters(Partition{{0, 1, 2}}, graph_of(3, {}));
  EXPECT_EQ(up.clusters, (Partition{{0, 1, 2}}));
}

TEST(UpdateClusters, FailedRobotDetaches) {
  const auto up = update_clusters(Partition{{0, 1, 2}}, graph_of(3, {{0, 1}, {1, 2}}), {2});
  EXPECT_EQ(up.clusters, (Partition{{0, 1}, {2}}));
  ASSERT_EQ(up.splits.size(), 1u);
  EXPECT_EQ(up.splits[0].detached, std::vector<RobotId>{2});
}

TEST(UpdateClusters, MatchesComponentOracle) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> n_dist(1, 12);
  std::bernoulli_distribution edge(0.15);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = n_dist(rng);
    // random starting partition
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Partition current;
    for (int r : perm) {
      if (current.empty() || std::bernoulli_distribution(0.5)(rng)) current.push_back({});
      current.back().push_back(r);
    }
    normalize(current);
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (edge(rng)) edges.emplace_back(a, b);
    const auto up = update_clusters(current, graph_of(static_cast<std::size_t>(n), edges));
    ASSERT_EQ(up.clusters, oracle::cluster_components(current, edges)) << "trial " << trial;
    // partition invariant: every robot in exactly one cluster
    std::vector<int> all;
    for (const auto& c : up.clusters) all.insert(all.end(), c.begin(), c.end());
    std::sort(all.begin(), all.end());
    std::vector<int> want(static_cast<std::size_t>(n));
    std::iota(want.begin(), want.end(), 0);
    ASSERT_EQ(all, want);
    ASSERT_GE(max_cluster_size(up.clusters), max_cluster_size(current));
  }
}

TEST(ElectLeader, SmallestId) {
  EXPECT_EQ(elect_leader({3, 1, 2}), 1);
  EXPECT_EQ(elect_leader({7}), 7);
  EXPECT_THROW(elect_leader({}), std::invalid_argument);
}

TEST(OnMerge, DisjointMapsAddUp) {
  const GridShape s{40, 40, 0.1};
  FrontierIds ids;
  Cluster a = make_singleton(2, s, 2.7, 9), b = make_singleton(0, s, 2.7, 9);
  for (int x = 0; x < 10; ++x) a.map.set(Cell{x, 5}, Knowledge::Free);
  for (int x = 20; x < 35; ++x) b.map.set(Cell{x, 30}, Knowledge::Obstacle);
  const auto m = on_merge(a, b, 1, ids);
  EXPECT_EQ(m.map.known_count(), a.map.known_count() + b.map.known_count());
  EXPECT_EQ(m.leader, 0);
  EXPECT_EQ(m.members, (std::vector<RobotId>{0, 2}));
  EXPECT_TRUE(m.frontiers.virtual_.empty());
  EXPECT_EQ(m.trace.owner(), 0);
}

TEST(OnMerge, SupersetAbsorbs) {
  std::mt19937_64 rng(4);
  const GridShape s{30, 30, 0.1};
  FrontierIds ids;
  Cluster a = make_singleton(0, s, 2.7, 9), b = make_singleton(1, s, 2.7, 9);
  a.map = oracle::random_known(rng, 30, 30, 0.3, 0.2);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (a.map.at(i) == Knowledge::Free && i % 3 == 0) b.map.set(i, Knowledge::Free);
  EXPECT_EQ(on_merge(a, b, 1, ids).map, a.map);
  EXPECT_THROW(on_merge(a, a, 1, ids), std::invalid_argument);
}

TEST(Formation, Examples) {
  const std::vector<Pose> line{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}};
  EXPECT_TRUE(formation_targets(line, 0, 1.0).empty());
  const auto two = formation_targets(line, 2, 1.0);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_NEAR(two[0].x, 3.0, 1e-12);
  EXPECT_NEAR(two[1].x, 2.0, 1e-12);
  const auto clamped = formation_targets({{1.0, 1.0}, {1.2, 1.0}}, 2, 1.0);
  for (const auto& p : clamped) {
    EXPECT_DOUBLE_EQ(p.x, 1.0);
    EXPECT_DOUBLE_EQ(p.y, 1.0);
  }
  EXPECT_THROW(formation_targets(line, 1, 0.0), ConfigError);
}

TEST(Formation, ArcLengthOnPolyline) {
  // L-shaped history: 2 m east then 2 m north; follower 3 m back sits 1 m east of the start
  const std::vector<Pose> l{{0, 0}, {2, 0}, {2, 2}};
  const auto f = formation_targets(l, 3, 1.0);
  EXPECT_NEAR(f[0].x, 2.0, 1e-12);
  EXPECT_NEAR(f[0].y, 1.0, 1e-12);
  EXPECT_NEAR(f[1].x, 2.0, 1e-12);
  EXPECT_NEAR(f[1].y, 0.0, 1e-12);
  EXPECT_NEAR(f[2].x, 1.0, 1e-12);
  EXPECT_NEAR(f[2].y, 0.0, 1e-12);
}
