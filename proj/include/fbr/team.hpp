#pragma once

#include <numeric>
#include <set>

#include "fbr/decay.hpp"

namespace fbr {

using RobotId = int;

/// Undirected communication graph over robots 0..n-1.
class CommGraph {
 public:
  explicit CommGraph(std::size_t n = 0) : adj_(n) {}

  std::size_t size() const { return adj_.size(); }

  void add_edge(RobotId a, RobotId b) {
    if (a == b) return;
    auto& la = adj_[static_cast<std::size_t>(a)];
    if (std::find(la.begin(), la.end(), b) != la.end()) return;
    la.push_back(b);
    adj_[static_cast<std::size_t>(b)].push_back(a);
  }

  bool has_edge(RobotId a, RobotId b) const {
    const auto& la = adj_[static_cast<std::size_t>(a)];
    return std::find(la.begin(), la.end(), b) != la.end();
  }

  const std::vector<RobotId>& neighbors(RobotId a) const { return adj_[static_cast<std::size_t>(a)]; }

  std::vector<std::pair<RobotId, RobotId>> edges() const {
    std::vector<std::pair<RobotId, RobotId>> out;
    for (std::size_t a = 0; a < adj_.size(); ++a)
      for (RobotId b : adj_[a])
        if (static_cast<RobotId>(a) < b) out.emplace_back(static_cast<RobotId>(a), b);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<std::vector<RobotId>> adj_;
};

/// Edge (i, j) iff the robots are within `comm_range` and have line of sight.
inline CommGraph build_comm_graph(const std::vector<Pose>& poses, const OccupancyGrid& grid, double comm_range) {
  CommGraph g(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i)
    for (std::size_t j = i + 1; j < poses.size(); ++j)
      if (distance(poses[i], poses[j]) <= comm_range && line_of_sight(grid, poses[i], poses[j]))
        g.add_edge(static_cast<RobotId>(i), static_cast<RobotId>(j));
  return g;
}

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (x != parent_[x]) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

/// Clusters as sorted member lists, ordered by smallest member.
using Partition = std::vector<std::vector<RobotId>>;

inline RobotId elect_leader(const std::vector<RobotId>& members) {
  if (members.empty()) throw std::invalid_argument("elect_leader: empty cluster");
  return *std::min_element(members.begin(), members.end());
}

struct MergeEvent {
  std::vector<std::size_t> sources;  // indices into the previous partition
  std::vector<RobotId> members;
};

struct SplitEvent {
  std::size_t source = 0;
  std::vector<RobotId> detached;
};

struct ClusterUpdate {
  Partition clusters;
  std::vector<MergeEvent> merges;
  std::vector<SplitEvent> splits;
  // for each new cluster, the previous cluster indices it absorbed
  std::vector<std::vector<std::size_t>> origin;
};

inline void normalize(Partition& p) {
  for (auto& c : p) std::sort(c.begin(), c.end());
  std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

/// Members of one cluster stay together; clusters joined by any cross edge merge (transitively).
/// Robots flagged in `failed` are detached into singletons and contribute no edges.
inline ClusterUpdate update_clusters(const Partition& current, const CommGraph& graph,
                                     const std::vector<RobotId>& failed = {}) {
  std::size_t n_robots = 0;
  for (const auto& c : current) n_robots += c.size();
  if (n_robots != graph.size()) throw std::invalid_argument("update_clusters: partition does not cover graph");

  std::set<RobotId> failed_set(failed.begin(), failed.end());
  // split failed robots off first
  Partition work;
  std::vector<std::size_t> work_source;
  std::vector<SplitEvent> splits;
  for (std::size_t ci = 0; ci < current.size(); ++ci) {
    std::vector<RobotId> healthy, detached;
    for (RobotId r : current[ci]) (failed_set.count(r) && current[ci].size() > 1 ? detached : healthy).push_back(r);
    if (!detached.empty()) splits.push_back({ci, detached});
    if (!healthy.empty()) {
      work.push_back(healthy);
      work_source.push_back(ci);
    }
    for (RobotId r : detached) {
      work.push_back({r});
      work_source.push_back(ci);
    }
  }

  std::vector<std::size_t> cluster_of(graph.size(), 0);
  for (std::size_t ci = 0; ci < work.size(); ++ci)
    for (RobotId r : work[ci]) cluster_of[static_cast<std::size_t>(r)] = ci;

  DisjointSet ds(work.size());
  for (const auto& [a, b] : graph.edges()) {
    if (failed_set.count(a) || failed_set.count(b)) continue;
    ds.unite(cluster_of[static_cast<std::size_t>(a)], cluster_of[static_cast<std::size_t>(b)]);
  }

  std::vector<std::vector<std::size_t>> groups(work.size());
  for (std::size_t ci = 0; ci < work.size(); ++ci) groups[ds.find(ci)].push_back(ci);

  ClusterUpdate up;
  up.splits = std::move(splits);
  for (const auto& g : groups) {
    if (g.empty()) continue;
    std::vector<RobotId> members;
    std::vector<std::size_t> sources;
    for (std::size_t ci : g) {
      members.insert(members.end(), work[ci].begin(), work[ci].end());
      sources.push_back(work_source[ci]);
    }
    std::sort(members.begin(), members.end());
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    up.clusters.push_back(members);
    up.origin.push_back(sources);
    if (g.size() > 1) up.merges.push_back({sources, members});
  }
  // order by smallest member, keeping origin aligned
  std::vector<std::size_t> order(up.clusters.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return up.clusters[a].front() < up.clusters[b].front(); });
  Partition sorted;
  std::vector<std::vector<std::size_t>> sorted_origin;
  for (std::size_t i : order) {
    sorted.push_back(up.clusters[i]);
    sorted_origin.push_back(up.origin[i]);
  }
  up.clusters = std::move(sorted);
  up.origin = std::move(sorted_origin);
  std::sort(up.merges.begin(), up.merges.end(),
            [](const MergeEvent& a, const MergeEvent& b) { return a.members.front() < b.members.front(); });
  return up;
}

inline std::size_t max_cluster_size(const Partition& p) {
  std::size_t best = 0;
  for (const auto& c : p) best = std::max(best, c.size());
  return best;
}

/// A connected robot group sharing one map, frontier set and trace.
struct Cluster {
  std::vector<RobotId> members;
  RobotId leader = 0;
  KnownMap map;
  FrontierSet frontiers;
  ExplorationTrace trace;
};

inline Cluster make_singleton(RobotId id, const GridShape& shape, double comm_range, std::size_t chunk_size) {
  Cluster c;
  c.members = {id};
  c.leader = id;
  c.map = KnownMap(shape);
  c.trace = ExplorationTrace(id, shape, comm_range, chunk_size);
  return c;
}

/// Union of two disjoint clusters: joined map, fresh real frontiers, merged trace and pruned virtual frontiers.
inline Cluster on_merge(const Cluster& a, const Cluster& b, int min_frontier_cells, FrontierIds& ids) {
  Cluster out;
  out.members = a.members;
  out.members.insert(out.members.end(), b.members.begin(), b.members.end());
  std::sort(out.members.begin(), out.members.end());
  if (std::adjacent_find(out.members.begin(), out.members.end()) != out.members.end())
    throw std::invalid_argument("on_merge: clusters are not disjoint");
  out.leader = elect_leader(out.members);
  const KnownMap* maps[] = {&a.map, &b.map};
  out.map = merge_maps(std::span<const KnownMap* const>(maps));
  out.frontiers.real = extract_frontiers(out.map, min_frontier_cells, ids);
  std::vector<Frontier> virt = a.frontiers.virtual_;
  virt.insert(virt.end(), b.frontiers.virtual_.begin(), b.frontiers.virtual_.end());
  auto merged = merge_traces({&a.trace, &b.trace}, virt, out.map, out.leader, ids);
  out.trace = std::move(merged.trace);
  out.frontiers.virtual_ = std::move(merged.virtual_frontiers);
  return out;
}

/// Follower j sits (j+1)*spacing of arc length behind the newest pose of `history`
/// (oldest first), clamped to the oldest pose.
inline std::vector<Pose> formation_targets(const std::vector<Pose>& history, std::size_t n_followers,
                                           double spacing) {
  if (!(spacing > 0.0)) throw ConfigError("formation spacing must be > 0");
  std::vector<Pose> out;
  if (n_followers == 0) return out;
  if (history.empty()) throw std::invalid_argument("formation_targets: empty leader history");
  out.reserve(n_followers);
  // walk backwards accumulating arc length
  std::size_t seg = history.size() - 1;  // current segment is [seg-1, seg]
  double walked = 0.0;
  for (std::size_t j = 0; j < n_followers; ++j) {
    const double want = static_cast<double>(j + 1) * spacing;
    while (seg > 0) {
      const double len = distance(history[seg - 1], history[seg]);
      if (walked + len >= want) break;
      walked += len;
      --seg;
    }
    if (seg == 0) {
      out.push_back(history.front());
      continue;
    }
    const Pose& a = history[seg - 1];
    const Pose& b = history[seg];
    const double len = distance(a, b);
    const double back = want - walked;  // distance back from b toward a
    const double f = len > 0.0 ? back / len : 0.0;
    out.push_back({b.x + (a.x - b.x) * f, b.y + (a.y - b.y) * f, wrap_angle(std::atan2(b.y - a.y, b.x - a.x))});
  }
  return out;
}

}  // namespace fbr
