#pragma once

#include <deque>

#include "fbr/frontier.hpp"

namespace fbr {

struct TracePose {
  Pose pose;
  double timestamp = 0.0;
  std::size_t ordinal = 0;
  std::size_t chunk_id = 0;
};

/// Cells whose centre lies within `radius` of (x, y).
template <typename Visit>
void for_each_disk_cell(const GridShape& shape, double x, double y, double radius, Visit&& visit) {
  const double res = shape.resolution;
  const int x0 = std::max(0, static_cast<int>(std::floor((x - radius) / res)));
  const int x1 = std::min(shape.width - 1, static_cast<int>(std::floor((x + radius) / res)));
  const int y0 = std::max(0, static_cast<int>(std::floor((y - radius) / res)));
  const int y1 = std::min(shape.height - 1, static_cast<int>(std::floor((y + radius) / res)));
  const double r2 = radius * radius;
  for (int cy = y0; cy <= y1; ++cy) {
    const double dy = (cy + 0.5) * res - y;
    for (int cx = x0; cx <= x1; ++cx) {
      const double dx = (cx + 0.5) * res - x;
      if (dx * dx + dy * dy <= r2) visit(Cell{cx, cy});
    }
  }
}

/// Timestamped pose chain plus the union of footprint disks around the active poses.
///
/// Poses are grouped into chunks of `chunk_size` consecutive ordinals; decay always removes the
/// oldest whole chunk. Coverage is kept as a per-cell disk count so removal is incremental.
class ExplorationTrace {
 public:
  ExplorationTrace() = default;
  ExplorationTrace(int owner, GridShape shape, double radius, std::size_t chunk_size)
      : owner_(owner), shape_(shape), radius_(radius), chunk_size_(chunk_size), coverage_(shape.size(), 0) {
    if (!(radius > 0.0)) throw ConfigError("trace footprint radius must be > 0");
    if (chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
  }

  int owner() const { return owner_; }
  void set_owner(int owner) { owner_ = owner; }
  const GridShape& shape() const { return shape_; }
  double radius() const { return radius_; }
  std::size_t chunk_size() const { return chunk_size_; }
  const std::deque<TracePose>& poses() const { return poses_; }
  bool empty() const { return poses_.empty(); }

  bool covers(Cell c) const { return shape_.contains(c) && coverage_[shape_.index(c)] > 0; }
  bool covers(std::size_t i) const { return coverage_[i] > 0; }

  std::vector<std::uint8_t> footprint() const {
    std::vector<std::uint8_t> out(coverage_.size());
    for (std::size_t i = 0; i < coverage_.size(); ++i) out[i] = coverage_[i] > 0;
    return out;
  }

  std::size_t footprint_count() const {
    return static_cast<std::size_t>(std::count_if(coverage_.begin(), coverage_.end(), [](auto v) { return v > 0; }));
  }

  void append_pose(const Pose& pose, double now) {
    TracePose tp{pose, now, next_ordinal_, next_ordinal_ / chunk_size_};
    ++next_ordinal_;
    add_disk(pose, 1);
    poses_.push_back(tp);
  }

  /// Drops the oldest chunk; returns its poses and the cells no longer covered.
  std::pair<std::vector<TracePose>, std::vector<Cell>> pop_oldest_chunk() {
    std::vector<TracePose> removed;
    if (poses_.empty()) return {};
    const std::size_t chunk = poses_.front().chunk_id;
    while (!poses_.empty() && poses_.front().chunk_id == chunk) {
      removed.push_back(poses_.front());
      poses_.pop_front();
    }
    std::vector<Cell> vanished;
    for (const TracePose& tp : removed) {
      for_each_disk_cell(shape_, tp.pose.x, tp.pose.y, radius_, [&](Cell c) {
        auto& n = coverage_[shape_.index(c)];
        if (--n == 0) vanished.push_back(c);
      });
    }
    std::sort(vanished.begin(), vanished.end());
    return {std::move(removed), std::move(vanished)};
  }

  /// Newest timestamp within the oldest chunk, if any.
  std::optional<double> oldest_chunk_newest_time() const {
    if (poses_.empty()) return std::nullopt;
    const std::size_t chunk = poses_.front().chunk_id;
    double t = poses_.front().timestamp;
    for (const auto& tp : poses_) {
      if (tp.chunk_id != chunk) break;
      t = tp.timestamp;
    }
    return t;
  }

  /// Replaces the pose chain, renumbering ordinals and chunks from zero.
  void assign(std::vector<TracePose> poses) {
    poses_.clear();
    std::fill(coverage_.begin(), coverage_.end(), 0);
    next_ordinal_ = 0;
    for (auto& tp : poses) {
      tp.ordinal = next_ordinal_;
      tp.chunk_id = next_ordinal_ / chunk_size_;
      ++next_ordinal_;
      add_disk(tp.pose, 1);
      poses_.push_back(tp);
    }
  }

 private:
  void add_disk(const Pose& p, int delta) {
    for_each_disk_cell(shape_, p.x, p.y, radius_,
                       [&](Cell c) { coverage_[shape_.index(c)] = static_cast<std::uint16_t>(coverage_[shape_.index(c)] + delta); });
  }

  int owner_ = 0;
  GridShape shape_;
  double radius_ = 2.7;
  std::size_t chunk_size_ = 9;
  std::deque<TracePose> poses_;
  std::vector<std::uint16_t> coverage_;
  std::size_t next_ordinal_ = 0;
};

/// Union of disks recomputed from scratch; used to cross-check the incremental coverage.
inline std::vector<std::uint8_t> recompute_footprint(const GridShape& shape, const std::deque<TracePose>& poses,
                                                     double radius) {
  std::vector<std::uint8_t> out(shape.size(), 0);
  for (const auto& tp : poses)
    for_each_disk_cell(shape, tp.pose.x, tp.pose.y, radius, [&](Cell c) { out[shape.index(c)] = 1; });
  return out;
}

struct DecayEvent {
  std::vector<TracePose> removed_poses;
  std::vector<Cell> vanished_region;
  std::vector<Frontier> new_virtual_frontiers;
};

/// Virtual frontiers along the inner contour of a vanished region: Free cells of the region with an
/// 8-neighbour outside it, split into 8-connected components.
inline std::vector<Frontier> contour_frontiers(const std::vector<Cell>& region, const KnownMap& known,
                                               FrontierIds& ids) {
  const GridShape& shape = known.shape();
  if (region.empty()) return {};
  std::vector<std::uint8_t> inside(shape.size(), 0);
  for (const Cell c : region) inside[shape.index(c)] = 1;
  std::vector<std::uint8_t> contour(shape.size(), 0);
  bool any = false;
  for (const Cell c : region) {
    if (!known.is_free(c)) continue;
    for (const Cell d : kNeighbors8) {
      const Cell n{c.x + d.x, c.y + d.y};
      if (shape.contains(n) && !inside[shape.index(n)]) {
        contour[shape.index(c)] = 1;
        any = true;
        break;
      }
    }
  }
  std::vector<Frontier> out;
  if (!any) return out;
  for (auto& comp : connected_components(shape, contour))
    out.push_back(make_frontier(std::move(comp), FrontierKind::Virtual, shape.resolution, ids.next()));
  return out;
}

/// Removes every chunk whose newest pose is older than `decay_seconds`, oldest first, one event per chunk.
/// A second call at the same `now` is a no-op.
inline std::vector<DecayEvent> decay_step(ExplorationTrace& trace, const KnownMap& known, double now,
                                          double decay_seconds, FrontierIds& ids) {
  if (!(decay_seconds > 0.0)) throw ConfigError("decay time must be > 0");
  std::vector<DecayEvent> events;
  while (auto newest = trace.oldest_chunk_newest_time()) {
    if (!(now - *newest > decay_seconds)) break;
    auto [removed, vanished] = trace.pop_oldest_chunk();
    DecayEvent ev;
    ev.new_virtual_frontiers = contour_frontiers(vanished, known, ids);
    ev.removed_poses = std::move(removed);
    ev.vanished_region = std::move(vanished);
    events.push_back(std::move(ev));
  }
  return events;
}

/// Drops every virtual-frontier cell covered by `trace`, re-splitting what survives into
/// 8-connected parts. Untouched frontiers keep their id; split or trimmed ones get fresh ids.
inline std::vector<Frontier> prune_virtual(const std::vector<Frontier>& frontiers, const ExplorationTrace& trace,
                                           const KnownMap& known, FrontierIds& ids) {
  const GridShape& shape = known.shape();
  std::vector<Frontier> out;
  for (const Frontier& f : frontiers) {
    std::vector<Cell> keep;
    for (const Cell c : f.cells)
      if (!trace.covers(c) && known.is_free(c)) keep.push_back(c);
    if (keep.empty()) continue;
    if (keep.size() == f.cells.size()) {
      out.push_back(f);
      continue;
    }
    std::vector<std::uint8_t> mask(shape.size(), 0);
    for (const Cell c : keep) mask[shape.index(c)] = 1;
    for (auto& comp : connected_components(shape, mask))
      out.push_back(make_frontier(std::move(comp), FrontierKind::Virtual, shape.resolution, ids.next()));
  }
  return out;
}

struct MergedTraces {
  ExplorationTrace trace;
  std::vector<Frontier> virtual_frontiers;
};

/// Joins active traces into one owned by `new_owner` and prunes virtual frontiers against it.
inline MergedTraces merge_traces(const std::vector<const ExplorationTrace*>& traces,
                                 const std::vector<Frontier>& cluster_virtual, const KnownMap& known, int new_owner,
                                 FrontierIds& ids) {
  if (traces.empty()) throw ConfigError("merge_traces: no traces");
  const ExplorationTrace& first = *traces.front();
  std::vector<TracePose> all;
  for (const auto* t : traces) all.insert(all.end(), t->poses().begin(), t->poses().end());
  std::stable_sort(all.begin(), all.end(),
                   [](const TracePose& a, const TracePose& b) { return a.timestamp < b.timestamp; });
  MergedTraces out{ExplorationTrace(new_owner, first.shape(), first.radius(), first.chunk_size()), {}};
  if (traces.size() == 1) {
    out.trace = first;
    out.trace.set_owner(new_owner);
  } else {
    out.trace.assign(std::move(all));
  }
  out.virtual_frontiers = prune_virtual(cluster_virtual, out.trace, known, ids);
  return out;
}

}  // namespace fbr
