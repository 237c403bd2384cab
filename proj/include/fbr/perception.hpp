#pragma once

#include <random>
#include <span>

#include "fbr/gridworld.hpp"

namespace fbr {

// Ordered so that the cell-wise max is the merge join: Unknown < Free < Obstacle.
enum class Knowledge : std::uint8_t { Unknown = 0, Free = 1, Obstacle = 2 };

/// Tri-state belief map in the world frame.
class KnownMap {
 public:
  KnownMap() = default;
  explicit KnownMap(GridShape shape) : shape_(shape), cells_(shape.size(), Knowledge::Unknown) {}

  const GridShape& shape() const { return shape_; }
  int width() const { return shape_.width; }
  int height() const { return shape_.height; }
  double resolution() const { return shape_.resolution; }

  Knowledge at(Cell c) const { return cells_[shape_.index(c)]; }
  Knowledge at(std::size_t i) const { return cells_[i]; }
  void set(Cell c, Knowledge k) { cells_[shape_.index(c)] = k; }
  void set(std::size_t i, Knowledge k) { cells_[i] = k; }
  bool is_free(Cell c) const { return shape_.contains(c) && at(c) == Knowledge::Free; }
  bool is_unknown(Cell c) const { return shape_.contains(c) && at(c) == Knowledge::Unknown; }
  bool passable(Cell c) const { return is_free(c); }

  const std::vector<Knowledge>& cells() const { return cells_; }

  std::size_t known_count() const {
    return static_cast<std::size_t>(
        std::count_if(cells_.begin(), cells_.end(), [](Knowledge k) { return k != Knowledge::Unknown; }));
  }

  /// A Free cell with at least one Unknown 8-neighbour.
  bool is_frontier_cell(Cell c) const {
    if (!is_free(c)) return false;
    for (const Cell d : kNeighbors8)
      if (is_unknown({c.x + d.x, c.y + d.y})) return true;
    return false;
  }

  friend bool operator==(const KnownMap&, const KnownMap&) = default;

 private:
  GridShape shape_;
  std::vector<Knowledge> cells_;
};

struct Beam {
  double angle = 0.0;
  double hit_range = 0.0;
  bool hit = false;
};

struct LidarScan {
  Pose origin;
  std::vector<Beam> beams;
};

struct LidarOptions {
  double range = 10.0;
  int n_beams = 360;
  // Gaussian range noise, meters. Zero keeps sensing exact.
  double noise_sigma = 0.0;
};

inline LidarScan simulate_lidar(const OccupancyGrid& grid, const Pose& pose, double range, int n_beams) {
  if (n_beams < 1) throw GeometryError("simulate_lidar: n_beams must be >= 1");
  if (!grid.is_free(grid.shape().cell_of(pose))) throw GeometryError("simulate_lidar: pose is not in a free cell");
  LidarScan scan{pose, {}};
  scan.beams.reserve(static_cast<std::size_t>(n_beams));
  for (int j = 0; j < n_beams; ++j) {
    const double angle = 2.0 * std::numbers::pi * j / n_beams;
    const RayHit r = raycast(grid, pose, angle, range);
    scan.beams.push_back({angle, r.hit_range, r.hit});
  }
  return scan;
}

template <typename Rng>
LidarScan simulate_lidar(const OccupancyGrid& grid, const Pose& pose, const LidarOptions& opt, Rng& rng) {
  LidarScan scan = simulate_lidar(grid, pose, opt.range, opt.n_beams);
  if (opt.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, opt.noise_sigma);
    for (auto& b : scan.beams) b.hit_range = std::clamp(b.hit_range + noise(rng), 0.0, opt.range);
  }
  return scan;
}

/// Marks every cell the beam crosses before `hit_range` Free and the struck cell Obstacle.
/// Known cells are never demoted; an Obstacle is never overwritten by Free.
inline void integrate_beam(KnownMap& known, const Pose& origin, const Beam& beam) {
  // A ray through an exact cell corner enters two cells at the same distance; the range
  // cannot tell which one stopped it, so such a pair is left as it is.
  std::optional<Cell> end;
  double end_t = 0.0;
  bool ambiguous = false;
  walk_ray(known.shape(), origin.x, origin.y, beam.angle, [&](Cell c, double t) {
    if (t < beam.hit_range) {
      if (known.at(c) == Knowledge::Unknown) known.set(c, Knowledge::Free);
      return true;
    }
    if (!end) {
      end = c;
      end_t = t;
      return true;
    }
    ambiguous = t == end_t;
    return false;
  });
  if (beam.hit && end && !ambiguous) known.set(*end, Knowledge::Obstacle);
}

inline void integrate_scan(KnownMap& known, const LidarScan& scan) {
  if (!known.shape().contains(known.shape().cell_of(scan.origin)))
    throw GeometryError("integrate_scan: origin out of bounds");
  for (const Beam& b : scan.beams) integrate_beam(known, scan.origin, b);
}

/// Cell-wise join; the first map fixes the dimensions.
inline KnownMap merge_maps(std::span<const KnownMap* const> maps) {
  if (maps.empty()) throw GeometryError("merge_maps: no maps");
  KnownMap out = *maps.front();
  for (std::size_t m = 1; m < maps.size(); ++m) {
    const KnownMap& other = *maps[m];
    if (!(other.shape() == out.shape())) throw GeometryError("merge_maps: dimension mismatch");
    for (std::size_t i = 0; i < out.shape().size(); ++i) out.set(i, std::max(out.at(i), other.at(i)));
  }
  return out;
}

inline KnownMap merge_maps(const std::vector<KnownMap>& maps) {
  std::vector<const KnownMap*> ptrs;
  for (const auto& m : maps) ptrs.push_back(&m);
  return merge_maps(std::span<const KnownMap* const>(ptrs));
}

/// ASCII dump: '#' obstacle, '.' free, ' ' unknown.
inline std::string dump(const KnownMap& known) {
  std::string out;
  out.reserve(known.shape().size() + static_cast<std::size_t>(known.height()));
  for (int y = 0; y < known.height(); ++y) {
    for (int x = 0; x < known.width(); ++x) {
      switch (known.at(Cell{x, y})) {
        case Knowledge::Unknown: out += ' '; break;
        case Knowledge::Free: out += '.'; break;
        case Knowledge::Obstacle: out += '#'; break;
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace fbr
