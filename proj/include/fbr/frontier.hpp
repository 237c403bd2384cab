#pragma once

#include <functional>
#include <unordered_map>

#include "fbr/perception.hpp"

namespace fbr {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class FrontierKind : std::uint8_t { Real, Virtual };

using FrontierId = std::uint64_t;

/// Monotonic id source shared by every frontier created within one run.
class FrontierIds {
 public:
  FrontierId next() { return next_++; }

 private:
  FrontierId next_ = 0;
};

struct Frontier {
  FrontierId id = 0;
  FrontierKind kind = FrontierKind::Real;
  std::vector<Cell> cells;  // sorted row-major
  Cell target;
  double length_m = 0.0;
};

struct FrontierSet {
  std::vector<Frontier> real;
  std::vector<Frontier> virtual_;
};

/// Centroid of the cells, snapped to the nearest member when the centroid cell itself is not one.
inline Cell snapped_centroid(const std::vector<Cell>& cells) {
  double sx = 0.0, sy = 0.0;
  for (const Cell c : cells) {
    sx += c.x;
    sy += c.y;
  }
  const double mx = sx / static_cast<double>(cells.size());
  const double my = sy / static_cast<double>(cells.size());
  const Cell centroid{static_cast<int>(std::lround(mx)), static_cast<int>(std::lround(my))};
  if (std::binary_search(cells.begin(), cells.end(), centroid)) return centroid;
  Cell best = cells.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (const Cell c : cells) {
    const double d = (c.x - mx) * (c.x - mx) + (c.y - my) * (c.y - my);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

inline Frontier make_frontier(std::vector<Cell> cells, FrontierKind kind, double resolution, FrontierId id) {
  std::sort(cells.begin(), cells.end());
  Frontier f;
  f.id = id;
  f.kind = kind;
  f.target = snapped_centroid(cells);
  f.length_m = static_cast<double>(cells.size()) * resolution;
  f.cells = std::move(cells);
  return f;
}

/// 8-connected components of the marked cells, seeded in row-major order.
inline std::vector<std::vector<Cell>> connected_components(const GridShape& shape,
                                                           const std::vector<std::uint8_t>& mask) {
  std::vector<std::vector<Cell>> out;
  std::vector<std::uint8_t> seen(shape.size(), 0);
  std::vector<Cell> stack;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (!mask[i] || seen[i]) continue;
    std::vector<Cell> comp;
    seen[i] = 1;
    stack.push_back(shape.cell_at(i));
    while (!stack.empty()) {
      const Cell c = stack.back();
      stack.pop_back();
      comp.push_back(c);
      for (const Cell d : kNeighbors8) {
        const Cell n{c.x + d.x, c.y + d.y};
        if (!shape.contains(n)) continue;
        const std::size_t ni = shape.index(n);
        if (mask[ni] && !seen[ni]) {
          seen[ni] = 1;
          stack.push_back(n);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

inline std::vector<Frontier> extract_frontiers(const KnownMap& known, int min_cells, FrontierIds& ids) {
  if (min_cells < 1) throw ConfigError("extract_frontiers: min_cells must be >= 1");
  const GridShape& shape = known.shape();
  std::vector<std::uint8_t> mask(shape.size(), 0);
  for (std::size_t i = 0; i < shape.size(); ++i)
    if (known.at(i) == Knowledge::Free && known.is_frontier_cell(shape.cell_at(i))) mask[i] = 1;
  std::vector<Frontier> out;
  for (auto& comp : connected_components(shape, mask)) {
    if (comp.size() < static_cast<std::size_t>(min_cells)) continue;
    out.push_back(make_frontier(std::move(comp), FrontierKind::Real, shape.resolution, ids.next()));
  }
  return out;
}

inline std::vector<Frontier> extract_frontiers(const KnownMap& known, int min_cells) {
  FrontierIds ids;
  return extract_frontiers(known, min_cells, ids);
}

inline void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
}

/// Utility of a frontier: large and close is better.
inline double frontier_score(double length_m, double dist_m, double alpha) {
  check_alpha(alpha);
  return alpha * length_m - (1.0 - alpha) * dist_m;
}

inline double frontier_score(const Frontier& f, double dist_m, double alpha) {
  return frontier_score(f.length_m, dist_m, alpha);
}

struct Selection {
  Frontier frontier;
  double dist_m = 0.0;
  double score = 0.0;
};

/// Best reachable frontier of `fs` by score, ties broken by smaller distance then smaller id.
/// Distances are known-space shortest-path lengths. `skip` filters candidates out beforehand.
inline std::optional<Selection> select_frontier(const FrontierSet& fs, Cell robot_cell, const KnownMap& known,
                                                double alpha,
                                                const std::function<bool(const Frontier&)>& skip = {}) {
  check_alpha(alpha);
  const GridShape& shape = known.shape();
  std::unordered_map<std::size_t, std::vector<const Frontier*>> by_target;
  double max_len = 0.0;
  std::size_t pending = 0;
  for (const auto* group : {&fs.real, &fs.virtual_}) {
    for (const Frontier& f : *group) {
      if (skip && skip(f)) continue;
      if (!known.is_free(f.target)) continue;
      by_target[shape.index(f.target)].push_back(&f);
      max_len = std::max(max_len, f.length_m);
      ++pending;
    }
  }
  if (pending == 0) return std::nullopt;

  std::optional<Selection> best;
  auto better = [](const Selection& a, const Selection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.dist_m != b.dist_m) return a.dist_m < b.dist_m;
    return a.frontier.id < b.frontier.id;
  };
  distance_field(known, robot_cell, [&](Cell c, double d) {
    // nothing unsettled can beat the incumbent once this bound drops below it
    if (best && alpha * max_len - (1.0 - alpha) * d < best->score) return false;
    auto it = by_target.find(shape.index(c));
    if (it != by_target.end()) {
      for (const Frontier* f : it->second) {
        Selection s{*f, d, frontier_score(*f, d, alpha)};
        if (!best || better(s, *best)) best = std::move(s);
        --pending;
      }
    }
    return pending > 0;
  });
  return best;
}

}  // namespace fbr
