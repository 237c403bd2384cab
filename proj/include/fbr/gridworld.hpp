#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fbr {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Cell {
  int x = 0;
  int y = 0;
  friend constexpr bool operator==(const Cell&, const Cell&) = default;
  // row-major order, matches the index order used everywhere else
  friend constexpr std::strong_ordering operator<=>(const Cell& a, const Cell& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  if (a >= two_pi) a = 0.0;
  return a;
}

inline double distance(const Pose& a, const Pose& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Grid dimensions shared by the world, belief maps and bitmaps.
struct GridShape {
  int width = 0;
  int height = 0;
  double resolution = 0.1;

  std::size_t size() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  bool contains(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c.x);
  }
  Cell cell_at(std::size_t i) const {
    return {static_cast<int>(i % static_cast<std::size_t>(width)), static_cast<int>(i / static_cast<std::size_t>(width))};
  }
  Cell cell_of(double x, double y) const {
    return {static_cast<int>(std::floor(x / resolution)), static_cast<int>(std::floor(y / resolution))};
  }
  Cell cell_of(const Pose& p) const { return cell_of(p.x, p.y); }
  Pose center_of(Cell c, double heading = 0.0) const {
    return {(c.x + 0.5) * resolution, (c.y + 0.5) * resolution, heading};
  }
  bool on_border(Cell c) const { return c.x == 0 || c.y == 0 || c.x == width - 1 || c.y == height - 1; }
  double cell_area() const { return resolution * resolution; }

  friend bool operator==(const GridShape&, const GridShape&) = default;
};

inline constexpr std::array<Cell, 8> kNeighbors8 = {
    Cell{-1, -1}, Cell{0, -1}, Cell{1, -1}, Cell{-1, 0}, Cell{1, 0}, Cell{-1, 1}, Cell{0, 1}, Cell{1, 1}};

enum class Terrain : std::uint8_t { Free, Obstacle };

/// Ground-truth world. Immutable once constructed.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;

  /// Builds a grid; with `closed_border` every boundary cell is forced to Obstacle.
  OccupancyGrid(int width, int height, double resolution, std::vector<Terrain> cells, bool closed_border = true)
      : shape_{width, height, resolution}, cells_(std::move(cells)) {
    if (width < 1 || height < 1) throw GeometryError("grid dimensions must be positive");
    if (!(resolution > 0.0) || !std::isfinite(resolution)) throw GeometryError("grid resolution must be > 0");
    if (cells_.size() != shape_.size()) throw GeometryError("cell count does not match width*height");
    if (closed_border) {
      for (int x = 0; x < width; ++x) {
        cells_[shape_.index({x, 0})] = Terrain::Obstacle;
        cells_[shape_.index({x, height - 1})] = Terrain::Obstacle;
      }
      for (int y = 0; y < height; ++y) {
        cells_[shape_.index({0, y})] = Terrain::Obstacle;
        cells_[shape_.index({width - 1, y})] = Terrain::Obstacle;
      }
    }
  }

  const GridShape& shape() const { return shape_; }
  int width() const { return shape_.width; }
  int height() const { return shape_.height; }
  double resolution() const { return shape_.resolution; }

  Terrain at(Cell c) const { return cells_[shape_.index(c)]; }
  bool is_free(Cell c) const { return shape_.contains(c) && at(c) == Terrain::Free; }
  bool passable(Cell c) const { return is_free(c); }
  const std::vector<Terrain>& cells() const { return cells_; }

  std::size_t free_count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), Terrain::Free));
  }

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  GridShape shape_;
  std::vector<Terrain> cells_;
};

/// Parses the ASCII map format:
///
///     resolution 0.1
///     [border open|closed]
///     #####
///     #...#
///     #####
///
/// The optional `border` line defaults to `closed`, which forces the outer ring to obstacles.
inline OccupancyGrid load_map(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string line(text.substr(start, end - start));
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(std::move(line));
      start = end + 1;
    }
  }
  auto rtrim = [](std::string s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
    return s;
  };
  if (lines.empty()) throw ParseError(1, "empty map");

  double resolution = 0.0;
  {
    std::istringstream in(lines[0]);
    std::string key;
    std::string extra;
    if (!(in >> key) || key != "resolution" || !(in >> resolution) || (in >> extra))
      throw ParseError(1, "expected header 'resolution <meters-per-cell>'");
    if (!(resolution > 0.0) || !std::isfinite(resolution)) throw ParseError(1, "resolution must be > 0");
  }

  std::size_t body = 1;
  bool closed = true;
  if (lines.size() > 1 && lines[1].rfind("border", 0) == 0) {
    std::istringstream in(lines[1]);
    std::string key, mode, extra;
    in >> key >> mode;
    if (key != "border" || (mode != "open" && mode != "closed") || (in >> extra))
      throw ParseError(2, "expected 'border open' or 'border closed'");
    closed = mode == "closed";
    body = 2;
  }

  std::vector<std::string> rows;
  std::size_t width = 0;
  for (std::size_t i = body; i < lines.size(); ++i) {
    std::string row = rtrim(lines[i]);
    const std::size_t line_no = i + 1;
    if (row.empty()) {
      // blank lines are only allowed as trailing padding
      for (std::size_t j = i + 1; j < lines.size(); ++j)
        if (!rtrim(lines[j]).empty()) throw ParseError(line_no, "blank line inside map body");
      break;
    }
    for (char ch : row)
      if (ch != '#' && ch != '.') throw ParseError(line_no, std::string("illegal character '") + ch + "'");
    if (rows.empty()) {
      width = row.size();
    } else if (row.size() != width) {
      throw ParseError(line_no, "ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(body + 1, "map body is empty");

  std::vector<Terrain> cells;
  cells.reserve(rows.size() * width);
  for (const auto& row : rows)
    for (char ch : row) cells.push_back(ch == '#' ? Terrain::Obstacle : Terrain::Free);
  return OccupancyGrid(static_cast<int>(width), static_cast<int>(rows.size()), resolution, std::move(cells), closed);
}

inline std::string save_map(const OccupancyGrid& grid) {
  std::ostringstream out;
  out.precision(17);
  out << "resolution " << grid.resolution() << '\n';
  bool open_border = false;
  for (std::size_t i = 0; i < grid.shape().size() && !open_border; ++i) {
    const Cell c = grid.shape().cell_at(i);
    open_border = grid.shape().on_border(c) && grid.at(c) == Terrain::Free;
  }
  if (open_border) out << "border open\n";
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) out << (grid.at({x, y}) == Terrain::Obstacle ? '#' : '.');
    out << '\n';
  }
  return out.str();
}

/// Every cell whose closed square touches the segment between the centres of `a` and `b`.
/// Integer-only supercover walk; corner crossings emit both side cells.
template <typename Visit>
  requires std::invocable<Visit, Cell>
void supercover(Cell a, Cell b, Visit&& visit) {
  int x = a.x, y = a.y;
  int dx = b.x - a.x, dy = b.y - a.y;
  const int xstep = dx < 0 ? -1 : 1;
  const int ystep = dy < 0 ? -1 : 1;
  dx = std::abs(dx);
  dy = std::abs(dy);
  const int ddx = 2 * dx, ddy = 2 * dy;
  visit(Cell{x, y});
  if (ddx >= ddy) {
    int error = dx, prev = dx;
    for (int i = 0; i < dx; ++i) {
      x += xstep;
      error += ddy;
      if (error > ddx) {
        y += ystep;
        error -= ddx;
        if (error + prev < ddx) {
          visit(Cell{x, y - ystep});
        } else if (error + prev > ddx) {
          visit(Cell{x - xstep, y});
        } else {
          visit(Cell{x, y - ystep});
          visit(Cell{x - xstep, y});
        }
      }
      visit(Cell{x, y});
      prev = error;
    }
  } else {
    int error = dy, prev = dy;
    for (int i = 0; i < dy; ++i) {
      y += ystep;
      error += ddx;
      if (error > ddy) {
        x += xstep;
        error -= ddy;
        if (error + prev < ddy) {
          visit(Cell{x - xstep, y});
        } else if (error + prev > ddy) {
          visit(Cell{x, y - ystep});
        } else {
          visit(Cell{x - xstep, y});
          visit(Cell{x, y - ystep});
        }
      }
      visit(Cell{x, y});
      prev = error;
    }
  }
}

inline std::vector<Cell> supercover_cells(Cell a, Cell b) {
  std::vector<Cell> out;
  supercover(a, b, [&](Cell c) { out.push_back(c); });
  return out;
}

inline bool line_of_sight(const OccupancyGrid& grid, Cell a, Cell b) {
  if (!grid.shape().contains(a) || !grid.shape().contains(b)) throw GeometryError("line_of_sight: cell out of bounds");
  bool clear = true;
  supercover(a, b, [&](Cell c) {
    if (clear && grid.at(c) == Terrain::Obstacle) clear = false;
  });
  return clear;
}

inline bool line_of_sight(const OccupancyGrid& grid, const Pose& a, const Pose& b) {
  return line_of_sight(grid, grid.shape().cell_of(a), grid.shape().cell_of(b));
}

/// Amanatides-Woo traversal. `visit(cell, entry_distance)` is called for each cell in order,
/// starting with the origin cell at distance 0; returning false stops the walk. The walk also
/// stops when it leaves the grid.
template <typename Visit>
  requires std::predicate<Visit, Cell, double>
void walk_ray(const GridShape& shape, double ox, double oy, double angle, Visit&& visit) {
  const double res = shape.resolution;
  const double dir_x = std::cos(angle);
  const double dir_y = std::sin(angle);
  Cell c = shape.cell_of(ox, oy);
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int step_x = dir_x > 0 ? 1 : (dir_x < 0 ? -1 : 0);
  const int step_y = dir_y > 0 ? 1 : (dir_y < 0 ? -1 : 0);
  double t_max_x = inf, t_max_y = inf, t_delta_x = inf, t_delta_y = inf;
  if (step_x != 0) {
    const double boundary = (step_x > 0 ? c.x + 1 : c.x) * res;
    t_max_x = (boundary - ox) / dir_x;
    t_delta_x = res / std::abs(dir_x);
  }
  if (step_y != 0) {
    const double boundary = (step_y > 0 ? c.y + 1 : c.y) * res;
    t_max_y = (boundary - oy) / dir_y;
    t_delta_y = res / std::abs(dir_y);
  }
  double t = 0.0;
  while (shape.contains(c)) {
    if (!visit(c, t)) return;
    if (t_max_x < t_max_y) {
      t = t_max_x;
      t_max_x += t_delta_x;
      c.x += step_x;
    } else {
      t = t_max_y;
      t_max_y += t_delta_y;
      c.y += step_y;
    }
    if (!std::isfinite(t)) return;
  }
}

struct RayHit {
  double hit_range = 0.0;
  bool hit = false;
};

/// Distance to the first obstacle cell boundary along the ray, capped at `max_range`.
/// Leaving the grid counts as a hit at the grid boundary.
inline RayHit raycast(const OccupancyGrid& grid, const Pose& origin, double angle, double max_range) {
  if (!(max_range > 0.0)) throw GeometryError("raycast: max_range must be > 0");
  if (!grid.shape().contains(grid.shape().cell_of(origin))) throw GeometryError("raycast: origin out of bounds");
  RayHit result{max_range, false};
  double last_t = 0.0;
  bool finished = false;
  walk_ray(grid.shape(), origin.x, origin.y, angle, [&](Cell c, double t) {
    last_t = t;
    if (t >= max_range) {
      finished = true;
      return false;
    }
    if (grid.at(c) == Terrain::Obstacle) {
      result = {t, true};
      finished = true;
      return false;
    }
    return true;
  });
  if (!finished) {
    // ray left the grid; the exit boundary is the next crossing after last_t
    double exit_t = max_range;
    const double dx = std::cos(angle), dy = std::sin(angle);
    const double w = grid.width() * grid.resolution(), h = grid.height() * grid.resolution();
    if (dx > 0) exit_t = std::min(exit_t, (w - origin.x) / dx);
    if (dx < 0) exit_t = std::min(exit_t, -origin.x / dx);
    if (dy > 0) exit_t = std::min(exit_t, (h - origin.y) / dy);
    if (dy < 0) exit_t = std::min(exit_t, -origin.y / dy);
    exit_t = std::max(exit_t, last_t);
    if (exit_t < max_range) result = {exit_t, true};
  }
  return result;
}

struct GridPath {
  std::vector<Cell> waypoints;
  double length = 0.0;
};

/// Anything plannable: dimensions plus a per-cell traversability test.
template <typename M>
concept Traversable = requires(const M& m, Cell c) {
  { m.shape() } -> std::convertible_to<GridShape>;
  { m.passable(c) } -> std::convertible_to<bool>;
};

/// 8-connected step rule: a diagonal move needs both orthogonal neighbours passable, so a path
/// never grazes an obstacle corner.
template <Traversable M, typename Visit>
void for_each_move(const M& map, Cell from, Visit&& visit) {
  const double res = map.shape().resolution;
  const double diag = res * std::numbers::sqrt2;
  for (const Cell d : kNeighbors8) {
    const Cell to{from.x + d.x, from.y + d.y};
    if (!map.passable(to)) continue;
    if (d.x != 0 && d.y != 0) {
      if (!map.passable(Cell{from.x + d.x, from.y}) || !map.passable(Cell{from.x, from.y + d.y})) continue;
      visit(to, diag);
    } else {
      visit(to, res);
    }
  }
}

inline double octile(Cell a, Cell b, double res) {
  const int dx = std::abs(a.x - b.x), dy = std::abs(a.y - b.y);
  return res * (std::max(dx, dy) - std::min(dx, dy)) + res * std::numbers::sqrt2 * std::min(dx, dy);
}

/// A* over passable cells. Returns nullopt when `to` is blocked or disconnected.
template <Traversable M>
std::optional<GridPath> plan_path(const M& map, Cell from, Cell to) {
  const GridShape shape = map.shape();
  if (!map.passable(from) || !map.passable(to)) return std::nullopt;
  if (from == to) return GridPath{{from}, 0.0};

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> g(shape.size(), inf);
  std::vector<std::int64_t> parent(shape.size(), -1);
  std::vector<std::uint8_t> closed(shape.size(), 0);
  struct Entry {
    double f;
    double g;
    std::size_t index;
    bool operator>(const Entry& o) const {
      if (f != o.f) return f > o.f;
      if (g != o.g) return g < o.g;
      return index > o.index;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const std::size_t start = shape.index(from), goal = shape.index(to);
  g[start] = 0.0;
  open.push({octile(from, to, shape.resolution), 0.0, start});
  while (!open.empty()) {
    const Entry e = open.top();
    open.pop();
    if (closed[e.index]) continue;
    closed[e.index] = 1;
    if (e.index == goal) break;
    const Cell cur = shape.cell_at(e.index);
    for_each_move(map, cur, [&](Cell next, double cost) {
      const std::size_t ni = shape.index(next);
      if (closed[ni]) return;
      const double ng = e.g + cost;
      if (ng < g[ni]) {
        g[ni] = ng;
        parent[ni] = static_cast<std::int64_t>(e.index);
        open.push({ng + octile(next, to, shape.resolution), ng, ni});
      }
    });
  }
  if (!closed[goal]) return std::nullopt;
  GridPath path;
  for (std::int64_t i = static_cast<std::int64_t>(goal); i != -1; i = parent[static_cast<std::size_t>(i)])
    path.waypoints.push_back(shape.cell_at(static_cast<std::size_t>(i)));
  std::reverse(path.waypoints.begin(), path.waypoints.end());
  path.length = g[goal];
  return path;
}

/// Single-source shortest distances (meters) with the same move rule as plan_path.
/// `settle(cell, dist)` sees cells in non-decreasing distance order and may return false to stop early;
/// unsettled cells keep +inf.
template <Traversable M, typename Settle>
std::vector<double> distance_field(const M& map, Cell from, Settle&& settle) {
  const GridShape shape = map.shape();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(shape.size(), inf);
  if (!map.passable(from)) return dist;
  std::vector<double> tentative(shape.size(), inf);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  tentative[shape.index(from)] = 0.0;
  open.push({0.0, shape.index(from)});
  while (!open.empty()) {
    const auto [d, i] = open.top();
    open.pop();
    if (dist[i] != inf) continue;
    dist[i] = d;
    const Cell cur = shape.cell_at(i);
    if (!settle(cur, d)) break;
    for_each_move(map, cur, [&](Cell next, double cost) {
      const std::size_t ni = shape.index(next);
      if (dist[ni] != inf) return;
      const double nd = d + cost;
      if (nd < tentative[ni]) {
        tentative[ni] = nd;
        open.push({nd, ni});
      }
    });
  }
  return dist;
}

template <Traversable M>
std::vector<double> distance_field(const M& map, Cell from) {
  return distance_field(map, from, [](Cell, double) { return true; });
}

/// Flood fill over passable cells (8-connected, same move rule as the planner).
template <Traversable M>
std::vector<std::uint8_t> reachable_from(const M& map, Cell from) {
  const GridShape shape = map.shape();
  std::vector<std::uint8_t> seen(shape.size(), 0);
  if (!map.passable(from)) return seen;
  std::vector<Cell> stack{from};
  seen[shape.index(from)] = 1;
  while (!stack.empty()) {
    const Cell c = stack.back();
    stack.pop_back();
    for_each_move(map, c, [&](Cell n, double) {
      auto& s = seen[shape.index(n)];
      if (!s) {
        s = 1;
        stack.push_back(n);
      }
    });
  }
  return seen;
}

}  // namespace fbr
