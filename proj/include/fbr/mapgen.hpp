#pragma once

#include <random>

#include "fbr/gridworld.hpp"

namespace fbr {

class MapGenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MapStyle : std::uint8_t { Ring, Office, Campus };

inline MapStyle parse_map_style(std::string_view s) {
  if (s == "ring") return MapStyle::Ring;
  if (s == "office") return MapStyle::Office;
  if (s == "campus") return MapStyle::Campus;
  throw MapGenError("unknown map style '" + std::string(s) + "'");
}

inline const char* to_string(MapStyle s) {
  switch (s) {
    case MapStyle::Ring: return "ring";
    case MapStyle::Office: return "office";
    case MapStyle::Campus: return "campus";
  }
  return "?";
}

namespace mapgen {

inline constexpr double kWall = 0.2;
inline constexpr double kCorridor = 2.0;
inline constexpr double kDoor = 1.0;
inline constexpr double kMinRoom = 1.6;

/// Obstacle-filled raster that rectangles are carved out of, addressed in meters.
class Canvas {
 public:
  Canvas(double width_m, double height_m, double resolution)
      : res_(resolution),
        w_(static_cast<int>(std::lround(width_m / resolution))),
        h_(static_cast<int>(std::lround(height_m / resolution))),
        cells_(static_cast<std::size_t>(w_) * static_cast<std::size_t>(h_), Terrain::Obstacle) {}

  int to_cell(double m) const { return static_cast<int>(std::lround(m / res_)); }

  /// Frees [x0, x1) x [y0, y1) in meters.
  void carve(double x0, double y0, double x1, double y1) {
    const int cx0 = std::max(1, to_cell(x0)), cx1 = std::min(w_ - 1, to_cell(x1));
    const int cy0 = std::max(1, to_cell(y0)), cy1 = std::min(h_ - 1, to_cell(y1));
    for (int y = cy0; y < cy1; ++y)
      for (int x = cx0; x < cx1; ++x) cells_[static_cast<std::size_t>(y) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(x)] = Terrain::Free;
  }

  OccupancyGrid finish() && { return OccupancyGrid(w_, h_, res_, std::move(cells_), true); }

 private:
  double res_;
  int w_, h_;
  std::vector<Terrain> cells_;
};

/// Axis-aligned strip of rooms; the corridor lies on side `door_side` (0=-y, 1=+y, 2=-x, 3=+x).
struct Strip {
  double x0, y0, x1, y1;
  int door_side;
  int rooms = 0;

  bool horizontal() const { return door_side < 2; }
  double length() const { return horizontal() ? x1 - x0 : y1 - y0; }
};

/// Hands out rooms one at a time to the strip whose rooms would stay widest.
inline void allocate_rooms(std::vector<Strip>& strips, int room_count, std::mt19937_64& rng) {
  std::vector<std::size_t> order(strips.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int r = 0; r < room_count; ++r) {
    std::size_t best = order.front();
    double best_w = -1.0;
    for (std::size_t i : order) {
      const double w = strips[i].length() / (strips[i].rooms + 1);
      if (w > best_w + 1e-12) {
        best_w = w;
        best = i;
      }
    }
    ++strips[best].rooms;
  }
}

/// Carves the rooms of a strip plus one door per room through the wall on the corridor side.
inline void carve_strip(Canvas& canvas, const Strip& s, std::mt19937_64& rng) {
  if (s.rooms == 0) return;
  const double len = s.length();
  const double usable = len - (s.rooms - 1) * kWall;
  if (usable / s.rooms < kMinRoom) throw MapGenError("rooms do not fit: increase size or reduce room count");
  std::uniform_real_distribution<double> jitter(0.75, 1.25);
  std::vector<double> widths(static_cast<std::size_t>(s.rooms));
  double total = 0.0;
  for (auto& w : widths) total += (w = jitter(rng));
  for (auto& w : widths) w = std::max(kMinRoom, w / total * usable);
  total = std::accumulate(widths.begin(), widths.end(), 0.0);
  for (auto& w : widths) w *= usable / total;

  double at = s.horizontal() ? s.x0 : s.y0;
  for (const double w : widths) {
    const double a = at, b = at + w;
    const double door_room = std::min(kDoor, w - 0.4);
    std::uniform_real_distribution<double> door_pos(a + 0.2, b - 0.2 - door_room);
    const double d0 = door_pos(rng);
    const double d1 = d0 + door_room;
    if (s.horizontal()) {
      canvas.carve(a, s.y0, b, s.y1);
      if (s.door_side == 0) canvas.carve(d0, s.y0 - kWall, d1, s.y0);
      else canvas.carve(d0, s.y1, d1, s.y1 + kWall);
    } else {
      canvas.carve(s.x0, a, s.x1, b);
      if (s.door_side == 2) canvas.carve(s.x0 - kWall, d0, s.x0, d1);
      else canvas.carve(s.x1, d0, s.x1 + kWall, d1);
    }
    at = b + kWall;
  }
}

/// Rooms hung off both sides of a square annular corridor.
inline OccupancyGrid ring(double side, int room_count, double res, std::mt19937_64& rng) {
  const double half = side / 2.0;
  const double outer_depth = 0.3 * half;
  const double inner_depth = 0.25 * half;
  const double o1 = kWall + outer_depth + kWall;  // corridor outer edge
  const double o2 = o1 + kCorridor + kWall;        // inner rooms start
  const double core = side - 2.0 * (o2 + inner_depth + kWall);
  if (outer_depth < kMinRoom || core < 0.0) throw MapGenError("ring map too small");

  Canvas canvas(side, side, res);
  const double c0 = o1, c1 = side - o1;
  canvas.carve(c0, c0, c1, c0 + kCorridor);
  canvas.carve(c0, c1 - kCorridor, c1, c1);
  canvas.carve(c0, c0, c0 + kCorridor, c1);
  canvas.carve(c1 - kCorridor, c0, c1, c1);

  const double ow0 = kWall, ow1 = kWall + outer_depth;
  const double i0 = o2, i1 = o2 + inner_depth;
  std::vector<Strip> strips = {
      // outer band, corners left solid so every room borders the corridor
      {c0, ow0, c1, ow1, 1},
      {c0, side - ow1, c1, side - ow0, 0},
      {ow0, c0 + kCorridor + kWall, ow1, c1 - kCorridor - kWall, 3},
      {side - ow1, c0 + kCorridor + kWall, side - ow0, c1 - kCorridor - kWall, 2},
      // inner band
      {i0, i0, side - i0, i1, 0},
      {i0, side - i1, side - i0, side - i0, 1},
      {i0, i1 + kWall, i1, side - i1 - kWall, 2},
      {side - i1, i1 + kWall, side - i0, side - i1 - kWall, 3},
  };
  allocate_rooms(strips, room_count, rng);
  for (const auto& s : strips) carve_strip(canvas, s, rng);
  return std::move(canvas).finish();
}

/// Office floor at an offset inside `canvas`: a perimeter corridor plus a grid of corridors between
/// `blocks` x `blocks` room blocks. Each block is two back-to-back rows of rooms.
inline void office_into(Canvas& canvas, double ox, double oy, double side, int blocks, int room_count,
                        std::mt19937_64& rng) {
  const double block = (side - 2.0 * kWall - (blocks + 1) * kCorridor - 2.0 * blocks * kWall) / blocks;
  if (block < 2.0 * kMinRoom + kWall) throw MapGenError("office map too small");
  const double pitch = kCorridor + kWall + block + kWall;
  std::vector<Strip> strips;
  for (int i = 0; i <= blocks; ++i) {
    const double c = kWall + i * pitch;
    canvas.carve(ox + kWall, oy + c, ox + side - kWall, oy + c + kCorridor);
    canvas.carve(ox + c, oy + kWall, ox + c + kCorridor, oy + side - kWall);
  }
  for (int by = 0; by < blocks; ++by) {
    for (int bx = 0; bx < blocks; ++bx) {
      const double x0 = ox + kWall + bx * pitch + kCorridor + kWall;
      const double y0 = oy + kWall + by * pitch + kCorridor + kWall;
      const double mid = (block - kWall) / 2.0;
      strips.push_back({x0, y0, x0 + block, y0 + mid, 0});
      strips.push_back({x0, y0 + mid + kWall, x0 + block, y0 + block, 1});
    }
  }
  allocate_rooms(strips, room_count, rng);
  for (const auto& s : strips) carve_strip(canvas, s, rng);
}

inline int office_blocks(double side) { return side >= 36.0 ? 3 : (side >= 20.0 ? 2 : 1); }

}  // namespace mapgen

/// Procedural indoor map with a single connected Free component.
inline OccupancyGrid generate_map(MapStyle style, double size_m2, int room_count, std::uint64_t seed,
                                  double resolution = 0.1) {
  if (!(size_m2 > 0.0)) throw MapGenError("map size must be > 0");
  if (room_count < 0) throw MapGenError("room count must be >= 0");
  if (!(resolution > 0.0)) throw MapGenError("resolution must be > 0");
  std::mt19937_64 rng(seed);
  OccupancyGrid grid;
  switch (style) {
    case MapStyle::Ring:
      grid = mapgen::ring(std::sqrt(size_m2), room_count, resolution, rng);
      break;
    case MapStyle::Office: {
      const double side = std::sqrt(size_m2);
      mapgen::Canvas canvas(side, side, resolution);
      mapgen::office_into(canvas, 0.0, 0.0, side, mapgen::office_blocks(side), room_count, rng);
      grid = std::move(canvas).finish();
      break;
    }
    case MapStyle::Campus: {
      const double gap = 4.0;
      const double side = std::sqrt(size_m2 / 2.0);
      mapgen::Canvas canvas(2.0 * side + gap, side, resolution);
      const int blocks = mapgen::office_blocks(side);
      const int left = room_count / 2;
      mapgen::office_into(canvas, 0.0, 0.0, side, blocks, left, rng);
      mapgen::office_into(canvas, side + gap, 0.0, side, blocks, room_count - left, rng);
      // connector through the gap at the middle corridor row
      const double y = mapgen::kWall + (blocks / 2) * (mapgen::kCorridor + 2 * mapgen::kWall +
                                                       (side - 2.0 * mapgen::kWall - (blocks + 1) * mapgen::kCorridor -
                                                        2.0 * blocks * mapgen::kWall) / blocks);
      canvas.carve(side - 2.0 * mapgen::kWall, y, side + gap + 2.0 * mapgen::kWall, y + mapgen::kCorridor);
      grid = std::move(canvas).finish();
      break;
    }
  }
  // every Free cell must be reachable from every other
  const std::size_t free = grid.free_count();
  if (free == 0) throw MapGenError("generated map has no free space");
  Cell start{};
  for (std::size_t i = 0; i < grid.shape().size(); ++i)
    if (grid.at(grid.shape().cell_at(i)) == Terrain::Free) {
      start = grid.shape().cell_at(i);
      break;
    }
  const auto seen = reachable_from(grid, start);
  if (static_cast<std::size_t>(std::count(seen.begin(), seen.end(), 1)) != free)
    throw MapGenError("generated map is not connected");
  return grid;
}

}  // namespace fbr
