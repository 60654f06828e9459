#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mrx/rng.hpp"

namespace mrx {

enum class CellState : std::uint8_t { Free, Occ, Unk };

struct Cell {
  int row = 0;
  int col = 0;

  // Row-major order; used for every deterministic tie-break.
  auto operator<=>(const Cell&) const = default;
};

inline Cell operator+(Cell a, Cell b) { return {a.row + b.row, a.col + b.col}; }

inline int manhattan(Cell a, Cell b) {
  const int dr = a.row - b.row;
  const int dc = a.col - b.col;
  return (dr < 0 ? -dr : dr) + (dc < 0 ? -dc : dc);
}

inline int chebyshev(Cell a, Cell b) {
  const int dr = a.row > b.row ? a.row - b.row : b.row - a.row;
  const int dc = a.col > b.col ? a.col - b.col : b.col - a.col;
  return dr > dc ? dr : dc;
}

// Four-neighbor offsets in action order: Up, Down, Left, Right.
inline constexpr std::array<Cell, 4> kNeighbors4{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};

// Inclusive, bounds-clamped square window.
struct Window {
  int row0 = 0;
  int row1 = -1;
  int col0 = 0;
  int col1 = -1;

  int cell_count() const { return (row1 - row0 + 1) * (col1 - col0 + 1); }
};

class GridMap {
 public:
  GridMap() = default;
  GridMap(int width, int height, CellState fill = CellState::Unk);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return cells_.size(); }

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.col >= 0 && c.row < height_ && c.col < width_;
  }
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.col);
  }
  Cell cell_at(std::size_t idx) const {
    return {static_cast<int>(idx / static_cast<std::size_t>(width_)),
            static_cast<int>(idx % static_cast<std::size_t>(width_))};
  }

  CellState at(Cell c) const { return cells_[index(c)]; }
  CellState at(std::size_t idx) const { return cells_[idx]; }
  void set(Cell c, CellState s) { cells_[index(c)] = s; }
  void fill(CellState s);

  bool is_free(Cell c) const { return in_bounds(c) && at(c) == CellState::Free; }

  std::size_t count(CellState s) const;
  std::span<const CellState> cells() const { return cells_; }

  // Chebyshev ball of the given radius around center, clamped to the map.
  Window window(Cell center, int radius) const;

  bool operator==(const GridMap&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<CellState> cells_;
};

// ASCII fixtures: '.' Free, '#' Occ, '?' Unk, one row per line.
GridMap parse_ascii_map(std::string_view text);
std::string to_ascii(const GridMap& map);
GridMap load_ascii_map(const std::filesystem::path& path);
void save_ascii_map(const GridMap& map, const std::filesystem::path& path);

// Per-cell BFS step counts. Unreachable cells carry no value.
class DistanceField {
 public:
  DistanceField() = default;
  DistanceField(int width, int height);

  std::optional<int> at(Cell c) const;
  std::optional<int> at(std::size_t idx) const;
  bool reachable(Cell c) const { return at(c).has_value(); }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return dist_.empty(); }

  // Raw storage; kUnreachable marks missing entries.
  static constexpr int kUnreachable = -1;
  std::span<const int> raw() const { return dist_; }
  std::span<int> raw() { return dist_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<int> dist_;
};

// Unit-cost BFS through Free cells. Throws InvalidSource if source is not Free.
DistanceField bfs_distance_field(const GridMap& map, Cell source);

// Same, but returns an all-unreachable field for a non-Free source.
DistanceField bfs_distance_field_or_empty(const GridMap& map, Cell source);

// Free cells with at least one Unk four-neighbor, in row-major order.
std::vector<Cell> extract_frontiers(const GridMap& map);

// Overwrites the sensing window around pose with ground truth and marks the
// given obstacle cells inside it as Occ. Returns the number of cells that were
// Unk before the call and are known after it.
int sense_and_fuse(GridMap& shared, const GridMap& truth,
                   std::span<const Cell> obstacle_cells, Cell pose, int sensing_radius);

// Remembers which shared-map Occ cells came from dynamic-obstacle sightings.
// A mark that has not been re-observed for `ttl` steps reverts to Free: the
// sighting already showed that the static layer there is free. With ttl <= 0
// marks stay until the cell is sensed again.
class ObstacleMarks {
 public:
  explicit ObstacleMarks(std::size_t cells = 0, int ttl = 0) : ttl_(ttl), seen_(cells, -1) {}

  // Records the obstacle cells inside the sensing window around pose.
  void observe(const GridMap& shared, std::span<const Cell> obstacle_cells, Cell pose,
               int sensing_radius, int step);
  // Drops marks that sensing already cleared and reverts expired ones.
  // Returns the number of cells reverted to Free.
  int expire(GridMap& shared, int step);

  std::size_t active() const { return active_.size(); }

 private:
  int ttl_;
  std::vector<int> seen_;
  std::vector<std::size_t> active_;
};

// ---------------------------------------------------------------------------
// Actions

enum class Action : std::uint8_t { Up = 0, Down = 1, Left = 2, Right = 3, Stay = 4 };

inline constexpr std::array<Action, 5> kAllActions{Action::Up, Action::Down, Action::Left,
                                                   Action::Right, Action::Stay};

Cell apply(Cell c, Action a);
std::string_view to_string(Action a);
std::optional<Action> parse_action(std::string_view s);

class ActionSet {
 public:
  constexpr ActionSet() = default;

  static ActionSet all() {
    ActionSet s;
    s.bits_ = 0x1f;
    return s;
  }

  void insert(Action a) { bits_ |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(a)); }
  void erase(Action a) { bits_ &= static_cast<std::uint8_t>(~(1u << static_cast<unsigned>(a))); }
  bool contains(Action a) const { return (bits_ >> static_cast<unsigned>(a)) & 1u; }
  int size() const;
  std::vector<Action> to_vector() const;

  bool operator==(const ActionSet&) const = default;

 private:
  std::uint8_t bits_ = 0;
};

// A move is feasible iff its target is in bounds, Free in the map, not an
// obstacle cell and not occupied by another robot. Stay is always feasible.
ActionSet feasible_actions(const GridMap& map, Cell pose, std::span<const Cell> other_robots,
                           std::span<const Cell> obstacle_cells);

// ---------------------------------------------------------------------------
// Dynamic obstacles

struct DynamicObstacle {
  Cell cell;
  int heading = 0;  // index into kNeighbors4
  bool blocked = false;
  Rng rng;
};

struct DynamicObstacleSet {
  std::vector<DynamicObstacle> items;
  double speed_ratio = 0.5;
  double keep_heading_probability = 0.8;

  std::vector<Cell> positions() const;
  bool contains(Cell c) const;
  std::size_t size() const { return items.size(); }
};

// Creates obstacles at the given cells with independent random streams.
DynamicObstacleSet make_obstacles(std::span<const Cell> cells, std::uint64_t seed,
                                  double speed_ratio);

// True on steps where an obstacle with the given speed ratio takes a move.
// For a ratio of 0.5 this is every even step.
bool obstacle_move_due(int step, double speed_ratio);

// Heading-persistent random walk. On due steps each obstacle (in index order)
// keeps its heading with probability keep_heading_probability, otherwise (or
// if its previous move was blocked) draws a fresh heading uniformly; the move
// is cancelled if the target is out of bounds, static Occ in the truth, an
// obstacle cell or a robot cell.
void step_dynamic_obstacles(DynamicObstacleSet& obstacles, const GridMap& truth,
                            std::span<const Cell> robots, int step);

}  // namespace mrx
