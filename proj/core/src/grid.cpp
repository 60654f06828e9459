#include "mrx/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mrx/error.hpp"

namespace mrx {

GridMap::GridMap(int width, int height, CellState fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw ConfigError("grid dimensions must be positive, got " + std::to_string(width) + "x" +
                      std::to_string(height));
  }
  cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

void GridMap::fill(CellState s) { std::fill(cells_.begin(), cells_.end(), s); }

std::size_t GridMap::count(CellState s) const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), s));
}

Window GridMap::window(Cell center, int radius) const {
  return {std::max(0, center.row - radius), std::min(height_ - 1, center.row + radius),
          std::max(0, center.col - radius), std::min(width_ - 1, center.col + radius)};
}

GridMap parse_ascii_map(std::string_view text) {
  std::vector<std::string_view> rows;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    rows.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  if (rows.empty()) throw ConfigError("ascii map is empty");

  const auto width = rows.front().size();
  GridMap map(static_cast<int>(width), static_cast<int>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw ConfigError("ascii map row " + std::to_string(r) + " has width " +
                        std::to_string(rows[r].size()) + ", expected " + std::to_string(width));
    }
    for (std::size_t c = 0; c < width; ++c) {
      CellState s;
      switch (rows[r][c]) {
        case '.': s = CellState::Free; break;
        case '#': s = CellState::Occ; break;
        case '?': s = CellState::Unk; break;
        default:
          throw ConfigError(std::string("ascii map: unexpected character '") + rows[r][c] +
                            "' at row " + std::to_string(r));
      }
      map.set({static_cast<int>(r), static_cast<int>(c)}, s);
    }
  }
  return map;
}

std::string to_ascii(const GridMap& map) {
  std::string out;
  out.reserve(map.size() + static_cast<std::size_t>(map.height()));
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      switch (map.at(Cell{r, c})) {
        case CellState::Free: out.push_back('.'); break;
        case CellState::Occ: out.push_back('#'); break;
        case CellState::Unk: out.push_back('?'); break;
      }
    }
    out.push_back('\n');
  }
  return out;
}

GridMap load_ascii_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open map file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_ascii_map(buf.str());
}

void save_ascii_map(const GridMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write map file " + path.string());
  out << to_ascii(map);
}

DistanceField::DistanceField(int width, int height)
    : width_(width),
      height_(height),
      dist_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), kUnreachable) {}

std::optional<int> DistanceField::at(std::size_t idx) const {
  const int d = dist_[idx];
  if (d == kUnreachable) return std::nullopt;
  return d;
}

std::optional<int> DistanceField::at(Cell c) const {
  if (c.row < 0 || c.col < 0 || c.row >= height_ || c.col >= width_) return std::nullopt;
  return at(static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(c.col));
}

namespace {

void bfs_fill(const GridMap& map, Cell source, DistanceField& field) {
  auto dist = field.raw();
  const int w = map.width();
  const int h = map.height();
  std::vector<int> queue;
  queue.reserve(map.size());
  const int s = static_cast<int>(map.index(source));
  dist[static_cast<std::size_t>(s)] = 0;
  queue.push_back(s);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int idx = queue[head];
    const int r = idx / w;
    const int c = idx % w;
    const int next = dist[static_cast<std::size_t>(idx)] + 1;
    auto visit = [&](int n) {
      const auto un = static_cast<std::size_t>(n);
      if (dist[un] == DistanceField::kUnreachable && map.at(un) == CellState::Free) {
        dist[un] = next;
        queue.push_back(n);
      }
    };
    if (r > 0) visit(idx - w);
    if (r + 1 < h) visit(idx + w);
    if (c > 0) visit(idx - 1);
    if (c + 1 < w) visit(idx + 1);
  }
}

}  // namespace

DistanceField bfs_distance_field(const GridMap& map, Cell source) {
  if (!map.is_free(source)) {
    throw InvalidSource("bfs source (" + std::to_string(source.row) + ", " +
                        std::to_string(source.col) + ") is not a free cell");
  }
  DistanceField field(map.width(), map.height());
  bfs_fill(map, source, field);
  return field;
}

DistanceField bfs_distance_field_or_empty(const GridMap& map, Cell source) {
  DistanceField field(map.width(), map.height());
  if (map.is_free(source)) bfs_fill(map, source, field);
  return field;
}

std::vector<Cell> extract_frontiers(const GridMap& map) {
  std::vector<Cell> out;
  const int w = map.width();
  const int h = map.height();
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto idx = map.index({r, c});
      if (map.at(idx) != CellState::Free) continue;
      const bool borders_unknown = (r > 0 && map.at(idx - static_cast<std::size_t>(w)) == CellState::Unk) ||
                                   (r + 1 < h && map.at(idx + static_cast<std::size_t>(w)) == CellState::Unk) ||
                                   (c > 0 && map.at(idx - 1) == CellState::Unk) ||
                                   (c + 1 < w && map.at(idx + 1) == CellState::Unk);
      if (borders_unknown) out.push_back({r, c});
    }
  }
  return out;
}

int sense_and_fuse(GridMap& shared, const GridMap& truth, std::span<const Cell> obstacle_cells,
                   Cell pose, int sensing_radius) {
  if (shared.width() != truth.width() || shared.height() != truth.height()) {
    throw ConfigError("shared map and ground truth have different dimensions");
  }
  if (sensing_radius < 1) throw ConfigError("sensing radius must be >= 1");
  const Window win = shared.window(pose, sensing_radius);
  int newly_known = 0;
  for (int r = win.row0; r <= win.row1; ++r) {
    for (int c = win.col0; c <= win.col1; ++c) {
      const Cell cell{r, c};
      if (shared.at(cell) == CellState::Unk) ++newly_known;
      shared.set(cell, truth.at(cell));
    }
  }
  for (const Cell& o : obstacle_cells) {
    if (o.row >= win.row0 && o.row <= win.row1 && o.col >= win.col0 && o.col <= win.col1) {
      shared.set(o, CellState::Occ);
    }
  }
  return newly_known;
}

void ObstacleMarks::observe(const GridMap& shared, std::span<const Cell> obstacle_cells, Cell pose,
                            int sensing_radius, int step) {
  for (const Cell& o : obstacle_cells) {
    if (chebyshev(o, pose) > sensing_radius || !shared.in_bounds(o)) continue;
    const auto idx = shared.index(o);
    if (seen_[idx] < 0) active_.push_back(idx);
    seen_[idx] = step;
  }
}

int ObstacleMarks::expire(GridMap& shared, int step) {
  int reverted = 0;
  std::size_t keep = 0;
  for (std::size_t k = 0; k < active_.size(); ++k) {
    const auto idx = active_[k];
    if (shared.at(idx) != CellState::Occ) {
      seen_[idx] = -1;
      continue;
    }
    if (ttl_ > 0 && step - seen_[idx] >= ttl_) {
      shared.set(shared.cell_at(idx), CellState::Free);
      seen_[idx] = -1;
      ++reverted;
      continue;
    }
    active_[keep++] = idx;
  }
  active_.resize(keep);
  return reverted;
}

// ---------------------------------------------------------------------------

Cell apply(Cell c, Action a) {
  if (a == Action::Stay) return c;
  return c + kNeighbors4[static_cast<std::size_t>(a)];
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Up: return "Up";
    case Action::Down: return "Down";
    case Action::Left: return "Left";
    case Action::Right: return "Right";
    case Action::Stay: return "Stay";
  }
  return "Stay";
}

std::optional<Action> parse_action(std::string_view s) {
  for (Action a : kAllActions) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

int ActionSet::size() const {
  int n = 0;
  for (Action a : kAllActions) n += contains(a) ? 1 : 0;
  return n;
}

std::vector<Action> ActionSet::to_vector() const {
  std::vector<Action> out;
  for (Action a : kAllActions) {
    if (contains(a)) out.push_back(a);
  }
  return out;
}

ActionSet feasible_actions(const GridMap& map, Cell pose, std::span<const Cell> other_robots,
                           std::span<const Cell> obstacle_cells) {
  ActionSet set;
  set.insert(Action::Stay);
  for (std::size_t k = 0; k < kNeighbors4.size(); ++k) {
    const Cell target = pose + kNeighbors4[k];
    if (!map.is_free(target)) continue;
    if (std::find(obstacle_cells.begin(), obstacle_cells.end(), target) != obstacle_cells.end()) {
      continue;
    }
    if (std::find(other_robots.begin(), other_robots.end(), target) != other_robots.end()) {
      continue;
    }
    set.insert(static_cast<Action>(k));
  }
  return set;
}

// ---------------------------------------------------------------------------

std::vector<Cell> DynamicObstacleSet::positions() const {
  std::vector<Cell> out;
  out.reserve(items.size());
  for (const auto& o : items) out.push_back(o.cell);
  return out;
}

bool DynamicObstacleSet::contains(Cell c) const {
  return std::any_of(items.begin(), items.end(), [c](const auto& o) { return o.cell == c; });
}

DynamicObstacleSet make_obstacles(std::span<const Cell> cells, std::uint64_t seed,
                                  double speed_ratio) {
  if (!(speed_ratio > 0.0 && speed_ratio < 1.0)) {
    throw ConfigError("obstacle speed ratio must lie in (0, 1)");
  }
  DynamicObstacleSet set;
  set.speed_ratio = speed_ratio;
  set.items.reserve(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    DynamicObstacle o;
    o.cell = cells[k];
    o.rng = Rng(mix_seed(seed, k));
    o.heading = static_cast<int>(o.rng.below(4));
    set.items.push_back(o);
  }
  return set;
}

bool obstacle_move_due(int step, double speed_ratio) {
  // Moves happen when the accumulated distance crosses an integer.
  return std::floor(step * speed_ratio) > std::floor((step - 1) * speed_ratio);
}

void step_dynamic_obstacles(DynamicObstacleSet& obstacles, const GridMap& truth,
                            std::span<const Cell> robots, int step) {
  if (!obstacle_move_due(step, obstacles.speed_ratio)) return;
  for (auto& o : obstacles.items) {
    const double u = o.rng.uniform();
    if (o.blocked || u >= obstacles.keep_heading_probability) {
      o.heading = static_cast<int>(o.rng.below(4));
    }
    const Cell target = o.cell + kNeighbors4[static_cast<std::size_t>(o.heading)];
    const bool open = truth.is_free(target) && !obstacles.contains(target) &&
                      std::find(robots.begin(), robots.end(), target) == robots.end();
    if (open) {
      o.cell = target;
      o.blocked = false;
    } else {
      o.blocked = true;
    }
  }
}

}  // namespace mrx
