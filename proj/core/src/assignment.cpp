#include "mrx/assignment.hpp"

#include <algorithm>
#include <cmath>

#include "mrx/error.hpp"

namespace mrx {

void AssignmentParams::validate() const {
  if (lambda0 < 0 || lambda1 < 0 || rho0 < 0 || rho1 < 0 || beta < 0) {
    throw ConfigError("assignment weights must be non-negative");
  }
  if (!(sigma_x > 0) || !(sigma_g > 0)) throw ConfigError("sigma_x and sigma_g must be positive");
  if (interaction_radius < 0) throw ConfigError("interaction radius must be non-negative");
  if (reassign_interval < 1) throw ConfigError("reassign interval must be >= 1");
}

FidelityWeights fidelity_weights(double fidelity, const AssignmentParams& params) {
  const double slack = 1.0 - fidelity;
  return {params.lambda0 + params.lambda1 * slack, params.rho0 + params.rho1 * slack};
}

std::vector<std::vector<Cell>> voronoi_filter(std::span<const Cell> frontiers,
                                              std::span<const DistanceField> robot_fields) {
  std::vector<std::vector<Cell>> out(robot_fields.size());
  for (const Cell& f : frontiers) {
    int owner = -1;
    int best = 0;
    for (std::size_t i = 0; i < robot_fields.size(); ++i) {
      const auto d = robot_fields[i].at(f);
      if (d && (owner < 0 || *d < best)) {
        owner = static_cast<int>(i);
        best = *d;
      }
    }
    if (owner >= 0) out[static_cast<std::size_t>(owner)].push_back(f);
  }
  return out;
}

int utility(const GridMap& map, Cell f, int sensing_radius) {
  const Window win = map.window(f, sensing_radius);
  int n = 0;
  for (int r = win.row0; r <= win.row1; ++r) {
    for (int c = win.col0; c <= win.col1; ++c) {
      n += map.at(Cell{r, c}) == CellState::Unk ? 1 : 0;
    }
  }
  return n;
}

double repulsion(int robot, std::span<const std::optional<int>> pose_distances,
                 std::span<const std::optional<int>> goal_distances,
                 const AssignmentParams& params) {
  const auto n = pose_distances.size();
  if (n <= 1) return 0.0;
  double pose_term = 0.0;
  double goal_term = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (static_cast<int>(j) == robot) continue;
    const auto& dx = pose_distances[j];
    if (dx && *dx <= params.interaction_radius) pose_term += std::exp(-*dx / params.sigma_x);
    if (j < goal_distances.size()) {
      const auto& dg = goal_distances[j];
      if (dg && *dg <= params.interaction_radius) goal_term += std::exp(-*dg / params.sigma_g);
    }
  }
  const double scale = 1.0 / static_cast<double>(n - 1);
  return scale * pose_term + params.beta * scale * goal_term;
}

double repulsion(int robot, std::span<const Cell> poses, std::span<const std::optional<Cell>> goals,
                 const DistanceField& frontier_field, const AssignmentParams& params) {
  std::vector<std::optional<int>> pose_d(poses.size());
  std::vector<std::optional<int>> goal_d(goals.size());
  for (std::size_t j = 0; j < poses.size(); ++j) pose_d[j] = frontier_field.at(poses[j]);
  for (std::size_t j = 0; j < goals.size(); ++j) {
    if (goals[j]) goal_d[j] = frontier_field.at(*goals[j]);
  }
  return repulsion(robot, pose_d, goal_d, params);
}

namespace {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  double normalize(double v) const { return hi > lo ? (v - lo) / (hi - lo) : 0.0; }
};

template <typename Get>
Range range_of(std::span<const FrontierCandidate> cands, Get get) {
  Range r{get(cands.front()), get(cands.front())};
  for (const auto& c : cands) {
    r.lo = std::min(r.lo, get(c));
    r.hi = std::max(r.hi, get(c));
  }
  return r;
}

}  // namespace

void score_candidates(std::span<FrontierCandidate> candidates, double fidelity,
                      const AssignmentParams& params) {
  if (candidates.empty()) return;
  const std::span<const FrontierCandidate> view(candidates);
  const Range u = range_of(view, [](const auto& c) { return static_cast<double>(c.utility); });
  const Range d = range_of(view, [](const auto& c) { return static_cast<double>(c.distance); });
  const Range r = range_of(view, [](const auto& c) { return c.repulsion; });
  const FidelityWeights wts = fidelity_weights(fidelity, params);
  for (auto& c : candidates) {
    c.utility_norm = u.normalize(c.utility);
    c.distance_norm = d.normalize(c.distance);
    c.repulsion_norm = r.normalize(c.repulsion);
    c.score = c.utility_norm - wts.lambda * c.distance_norm - wts.rho * c.repulsion_norm;
  }
}

std::optional<std::size_t> best_candidate(std::span<const FrontierCandidate> candidates) {
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (!best) {
      best = k;
      continue;
    }
    const auto& a = candidates[k];
    const auto& b = candidates[*best];
    if (a.score != b.score) {
      if (a.score > b.score) best = k;
    } else if (a.distance != b.distance) {
      if (a.distance < b.distance) best = k;
    } else if (a.cell < b.cell) {
      best = k;
    }
  }
  return best;
}

bool should_reassign(int step, int interval, std::optional<Cell> goal, Cell pose) {
  return step % interval == 0 || !goal || *goal == pose;
}

AssignmentContext AssignmentContext::build(const GridMap& map, std::span<const Cell> poses,
                                           std::span<const std::optional<Cell>> goals,
                                           std::vector<DistanceField> robot_fields,
                                           std::vector<Cell> frontiers, int sensing_radius) {
  if (robot_fields.size() != poses.size() || goals.size() != poses.size()) {
    throw ConfigError("assignment context: one pose, goal and field per robot required");
  }
  AssignmentContext ctx;
  ctx.map = &map;
  ctx.poses.assign(poses.begin(), poses.end());
  ctx.goals.assign(goals.begin(), goals.end());
  ctx.robot_fields = std::move(robot_fields);
  ctx.frontiers = std::move(frontiers);
  ctx.sensing_radius = sensing_radius;
  ctx.goal_fields.reserve(goals.size());
  for (const auto& g : goals) {
    ctx.goal_fields.push_back(g ? bfs_distance_field_or_empty(map, *g)
                                : DistanceField(map.width(), map.height()));
  }
  ctx.partition = voronoi_filter(ctx.frontiers, ctx.robot_fields);
  return ctx;
}

std::vector<FrontierCandidate> build_candidates(int robot, const AssignmentContext& ctx,
                                                std::span<const Cell> cells,
                                                const AssignmentParams& params) {
  const auto n = ctx.poses.size();
  const auto& own = ctx.robot_fields[static_cast<std::size_t>(robot)];
  std::vector<FrontierCandidate> out;
  out.reserve(cells.size());
  std::vector<std::optional<int>> pose_d(n);
  std::vector<std::optional<int>> goal_d(n);
  for (const Cell& f : cells) {
    const auto d = own.at(f);
    if (!d) continue;
    // BFS distances on the free grid are symmetric, so fields rooted at the
    // teammates (and their goals) give the distances from f.
    for (std::size_t j = 0; j < n; ++j) {
      pose_d[j] = ctx.robot_fields[j].at(f);
      goal_d[j] = ctx.goals[j] ? ctx.goal_fields[j].at(f) : std::nullopt;
    }
    FrontierCandidate c;
    c.cell = f;
    c.distance = *d;
    c.utility = utility(*ctx.map, f, ctx.sensing_radius);
    c.repulsion = repulsion(robot, pose_d, goal_d, params);
    out.push_back(c);
  }
  return out;
}

std::optional<Cell> nearest_frontier(const DistanceField& field, std::span<const Cell> frontiers) {
  std::optional<Cell> best;
  int best_d = 0;
  for (const Cell& f : frontiers) {
    const auto d = field.at(f);
    if (d && (!best || *d < best_d)) {
      best = f;
      best_d = *d;
    }
  }
  return best;
}

std::optional<Cell> assign_target(int robot, const AssignmentContext& ctx, double fidelity,
                                  const AssignmentParams& params) {
  const auto& subset = ctx.partition[static_cast<std::size_t>(robot)];
  if (subset.empty()) {
    return nearest_frontier(ctx.robot_fields[static_cast<std::size_t>(robot)], ctx.frontiers);
  }
  auto cands = build_candidates(robot, ctx, subset, params);
  score_candidates(cands, fidelity, params);
  const auto best = best_candidate(cands);
  if (!best) return std::nullopt;
  return cands[*best].cell;
}

}  // namespace mrx
