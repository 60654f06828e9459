#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mrx/grid.hpp"

namespace mrx {

struct AssignmentParams {
  double lambda0 = 5.0;  // distance weight at full fidelity
  double lambda1 = 5.0;  // extra distance weight as fidelity drops to 0
  double rho0 = 1.0;     // repulsion weight at full fidelity
  double rho1 = 0.8;     // extra repulsion weight as fidelity drops to 0
  double beta = 0.5;     // goal-term weight inside the repulsion
  double sigma_x = 2.0;  // pose-term decay scale, cells
  double sigma_g = 2.0;  // goal-term decay scale, cells
  int interaction_radius = 3;
  int reassign_interval = 5;

  void validate() const;
};

struct FrontierCandidate {
  Cell cell;
  int utility = 0;
  int distance = 0;
  double repulsion = 0.0;
  double utility_norm = 0.0;
  double distance_norm = 0.0;
  double repulsion_norm = 0.0;
  double score = 0.0;
};

struct FidelityWeights {
  double lambda = 0.0;
  double rho = 0.0;
};

// lambda(p) = lambda0 + lambda1 (1 - p), rho(p) = rho0 + rho1 (1 - p).
FidelityWeights fidelity_weights(double fidelity, const AssignmentParams& params);

// Splits frontiers by nearest robot under BFS distance; ties go to the lower
// robot id. Frontiers no robot can reach are dropped. One field per robot.
std::vector<std::vector<Cell>> voronoi_filter(std::span<const Cell> frontiers,
                                              std::span<const DistanceField> robot_fields);

// Unknown cells in the Chebyshev window of the given radius around f.
int utility(const GridMap& map, Cell f, int sensing_radius);

// Inter-robot repulsion of assigning `robot` to a frontier, given the BFS
// distances from that frontier to every robot pose and every robot's current
// goal (index = robot id; the robot's own entries are ignored). Missing
// distances (unreachable, or no goal) contribute nothing.
double repulsion(int robot, std::span<const std::optional<int>> pose_distances,
                 std::span<const std::optional<int>> goal_distances,
                 const AssignmentParams& params);

// Convenience form taking a distance field rooted at the frontier.
double repulsion(int robot, std::span<const Cell> poses,
                 std::span<const std::optional<Cell>> goals, const DistanceField& frontier_field,
                 const AssignmentParams& params);

// Min-max normalizes utility, distance and repulsion over the list (a
// constant column normalizes to 0) and fills in the coupled score
//   score = u - lambda(p) d - rho(p) r.
void score_candidates(std::span<FrontierCandidate> candidates, double fidelity,
                      const AssignmentParams& params);

// Index of the highest score; ties go to the smaller distance, then to the
// row-major smaller cell. Empty input gives no index.
std::optional<std::size_t> best_candidate(std::span<const FrontierCandidate> candidates);

bool should_reassign(int step, int interval, std::optional<Cell> goal, Cell pose);

// Shared per-round inputs: the map snapshot, team state at the start of the
// round, one BFS field per robot pose and one per robot goal.
struct AssignmentContext {
  const GridMap* map = nullptr;
  std::vector<Cell> poses;
  std::vector<std::optional<Cell>> goals;
  std::vector<DistanceField> robot_fields;
  std::vector<DistanceField> goal_fields;  // all-unreachable when no goal
  std::vector<Cell> frontiers;
  std::vector<std::vector<Cell>> partition;
  int sensing_radius = 3;

  static AssignmentContext build(const GridMap& map, std::span<const Cell> poses,
                                 std::span<const std::optional<Cell>> goals,
                                 std::vector<DistanceField> robot_fields,
                                 std::vector<Cell> frontiers, int sensing_radius);

  int team_size() const { return static_cast<int>(poses.size()); }
};

// Scored candidate list for one robot over its Voronoi cell (unnormalized
// until score_candidates is applied).
std::vector<FrontierCandidate> build_candidates(int robot, const AssignmentContext& ctx,
                                                std::span<const Cell> cells,
                                                const AssignmentParams& params);

// Coupled frontier choice for one robot: argmax of the coupled score over its
// Voronoi subset; falls back to the globally nearest reachable frontier when
// the subset is empty; no goal when nothing is reachable.
std::optional<Cell> assign_target(int robot, const AssignmentContext& ctx, double fidelity,
                                  const AssignmentParams& params);

// Nearest reachable frontier (smaller distance, then row-major order).
std::optional<Cell> nearest_frontier(const DistanceField& field, std::span<const Cell> frontiers);

}  // namespace mrx
