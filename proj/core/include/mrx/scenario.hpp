#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrx/assignment.hpp"
#include "mrx/execution.hpp"
#include "mrx/gate.hpp"
#include "mrx/grid.hpp"
#include "mrx/metrics.hpp"

namespace mrx {

struct ScenarioConfig {
  std::string name;  // empty: derived from the dimensions and counts
  int width = 40;
  int height = 40;
  int team_size = 4;
  double static_density = 0.3;
  // When above static_density, each seed draws its density uniformly from
  // [static_density, static_density_max].
  double static_density_max = -1.0;
  int dynamic_obstacles = 32;
  double speed_ratio = 0.5;
  int sensing_radius = 3;
  int interaction_radius = 3;
  int horizon = 0;  // 0: 8 * (width + height)
  // Steps a dynamic-obstacle mark survives in the shared map without being
  // re-observed; 0 keeps marks until the cell is sensed again.
  int obstacle_memory = 8;
  std::uint64_t seed = 0;
  bool strict_collisions = false;
  int max_generation_attempts = 32;

  AssignmentParams assignment;
  HysteresisConfig hysteresis;
  LearningParams learning;
  SurrogateWeights surrogate;
  int history_window = 8;
  int update_interval = 4;
  RecoveryConfig recovery;
  PotentialFieldParams reactive;
  ObjectiveWeights objective;
  std::string warm_params;     // gate parameter file for warm variants
  std::string policy_command;  // external reactive policy; empty: built-in

  int effective_horizon() const { return horizon > 0 ? horizon : 8 * (width + height); }
  std::string label() const;
  void validate() const;
};

struct Scenario {
  GridMap truth;
  std::vector<Cell> starts;
  DynamicObstacleSet obstacles;
  double density_before_repair = 0.0;
  double density_after_repair = 0.0;
  int attempts = 1;
};

// Bernoulli static map, reduced to its largest free component (other free
// pockets become Occ), then robot starts and obstacles drawn without
// replacement from that component. Retries with derived seeds when the
// component is too small.
Scenario generate_scenario(const ScenarioConfig& config);

// Labels of the free 4-connected components, -1 for non-free cells.
std::vector<int> label_free_components(const GridMap& map, int* count = nullptr);

}  // namespace mrx
