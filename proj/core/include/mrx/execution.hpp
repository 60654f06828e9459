#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrx/gate.hpp"
#include "mrx/grid.hpp"
#include "mrx/rng.hpp"

namespace mrx {

struct PlanResult {
  Action action = Action::Stay;
  bool ok = false;
  int cost = -1;  // optimal path length when ok
};

// A* with the Manhattan heuristic over Free, non-blocked cells of the shared
// map. Returns the first step of an optimal path, or (Stay, false) when there
// is no goal or it cannot be reached.
PlanResult plan_astar(const GridMap& map, Cell start, std::optional<Cell> goal,
                      std::span<const Cell> blocked);

// ---------------------------------------------------------------------------
// Local observation handed to the reactive branch.
//
// serialize() layout, all integers:
//   radius, has_goal, goal_dr, goal_dc,
//   cells[(2r+1)^2]      0 free, 1 occupied or off-map, 2 unknown
//   obstacles[(2r+1)^2]  1 where a dynamic obstacle is seen
//   teammates[(2r+1)^2]  1 where another robot is seen
// Window cells are row-major with the robot at the center.
struct Observation {
  int radius = 0;
  bool has_goal = false;
  int goal_dr = 0;
  int goal_dc = 0;
  std::vector<std::uint8_t> cells;
  std::vector<std::uint8_t> obstacles;
  std::vector<std::uint8_t> teammates;

  int side() const { return 2 * radius + 1; }
  // Window index of the offset (dr, dc) from the robot, or -1 outside.
  int index(int dr, int dc) const;
  bool passable(int dr, int dc) const;
  ActionSet feasible() const;

  std::vector<int> serialize() const;
  static Observation deserialize(std::span<const int> data);
  std::string to_line() const;

  bool operator==(const Observation&) const = default;
};

Observation build_observation(const GridMap& map, Cell pose, std::optional<Cell> goal,
                              std::span<const Cell> teammates, std::span<const Cell> obstacles,
                              int radius);

class ReactivePolicy {
 public:
  virtual ~ReactivePolicy() = default;
  virtual Action act(const Observation& obs, Rng& rng) const = 0;
};

struct PotentialFieldParams {
  double obstacle_penalty = 0.6;  // per obstacle next to the target cell
  double teammate_penalty = 0.3;  // per teammate next to the target cell
  double stay_penalty = 0.25;
  double jitter = 1e-3;           // scale of the seeded tie-break noise

  void validate() const;
};

// Baseline reactive branch: scores each feasible action by its drop in a
// window-local navigation potential (steps inside the window plus Manhattan
// distance to the goal from the exit cell), minus a proximity penalty for
// obstacles and teammates next to the target, plus seeded jitter.
class PotentialFieldPolicy final : public ReactivePolicy {
 public:
  explicit PotentialFieldPolicy(PotentialFieldParams params = {});
  Action act(const Observation& obs, Rng& rng) const override;

  // Window-local navigation potential, row-major; negative where impassable.
  std::vector<int> potential(const Observation& obs) const;

 private:
  PotentialFieldParams params_;
};

// Runs an external policy as a child process. Each query writes
// Observation::to_line() plus a newline to its stdin and reads one action
// name (Up, Down, Left, Right, Stay) from its stdout.
class SubprocessPolicy final : public ReactivePolicy {
 public:
  explicit SubprocessPolicy(const std::string& command);
  ~SubprocessPolicy() override;
  SubprocessPolicy(const SubprocessPolicy&) = delete;
  SubprocessPolicy& operator=(const SubprocessPolicy&) = delete;

  Action act(const Observation& obs, Rng& rng) const override;

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  mutable std::string buffer_;
};

// s = 1 takes the planner action, s = 0 the reactive one.
Action arbitrate(int switch_state, const PlanResult& plan, Action reactive);

// ---------------------------------------------------------------------------
// Recovery override

enum class RecoveryTrigger : std::uint8_t { None, Infeasible, Stalled, Oscillating };

std::string_view to_string(RecoveryTrigger t);

struct RecoveryConfig {
  int window = 8;
  int length = 4;
  int oscillation_flips = 3;

  void validate() const;
};

struct RecoveryState {
  bool active = false;
  int remaining = 0;
  RecoveryTrigger reason = RecoveryTrigger::None;

  bool operator==(const RecoveryState&) const = default;
};

// Evaluated on the last `window` records; needs a full window with no
// recovery steps in it.
RecoveryTrigger detect_recovery_trigger(const HistoryBuffer& history, const RecoveryConfig& config);

struct RecoveryDecision {
  Action action = Action::Stay;
  RecoveryState state;
  bool started = false;
};

// Passes the proposal through unless recovery is active or triggers now. In
// recovery the action is the (robot_id + step) mod |choices| entry of the
// feasible non-Stay moves, in action order.
RecoveryDecision recovery_override(Action proposed, const RecoveryState& state,
                                   const HistoryBuffer& history, ActionSet feasible, int robot_id,
                                   int step, const RecoveryConfig& config);

Action symmetry_breaking_move(ActionSet feasible, int robot_id, int step);

// ---------------------------------------------------------------------------

struct CollisionResult {
  std::vector<Action> executed;
  std::vector<int> obstacle_contacts;  // per robot, 0 or 1
  std::vector<int> robot_conflicts;    // per robot, 0 or 1
};

// Simultaneous-move resolution. A move into a cell a dynamic obstacle enters
// this step is a contact and the robot stays. Swaps convert both robots to
// Stay; several robots entering one cell leave only the lowest id moving; a
// move into a cell whose occupant stays is cancelled. Repeats until stable.
CollisionResult resolve_collisions(std::span<const Action> intended, std::span<const Cell> poses,
                                   std::span<const Cell> obstacles_after);

}  // namespace mrx
