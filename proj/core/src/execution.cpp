#include "mrx/execution.hpp"

#include <algorithm>
#include <csignal>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "mrx/error.hpp"

namespace mrx {

namespace {

Action action_towards(Cell from, Cell to) {
  for (std::size_t k = 0; k < kNeighbors4.size(); ++k) {
    if (from + kNeighbors4[k] == to) return static_cast<Action>(k);
  }
  return Action::Stay;
}

}  // namespace

PlanResult plan_astar(const GridMap& map, Cell start, std::optional<Cell> goal,
                      std::span<const Cell> blocked) {
  if (!goal || !map.is_free(*goal)) return {};
  if (*goal == start) return {Action::Stay, true, 0};

  const std::size_t n = map.size();
  std::vector<std::uint8_t> closed(n, 0);
  for (const Cell& b : blocked) {
    if (map.in_bounds(b) && b != start) closed[map.index(b)] = 1;
  }
  const auto goal_idx = map.index(*goal);
  if (closed[goal_idx]) return {};

  struct Node {
    int f;
    int h;
    int idx;
    // Lower f first, then deeper nodes (lower h), then lower index.
    bool operator>(const Node& o) const {
      if (f != o.f) return f > o.f;
      if (h != o.h) return h > o.h;
      return idx > o.idx;
    }
  };
  std::vector<int> g(n, -1);
  std::vector<int> parent(n, -1);
  std::priority_queue<Node, std::vector<Node>, std::greater<>> open;
  const auto start_idx = map.index(start);
  g[start_idx] = 0;
  open.push({manhattan(start, *goal), manhattan(start, *goal), static_cast<int>(start_idx)});

  while (!open.empty()) {
    const Node cur = open.top();
    open.pop();
    const auto ui = static_cast<std::size_t>(cur.idx);
    if (closed[ui]) continue;
    closed[ui] = 1;
    if (ui == goal_idx) break;
    const Cell c = map.cell_at(ui);
    for (const Cell& off : kNeighbors4) {
      const Cell nb = c + off;
      if (!map.is_free(nb)) continue;
      const auto ni = map.index(nb);
      if (closed[ni]) continue;
      const int ng = g[ui] + 1;
      if (g[ni] < 0 || ng < g[ni]) {
        g[ni] = ng;
        parent[ni] = cur.idx;
        const int h = manhattan(nb, *goal);
        open.push({ng + h, h, static_cast<int>(ni)});
      }
    }
  }
  if (g[goal_idx] < 0) return {};

  auto idx = static_cast<int>(goal_idx);
  while (parent[static_cast<std::size_t>(idx)] != static_cast<int>(start_idx)) {
    idx = parent[static_cast<std::size_t>(idx)];
  }
  return {action_towards(start, map.cell_at(static_cast<std::size_t>(idx))), true, g[goal_idx]};
}

// ---------------------------------------------------------------------------

int Observation::index(int dr, int dc) const {
  if (dr < -radius || dr > radius || dc < -radius || dc > radius) return -1;
  return (dr + radius) * side() + (dc + radius);
}

bool Observation::passable(int dr, int dc) const {
  const int i = index(dr, dc);
  if (i < 0) return false;
  const auto ui = static_cast<std::size_t>(i);
  return cells[ui] == 0 && obstacles[ui] == 0;
}

ActionSet Observation::feasible() const {
  ActionSet set;
  set.insert(Action::Stay);
  for (std::size_t k = 0; k < kNeighbors4.size(); ++k) {
    const Cell off = kNeighbors4[k];
    const int i = index(off.row, off.col);
    if (i >= 0 && passable(off.row, off.col) && teammates[static_cast<std::size_t>(i)] == 0) {
      set.insert(static_cast<Action>(k));
    }
  }
  return set;
}

std::vector<int> Observation::serialize() const {
  std::vector<int> out{radius, has_goal ? 1 : 0, goal_dr, goal_dc};
  out.reserve(4 + 3 * cells.size());
  for (auto v : cells) out.push_back(v);
  for (auto v : obstacles) out.push_back(v);
  for (auto v : teammates) out.push_back(v);
  return out;
}

Observation Observation::deserialize(std::span<const int> data) {
  if (data.size() < 4 || data[0] < 0) throw ConfigError("observation: truncated header");
  Observation obs;
  obs.radius = data[0];
  obs.has_goal = data[1] != 0;
  obs.goal_dr = data[2];
  obs.goal_dc = data[3];
  const auto area = static_cast<std::size_t>(obs.side() * obs.side());
  if (data.size() != 4 + 3 * area) throw ConfigError("observation: wrong payload length");
  auto take = [&](std::size_t offset) {
    std::vector<std::uint8_t> v(area);
    for (std::size_t i = 0; i < area; ++i) v[i] = static_cast<std::uint8_t>(data[offset + i]);
    return v;
  };
  obs.cells = take(4);
  obs.obstacles = take(4 + area);
  obs.teammates = take(4 + 2 * area);
  return obs;
}

std::string Observation::to_line() const {
  std::string out;
  for (int v : serialize()) {
    if (!out.empty()) out.push_back(' ');
    out += std::to_string(v);
  }
  return out;
}

Observation build_observation(const GridMap& map, Cell pose, std::optional<Cell> goal,
                              std::span<const Cell> teammates, std::span<const Cell> obstacles,
                              int radius) {
  Observation obs;
  obs.radius = radius;
  const auto area = static_cast<std::size_t>(obs.side() * obs.side());
  obs.cells.assign(area, 1);
  obs.obstacles.assign(area, 0);
  obs.teammates.assign(area, 0);
  if (goal) {
    obs.has_goal = true;
    obs.goal_dr = goal->row - pose.row;
    obs.goal_dc = goal->col - pose.col;
  }
  for (int dr = -radius; dr <= radius; ++dr) {
    for (int dc = -radius; dc <= radius; ++dc) {
      const Cell c{pose.row + dr, pose.col + dc};
      if (!map.in_bounds(c)) continue;
      const auto i = static_cast<std::size_t>(obs.index(dr, dc));
      switch (map.at(c)) {
        case CellState::Free: obs.cells[i] = 0; break;
        case CellState::Occ: obs.cells[i] = 1; break;
        case CellState::Unk: obs.cells[i] = 2; break;
      }
    }
  }
  auto mark = [&](std::span<const Cell> cells, std::vector<std::uint8_t>& mask) {
    for (const Cell& c : cells) {
      const int i = obs.index(c.row - pose.row, c.col - pose.col);
      if (i >= 0 && c != pose) mask[static_cast<std::size_t>(i)] = 1;
    }
  };
  mark(teammates, obs.teammates);
  mark(obstacles, obs.obstacles);
  return obs;
}

void PotentialFieldParams::validate() const {
  if (obstacle_penalty < 0 || teammate_penalty < 0 || stay_penalty < 0 || jitter < 0) {
    throw ConfigError("reactive policy weights must be non-negative");
  }
}

PotentialFieldPolicy::PotentialFieldPolicy(PotentialFieldParams params) : params_(params) {
  params_.validate();
}

std::vector<int> PotentialFieldPolicy::potential(const Observation& obs) const {
  const int r = obs.radius;
  const int side = obs.side();
  std::vector<int> pot(static_cast<std::size_t>(side * side), -1);
  // Seed each passable cell with its Manhattan distance to the goal, then
  // relax pot(c) = min(pot(c), pot(n) + 1) until stable.
  for (int dr = -r; dr <= r; ++dr) {
    for (int dc = -r; dc <= r; ++dc) {
      if (!obs.passable(dr, dc) && !(dr == 0 && dc == 0)) continue;
      const int h = obs.has_goal ? std::abs(obs.goal_dr - dr) + std::abs(obs.goal_dc - dc) : 0;
      pot[static_cast<std::size_t>(obs.index(dr, dc))] = h;
    }
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (int dr = -r; dr <= r; ++dr) {
      for (int dc = -r; dc <= r; ++dc) {
        auto& here = pot[static_cast<std::size_t>(obs.index(dr, dc))];
        if (here < 0) continue;
        for (const Cell& off : kNeighbors4) {
          const int ni = obs.index(dr + off.row, dc + off.col);
          if (ni < 0) continue;
          const int there = pot[static_cast<std::size_t>(ni)];
          if (there >= 0 && there + 1 < here) {
            here = there + 1;
            changed = true;
          }
        }
      }
    }
  }
  return pot;
}

Action PotentialFieldPolicy::act(const Observation& obs, Rng& rng) const {
  const ActionSet feasible = obs.feasible();
  const std::vector<int> pot = potential(obs);
  const int here = pot[static_cast<std::size_t>(obs.index(0, 0))];

  auto proximity = [&](Cell target) {
    double penalty = 0.0;
    for (const Cell& off : kNeighbors4) {
      const int i = obs.index(target.row + off.row, target.col + off.col);
      if (i < 0 || (target.row + off.row == 0 && target.col + off.col == 0)) continue;
      penalty += params_.obstacle_penalty * obs.obstacles[static_cast<std::size_t>(i)];
      penalty += params_.teammate_penalty * obs.teammates[static_cast<std::size_t>(i)];
    }
    return penalty;
  };

  Action best = Action::Stay;
  double best_score = -std::numeric_limits<double>::infinity();
  for (Action a : kAllActions) {
    // Always draw, so the stream advances identically regardless of feasibility.
    const double noise = params_.jitter * rng.uniform();
    if (!feasible.contains(a)) continue;
    const Cell target = apply(Cell{0, 0}, a);
    double score = -proximity(target) + noise;
    if (a == Action::Stay) {
      score -= params_.stay_penalty;
    } else if (obs.has_goal) {
      score += here - pot[static_cast<std::size_t>(obs.index(target.row, target.col))];
    }
    if (score > best_score) {
      best_score = score;
      best = a;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

SubprocessPolicy::SubprocessPolicy(const std::string& command) {
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0) throw std::runtime_error("policy subprocess: pipe failed");
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw std::runtime_error("policy subprocess: pipe failed");
  }
  std::signal(SIGPIPE, SIG_IGN);
  pid_ = fork();
  if (pid_ < 0) throw std::runtime_error("policy subprocess: fork failed");
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

SubprocessPolicy::~SubprocessPolicy() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

Action SubprocessPolicy::act(const Observation& obs, Rng& /*rng*/) const {
  const std::string line = obs.to_line() + "\n";
  std::size_t written = 0;
  while (written < line.size()) {
    const auto n = write(to_child_, line.data() + written, line.size() - written);
    if (n <= 0) throw std::runtime_error("policy subprocess: write failed");
    written += static_cast<std::size_t>(n);
  }
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string reply = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!reply.empty() && reply.back() == '\r') reply.pop_back();
      const auto action = parse_action(reply);
      if (!action) throw std::runtime_error("policy subprocess: bad action '" + reply + "'");
      return *action;
    }
    char chunk[256];
    const auto n = read(from_child_, chunk, sizeof chunk);
    if (n <= 0) throw std::runtime_error("policy subprocess: no reply");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

Action arbitrate(int switch_state, const PlanResult& plan, Action reactive) {
  return switch_state == 1 ? plan.action : reactive;
}

// ---------------------------------------------------------------------------

std::string_view to_string(RecoveryTrigger t) {
  switch (t) {
    case RecoveryTrigger::None: return "none";
    case RecoveryTrigger::Infeasible: return "infeasible";
    case RecoveryTrigger::Stalled: return "stalled";
    case RecoveryTrigger::Oscillating: return "oscillating";
  }
  return "none";
}

void RecoveryConfig::validate() const {
  if (window < 1 || length < 1 || oscillation_flips < 1) {
    throw ConfigError("recovery window, length and flip threshold must be >= 1");
  }
}

RecoveryTrigger detect_recovery_trigger(const HistoryBuffer& history, const RecoveryConfig& config) {
  const auto w = static_cast<std::size_t>(config.window);
  if (history.size() < w) return RecoveryTrigger::None;
  const std::size_t first = history.size() - w;
  bool infeasible = true;
  bool moved = false;
  int seen = 0;
  int flips = 0;
  for (std::size_t i = first; i < history.size(); ++i) {
    const StepRecord& rec = history[i];
    if (rec.recovery) return RecoveryTrigger::None;
    infeasible = infeasible && rec.planner_selected && !rec.planner_ok;
    moved = moved || rec.moved;
    seen += rec.newly_seen;
    flips += rec.switch_flipped ? 1 : 0;
  }
  if (infeasible) return RecoveryTrigger::Infeasible;
  if (!moved && seen == 0) return RecoveryTrigger::Stalled;
  if (flips >= config.oscillation_flips) return RecoveryTrigger::Oscillating;
  return RecoveryTrigger::None;
}

Action symmetry_breaking_move(ActionSet feasible, int robot_id, int step) {
  std::vector<Action> choices;
  for (Action a : kAllActions) {
    if (a != Action::Stay && feasible.contains(a)) choices.push_back(a);
  }
  if (choices.empty()) return Action::Stay;
  const auto k = static_cast<std::size_t>(robot_id + step) % choices.size();
  return choices[k];
}

RecoveryDecision recovery_override(Action proposed, const RecoveryState& state,
                                   const HistoryBuffer& history, ActionSet feasible, int robot_id,
                                   int step, const RecoveryConfig& config) {
  RecoveryDecision out;
  out.state = state;
  if (!state.active) {
    const RecoveryTrigger trigger = detect_recovery_trigger(history, config);
    if (trigger == RecoveryTrigger::None) {
      out.action = proposed;
      return out;
    }
    out.started = true;
    out.state = {true, config.length, trigger};
  }
  out.action = symmetry_breaking_move(feasible, robot_id, step);
  out.state.remaining -= 1;
  out.state.active = out.state.remaining > 0;
  if (!out.state.active) out.state.reason = RecoveryTrigger::None;
  return out;
}

// ---------------------------------------------------------------------------

CollisionResult resolve_collisions(std::span<const Action> intended, std::span<const Cell> poses,
                                   std::span<const Cell> obstacles_after) {
  const std::size_t n = poses.size();
  CollisionResult out;
  out.executed.assign(intended.begin(), intended.end());
  out.obstacle_contacts.assign(n, 0);
  out.robot_conflicts.assign(n, 0);

  for (std::size_t i = 0; i < n; ++i) {
    if (out.executed[i] == Action::Stay) continue;
    const Cell target = apply(poses[i], out.executed[i]);
    if (std::find(obstacles_after.begin(), obstacles_after.end(), target) != obstacles_after.end()) {
      out.executed[i] = Action::Stay;
      out.obstacle_contacts[i] = 1;
    }
  }

  auto cancel = [&](std::size_t i) {
    out.executed[i] = Action::Stay;
    out.robot_conflicts[i] = 1;
  };

  std::vector<Cell> target(n);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) target[i] = apply(poses[i], out.executed[i]);

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const bool moving = out.executed[i] != Action::Stay && out.executed[j] != Action::Stay;
        if (moving && target[i] == poses[j] && target[j] == poses[i]) {
          cancel(i);
          cancel(j);
          changed = true;
        }
      }
    }
    if (changed) continue;

    for (std::size_t i = 0; i < n && !changed; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || target[i] != target[j]) continue;
        // Two robots end on one cell: a stayer keeps it, otherwise the
        // lower id keeps it.
        const bool i_stays = out.executed[i] == Action::Stay;
        const bool j_stays = out.executed[j] == Action::Stay;
        if (i_stays && !j_stays) {
          cancel(j);
        } else if (!i_stays && j_stays) {
          cancel(i);
        } else {
          cancel(std::max(i, j));
        }
        changed = true;
        break;
      }
    }
  }
  return out;
}

}  // namespace mrx
