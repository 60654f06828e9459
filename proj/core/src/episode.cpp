#include "mrx/episode.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>

#include "mrx/allocators.hpp"
#include "mrx/assignment.hpp"
#include "mrx/error.hpp"
#include "mrx/rng.hpp"

namespace mrx {

namespace {

struct RobotState {
  Cell pose;
  std::optional<Cell> goal;
  GateParams gate;
  GateState switch_state;
  HistoryBuffer history;
  RecoveryState recovery;
  Rng rng;
};

std::vector<Cell> others(std::span<const Cell> poses, std::size_t self) {
  std::vector<Cell> out;
  out.reserve(poses.size() - 1);
  for (std::size_t j = 0; j < poses.size(); ++j) {
    if (j != self) out.push_back(poses[j]);
  }
  return out;
}

std::vector<Cell> nearby(std::span<const Cell> cells, Cell center, int radius) {
  std::vector<Cell> out;
  for (const Cell& c : cells) {
    if (chebyshev(c, center) <= radius) out.push_back(c);
  }
  return out;
}

std::vector<std::optional<Cell>> baseline_allocation(AllocatorKind kind,
                                                     std::span<const Cell> frontiers,
                                                     std::span<const DistanceField> fields) {
  switch (kind) {
    case AllocatorKind::Greedy: return allocate_greedy(frontiers, fields);
    case AllocatorKind::Hungarian: return allocate_hungarian(frontiers, fields);
    case AllocatorKind::Auction: return allocate_auction(frontiers, fields);
    case AllocatorKind::Coupled: break;
  }
  throw std::logic_error("baseline allocation requested for the coupled allocator");
}

}  // namespace

EpisodeResult run_episode(const ScenarioConfig& config, const Variant& variant,
                          const EpisodeOptions& options) {
  return run_episode(config, generate_scenario(config), variant, options);
}

EpisodeResult run_episode(const ScenarioConfig& config, const Scenario& scenario,
                          const Variant& variant, const EpisodeOptions& options) {
  config.validate();
  if (variant.init == GateInit::Warm && options.warm_params == nullptr) {
    throw ConfigError("variant " + variant.label() + " needs warm-start gate parameters");
  }
  const GridMap& truth = scenario.truth;
  const std::size_t n = scenario.starts.size();
  const int rs = config.sensing_radius;
  const int horizon = config.effective_horizon();

  AssignmentParams assign_params = config.assignment;
  assign_params.interaction_radius = config.interaction_radius;
  RecoveryConfig recovery_cfg = config.recovery;
  recovery_cfg.window = config.history_window;

  std::unique_ptr<ReactivePolicy> owned_policy;
  const ReactivePolicy* policy = options.policy;
  if (policy == nullptr) {
    if (config.policy_command.empty()) {
      owned_policy = std::make_unique<PotentialFieldPolicy>(config.reactive);
    } else {
      owned_policy = std::make_unique<SubprocessPolicy>(config.policy_command);
    }
    policy = owned_policy.get();
  }

  const SwitchMode mode = variant.switch_mode();
  const bool adaptive = variant.adaptation == GateAdaptation::Adaptive;

  std::vector<RobotState> robots;
  robots.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    RobotState r{scenario.starts[i],
                 std::nullopt,
                 variant.init == GateInit::Warm ? *options.warm_params : GateParams{},
                 GateState{},
                 HistoryBuffer(static_cast<std::size_t>(config.history_window)),
                 RecoveryState{},
                 Rng(mix_seed(config.seed, 0x7000 + i))};
    r.switch_state.switch_state = mode == SwitchMode::FixedReactive ? 0 : 1;
    robots.push_back(std::move(r));
  }

  DynamicObstacleSet obstacles = scenario.obstacles;
  GridMap shared(truth.width(), truth.height(), CellState::Unk);
  ObstacleMarks marks(shared.size(), config.obstacle_memory);
  {
    const auto obstacle_cells = obstacles.positions();
    for (const auto& r : robots) {
      sense_and_fuse(shared, truth, obstacle_cells, r.pose, rs);
      marks.observe(shared, obstacle_cells, r.pose, rs, 0);
    }
  }

  EpisodeResult result;
  EpisodeRecord& record = result.record;
  record.header = {config.label(),
                   variant.label(),
                   config.seed,
                   truth.width(),
                   truth.height(),
                   static_cast<int>(n),
                   horizon,
                   static_cast<int>(shared.size() - shared.count(CellState::Unk))};

  std::vector<Cell> poses(n);
  std::vector<DistanceField> fields(n);
  std::vector<std::vector<Cell>> mates(n);
  std::vector<std::vector<Cell>> blocked(n);
  std::vector<ActionSet> feasible(n);
  std::vector<FeatureVector> features(n);
  std::vector<double> fidelity(n);
  std::vector<bool> flipped(n);
  std::vector<PlanResult> plans(n);
  std::vector<int> commanded(n), effective(n), violations(n);
  std::vector<bool> in_recovery(n);
  std::vector<Action> intended(n);
  std::vector<std::uint8_t> frontier_mask(shared.size());

  for (int t = 0;; ++t) {
    const auto frontiers = extract_frontiers(shared);
    if (frontiers.empty()) {
      record.t_star = t;
      break;
    }
    if (t >= horizon) break;

    std::fill(frontier_mask.begin(), frontier_mask.end(), 0);
    for (const Cell& f : frontiers) frontier_mask[shared.index(f)] = 1;
    const auto obstacle_cells = obstacles.positions();

    for (std::size_t i = 0; i < n; ++i) {
      auto& r = robots[i];
      // A goal that stopped being a frontier is no longer a valid goal.
      if (r.goal && !frontier_mask[shared.index(*r.goal)]) r.goal.reset();
      poses[i] = r.pose;
    }

    // Share state, extract features, predict, update the switch.
    for (std::size_t i = 0; i < n; ++i) {
      auto& r = robots[i];
      fields[i] = bfs_distance_field_or_empty(shared, r.pose);
      mates[i] = others(poses, i);
      blocked[i] = nearby(obstacle_cells, r.pose, rs);
      blocked[i].insert(blocked[i].end(), mates[i].begin(), mates[i].end());
      feasible[i] = feasible_actions(shared, r.pose, mates[i], obstacle_cells);
      plans[i] = plan_astar(shared, r.pose, r.goal, blocked[i]);

      FeatureContext fc;
      fc.map = &shared;
      fc.pose = r.pose;
      fc.goal = r.goal;
      fc.teammates = mates[i];
      fc.own_field = &fields[i];
      fc.feasible = feasible[i];
      fc.history = &r.history;
      fc.planner_ok = plans[i].ok;
      fc.sensing_radius = rs;
      fc.interaction_radius = config.interaction_radius;
      fc.team_size = static_cast<int>(n);
      features[i] = extract_features(fc);
      fidelity[i] = predict(r.gate, features[i]);

      flipped[i] = false;
      if (mode == SwitchMode::Gated) {
        const GateState next = update_hysteresis(r.switch_state, fidelity[i], config.hysteresis);
        flipped[i] = next.switch_state != r.switch_state.switch_state;
        r.switch_state = next;
      }
    }

    // Reassignment round.
    std::vector<bool> due(n);
    bool any_due = false;
    for (std::size_t i = 0; i < n; ++i) {
      due[i] = should_reassign(t, assign_params.reassign_interval, robots[i].goal, robots[i].pose);
      any_due = any_due || due[i];
    }
    if (any_due) {
      std::vector<std::optional<Cell>> goals(n);
      for (std::size_t i = 0; i < n; ++i) goals[i] = robots[i].goal;
      std::vector<std::optional<Cell>> chosen(n);
      if (variant.allocator == AllocatorKind::Coupled) {
        // Every robot scores against the round-start goals; the new goals are
        // published together afterwards.
        const auto ctx = AssignmentContext::build(shared, poses, goals, fields, frontiers, rs);
        for (std::size_t i = 0; i < n; ++i) {
          if (!due[i]) continue;
          const double p = variant.couples_assignment() ? fidelity[i] : 1.0;
          chosen[i] = assign_target(static_cast<int>(i), ctx, p, assign_params);
        }
      } else {
        chosen = baseline_allocation(variant.allocator, frontiers, fields);
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (!due[i]) continue;
        if (chosen[i] != robots[i].goal) {
          robots[i].goal = chosen[i];
          plans[i] = plan_astar(shared, robots[i].pose, robots[i].goal, blocked[i]);
        }
      }
    }

    // Branch selection, reactive proposal, arbitration, recovery.
    for (std::size_t i = 0; i < n; ++i) {
      auto& r = robots[i];
      commanded[i] = r.switch_state.switch_state;
      effective[i] = plans[i].ok ? commanded[i] : 0;
      Action a = plans[i].action;
      if (effective[i] == 0) {
        const auto obs = build_observation(shared, r.pose, r.goal, mates[i], obstacle_cells, rs);
        a = arbitrate(0, plans[i], policy->act(obs, r.rng));
      }
      violations[i] = 0;
      if (!feasible[i].contains(a)) {
        a = Action::Stay;
        violations[i] = 1;
      }
      const auto decision = recovery_override(a, r.recovery, r.history, feasible[i],
                                              static_cast<int>(i), t, recovery_cfg);
      in_recovery[i] = r.recovery.active || decision.started;
      r.recovery = decision.state;
      intended[i] = decision.action;
    }

    // Obstacles decide against the pre-move robot cells; robots then resolve
    // against where the obstacles end up.
    DynamicObstacleSet next_obstacles = obstacles;
    step_dynamic_obstacles(next_obstacles, truth, poses, t);
    const auto obstacles_after = next_obstacles.positions();
    const auto resolved = resolve_collisions(intended, poses, obstacles_after);

    StepLog log;
    log.t = t;
    log.robots.resize(n);
    bool contact = false;
    for (std::size_t i = 0; i < n; ++i) {
      auto& r = robots[i];
      log.robots[i] = {r.pose, resolved.executed[i], effective[i], fidelity[i], in_recovery[i],
                       resolved.obstacle_contacts[i]};
      r.pose = apply(r.pose, resolved.executed[i]);
      contact = contact || resolved.obstacle_contacts[i] != 0;
      result.robot_conflicts += resolved.robot_conflicts[i];
    }
    obstacles = std::move(next_obstacles);

    for (std::size_t i = 0; i < n; ++i) {
      auto& r = robots[i];
      const int seen = sense_and_fuse(shared, truth, obstacles_after, r.pose, rs);
      marks.observe(shared, obstacles_after, r.pose, rs, t + 1);
      log.newly_known += seen;

      StepRecord rec;
      rec.pose = r.pose;
      rec.moved = r.pose != poses[i];
      rec.newly_seen = seen;
      rec.goal = r.goal;
      if (r.goal) rec.goal_distance = fields[i].at(*r.goal);
      rec.collisions = resolved.obstacle_contacts[i] + resolved.robot_conflicts[i];
      rec.violations = violations[i];
      rec.switch_flipped = flipped[i];
      rec.planner_ok = plans[i].ok;
      rec.planner_selected = commanded[i] == 1;
      rec.recovery = in_recovery[i];
      r.history.push(rec);
    }
    marks.expire(shared, t + 1);
    record.append(std::move(log));

    if (contact && config.strict_collisions) {
      record.collision_failure = true;
      break;
    }

    // Self-supervised gate update every update_interval completed steps.
    if ((t + 1) % config.update_interval == 0) {
      for (std::size_t i = 0; i < n; ++i) {
        auto& r = robots[i];
        const double q = surrogate_score(r.history, config.surrogate);
        const int label = pseudo_label(q);
        if (options.samples && std::fabs(q) >= config.learning.margin) {
          options.samples->push_back({features[i], label});
        }
        if (!adaptive) continue;
        const auto status = online_update(r.gate, features[i], fidelity[i], label, q, config.learning);
        if (status == UpdateStatus::Applied) ++result.applied_updates;
        if (status == UpdateStatus::RejectedNonFinite) {
          ++result.rejected_updates;
          std::cerr << "warning: robot " << i << " step " << t
                    << ": non-finite gate update rejected\n";
        }
      }
    }
  }

  for (const auto& r : robots) {
    result.final_poses.push_back(r.pose);
    result.final_gates.push_back(r.gate);
  }
  result.metrics = compute_metrics(record, config.objective);
  return result;
}

}  // namespace mrx
