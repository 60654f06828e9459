#pragma once

#include <vector>

#include "mrx/execution.hpp"
#include "mrx/gate.hpp"
#include "mrx/metrics.hpp"
#include "mrx/scenario.hpp"
#include "mrx/variant.hpp"

namespace mrx {

struct EpisodeOptions {
  // Initial gate parameters for warm variants; required when the variant is
  // warm. Cold variants start from all-zero parameters.
  const GateParams* warm_params = nullptr;
  // When set, every window whose |Q| reaches the margin contributes a
  // (features, pseudo-label) pair.
  std::vector<LabeledSample>* samples = nullptr;
  // Overrides the built-in potential-field policy (and the config's command).
  const ReactivePolicy* policy = nullptr;
};

struct EpisodeResult {
  EpisodeRecord record;
  EpisodeMetrics metrics;
  std::vector<Cell> final_poses;
  std::vector<GateParams> final_gates;  // per robot
  int rejected_updates = 0;             // non-finite online updates skipped
  int applied_updates = 0;
  int robot_conflicts = 0;              // moves cancelled by robot-robot conflicts
};

// One closed-loop episode on the scenario generated from config.seed. Never
// throws for in-episode failures; those are recorded outcomes.
EpisodeResult run_episode(const ScenarioConfig& config, const Variant& variant,
                          const EpisodeOptions& options = {});

// Same, on an explicit scenario (tests and fixtures).
EpisodeResult run_episode(const ScenarioConfig& config, const Scenario& scenario,
                          const Variant& variant, const EpisodeOptions& options = {});

}  // namespace mrx
