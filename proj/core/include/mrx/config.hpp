#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mrx/scenario.hpp"

namespace mrx {

// INI-style run configuration. Sections group keys by module:
//   [scenario]   name width height robots static_density static_density_max
//                dynamic_obstacles speed_ratio sensing_radius
//                interaction_radius horizon obstacle_memory seed
//                strict_collisions
//                max_attempts
//   [assignment] lambda0 lambda1 rho0 rho1 beta sigma_x sigma_g
//                reassign_interval
//   [gate]       tau_high tau_low dwell window update_interval learning_rate
//                l2 margin w_coverage w_distance w_risk w_stall warm_params
//   [execution]  recovery_length oscillation_flips obstacle_penalty
//                teammate_penalty stay_penalty jitter policy_command
//   [metrics]    alpha lambda_overlap
// Unknown sections or keys and unparsable values raise ConfigError.

// Every accepted "section.key", in the order above.
std::vector<std::string> config_keys();

void apply_setting(ScenarioConfig& config, std::string_view key, std::string_view value);
void apply_ini(ScenarioConfig& config, std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

// Applies "--section.key=value" arguments and returns the ones that are not
// of that form. Throws ConfigError for unknown keys.
std::vector<std::string> apply_overrides(ScenarioConfig& config,
                                         std::span<const std::string> args);

// INI text that load_config reads back to the same configuration.
std::string format_config(const ScenarioConfig& config);

}  // namespace mrx
