#include "mrx/scenario.hpp"

#include <algorithm>
#include <cstdio>

#include "mrx/error.hpp"
#include "mrx/rng.hpp"

namespace mrx {

std::string ScenarioConfig::label() const {
  if (!name.empty()) return name;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%dx%d_n%d_o%d", width, height, team_size, dynamic_obstacles);
  return buf;
}

void ScenarioConfig::validate() const {
  if (width < 1 || height < 1) throw ConfigError("scenario dimensions must be positive");
  if (team_size < 1) throw ConfigError("team size must be >= 1");
  if (!(static_density >= 0.0 && static_density < 1.0)) {
    throw ConfigError("static density must lie in [0, 1)");
  }
  if (static_density_max > static_density && static_density_max >= 1.0) {
    throw ConfigError("static density range must stay below 1");
  }
  if (dynamic_obstacles < 0) throw ConfigError("dynamic obstacle count must be >= 0");
  if (!(speed_ratio > 0.0 && speed_ratio < 1.0)) throw ConfigError("speed ratio must lie in (0, 1)");
  if (sensing_radius < 1) throw ConfigError("sensing radius must be >= 1");
  if (interaction_radius < 0) throw ConfigError("interaction radius must be >= 0");
  if (horizon < 0) throw ConfigError("horizon must be >= 0");
  if (obstacle_memory < 0) throw ConfigError("obstacle memory must be >= 0");
  if (history_window < 1) throw ConfigError("history window must be >= 1");
  if (update_interval < 1) throw ConfigError("update interval must be >= 1");
  if (max_generation_attempts < 1) throw ConfigError("generation attempts must be >= 1");
  assignment.validate();
  hysteresis.validate();
  learning.validate();
  surrogate.validate();
  recovery.validate();
  reactive.validate();
  objective.validate();
}

std::vector<int> label_free_components(const GridMap& map, int* count) {
  std::vector<int> label(map.size(), -1);
  int next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < map.size(); ++start) {
    if (map.at(start) != CellState::Free || label[start] >= 0) continue;
    label[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      const Cell c = map.cell_at(stack.back());
      stack.pop_back();
      for (const Cell& off : kNeighbors4) {
        const Cell nb = c + off;
        if (!map.is_free(nb)) continue;
        const auto ni = map.index(nb);
        if (label[ni] < 0) {
          label[ni] = next;
          stack.push_back(ni);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

Scenario generate_scenario(const ScenarioConfig& config) {
  config.validate();
  const auto needed = static_cast<std::size_t>(config.team_size + config.dynamic_obstacles);
  for (int attempt = 0; attempt < config.max_generation_attempts; ++attempt) {
    Rng rng(mix_seed(config.seed, 0x5ce0 + static_cast<std::uint64_t>(attempt)));
    double density = config.static_density;
    if (config.static_density_max > config.static_density) {
      density += (config.static_density_max - config.static_density) * rng.uniform();
    }

    Scenario sc;
    sc.attempts = attempt + 1;
    sc.truth = GridMap(config.width, config.height, CellState::Free);
    for (std::size_t i = 0; i < sc.truth.size(); ++i) {
      if (rng.bernoulli(density)) sc.truth.set(sc.truth.cell_at(i), CellState::Occ);
    }
    sc.density_before_repair =
        static_cast<double>(sc.truth.count(CellState::Occ)) / static_cast<double>(sc.truth.size());

    int components = 0;
    const auto label = label_free_components(sc.truth, &components);
    if (components == 0) continue;
    std::vector<std::size_t> sizes(static_cast<std::size_t>(components), 0);
    for (int l : label) {
      if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
    }
    // Largest component; labels follow row-major discovery, so ties keep the
    // earlier one.
    const int keep = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    std::vector<Cell> pool;
    for (std::size_t i = 0; i < label.size(); ++i) {
      if (label[i] == keep) {
        pool.push_back(sc.truth.cell_at(i));
      } else if (label[i] >= 0) {
        sc.truth.set(sc.truth.cell_at(i), CellState::Occ);
      }
    }
    sc.density_after_repair =
        static_cast<double>(sc.truth.count(CellState::Occ)) / static_cast<double>(sc.truth.size());
    if (pool.size() < needed) continue;

    // Partial Fisher-Yates: the first `needed` entries become the sample.
    for (std::size_t k = 0; k < needed; ++k) {
      const auto j = k + static_cast<std::size_t>(rng.below(pool.size() - k));
      std::swap(pool[k], pool[j]);
    }
    sc.starts.assign(pool.begin(), pool.begin() + config.team_size);
    const std::vector<Cell> obstacle_cells(pool.begin() + config.team_size, pool.begin() + static_cast<std::ptrdiff_t>(needed));
    sc.obstacles = make_obstacles(obstacle_cells, mix_seed(config.seed, 0x0b57), config.speed_ratio);
    return sc;
  }
  throw ConfigError("could not generate a scenario with room for " + std::to_string(needed) +
                    " robots and obstacles after " + std::to_string(config.max_generation_attempts) +
                    " attempts");
}

}  // namespace mrx
