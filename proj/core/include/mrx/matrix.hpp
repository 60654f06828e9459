#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mrx/metrics.hpp"
#include "mrx/scenario.hpp"
#include "mrx/variant.hpp"

namespace mrx {

// Worker count from MRX_WORKERS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
int default_worker_count();

struct MatrixOptions {
  int workers = 0;                   // 0: default_worker_count()
  bool timing = false;               // write measured wall times instead of 0
  std::filesystem::path log_dir;     // when set, one JSON-lines log per episode
};

struct EpisodeRow {
  std::string scenario;
  std::string variant;
  std::uint64_t seed = 0;
  EpisodeMetrics metrics;
  double wall_time = 0.0;  // seconds
  std::string error;       // non-empty when the episode threw
};

struct MatrixGroup {
  std::string scenario;
  std::string variant;
  Summary summary;
  double wall_time = 0.0;  // mean seconds per episode
};

struct MatrixResult {
  std::vector<EpisodeRow> rows;      // configs x variants x seeds, in that order
  std::vector<MatrixGroup> groups;   // configs x variants

  // Columns: variant, seed, SR, EL, overlap, recoveries, planner_fraction,
  // wall_time. One row per episode, then one "mean" row per group. The
  // variant column reads "<scenario>/<variant>". Undefined values are empty.
  std::string to_csv(bool timing = false) const;

  const MatrixGroup& group(std::string_view scenario, std::string_view variant) const;
};

// Every (config, variant, seed) episode on a bounded worker pool. The seed
// list replaces each config's own seed. Warm variants read the config's
// warm_params file. Episodes that throw are logged to stderr and counted as
// failures.
MatrixResult run_matrix(std::span<const ScenarioConfig> configs, std::span<const Variant> variants,
                        std::span<const std::uint64_t> seeds, const MatrixOptions& options = {});

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count);

// Runs fn(i) for i in [0, count) on up to `workers` threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace mrx
