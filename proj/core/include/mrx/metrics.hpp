#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mrx/grid.hpp"

namespace mrx {

struct RobotStep {
  Cell pose;                     // pose at the start of the step
  Action action = Action::Stay;  // executed action
  int switch_state = 0;          // branch used this step (1 = planner)
  double fidelity = 0.0;
  bool recovery = false;
  int collisions = 0;            // obstacle contacts this step

  bool operator==(const RobotStep&) const = default;
};

struct StepLog {
  int t = 0;
  std::vector<RobotStep> robots;
  int newly_known = 0;

  bool operator==(const StepLog&) const = default;
};

struct EpisodeHeader {
  std::string scenario;
  std::string variant;
  std::uint64_t seed = 0;
  int width = 0;
  int height = 0;
  int team_size = 0;
  int horizon = 0;
  int initially_known = 0;

  bool operator==(const EpisodeHeader&) const = default;
};

// Append-only per-episode log; the source of every metric.
class EpisodeRecord {
 public:
  EpisodeHeader header;
  std::optional<int> t_star;       // first step with no frontiers
  bool collision_failure = false;  // strict mode contact

  // Steps must arrive with contiguous indices starting at 0.
  void append(StepLog step);
  const std::vector<StepLog>& steps() const { return steps_; }
  bool success() const { return t_star.has_value() && !collision_failure; }
  int steps_taken() const { return static_cast<int>(steps_.size()); }

  bool operator==(const EpisodeRecord&) const = default;

 private:
  std::vector<StepLog> steps_;
};

struct ObjectiveWeights {
  double alpha = 1.0;
  double lambda_overlap = 0.1;

  void validate() const;
};

struct EpisodeMetrics {
  bool success = false;
  std::optional<int> t_star;
  int exploration_length = 0;  // t* on success, steps taken otherwise
  std::optional<double> overlap;
  double objective = 0.0;
  int recoveries = 0;
  double planner_fraction = 0.0;
  int collisions = 0;

  bool operator==(const EpisodeMetrics&) const = default;
};

// Fraction of visited cells that at least two distinct robots occupied, over
// the logged steps (all t < t*, or the whole horizon on failure). Throws
// UndefinedMetric when no cell was visited.
double overlap(const EpisodeRecord& record);

// J = alpha t* + lambda_overlap Omega.
double objective(int t_star, double overlap, const ObjectiveWeights& weights);

// Recovery activations: robot-steps in recovery whose previous step was not.
int count_recoveries(const EpisodeRecord& record);

// Fraction of robot-steps executed on the planner branch; 0 for empty logs.
double planner_fraction(const EpisodeRecord& record);

EpisodeMetrics compute_metrics(const EpisodeRecord& record, const ObjectiveWeights& weights);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for fewer than two values
  int count = 0;
};

MeanStd mean_std(std::span<const double> values);

struct Summary {
  int episodes = 0;
  double success_rate = 0.0;
  MeanStd exploration_length;  // successful episodes only
  MeanStd overlap;             // episodes where overlap is defined
  MeanStd recoveries;
  MeanStd planner_fraction;
  MeanStd objective;
};

Summary summarize(std::span<const EpisodeMetrics> episodes);

// JSON-lines log: a header object, one object per step, and an end object.
std::string to_jsonl(const EpisodeRecord& record);
EpisodeRecord parse_jsonl(std::string_view text);
void save_episode_log(const EpisodeRecord& record, const std::filesystem::path& path);
EpisodeRecord load_episode_log(const std::filesystem::path& path);

// Per-step known-cell counts: (t, known cells, known fraction of the map).
struct CoveragePoint {
  int t = 0;
  int known = 0;
  double fraction = 0.0;
};
std::vector<CoveragePoint> coverage_curve(const EpisodeRecord& record);

}  // namespace mrx
