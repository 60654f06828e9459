#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "mrx/grid.hpp"

namespace mrx {

inline constexpr std::size_t kFeatureCount = 8;

// Feature order:
//   0 crowding         teammates within the interaction radius / (N - 1)
//   1 stuck            no pose change over a full history window
//   2 goal distance    BFS steps to goal / (width + height); 1 without a goal
//   3 action ratio     |feasible actions| / 5
//   4 unknown (robot)  Unk fraction of the sensing window around the robot
//   5 unknown (goal)   Unk fraction of the sensing window around the goal
//   6 blockage         1 - free four-neighbors / 4
//   7 planner ok       planner returned a valid action toward the goal
using FeatureVector = std::array<double, kFeatureCount>;

struct GateParams {
  std::array<double, kFeatureCount> weights{};
  double bias = 0.0;

  bool finite() const;
  bool operator==(const GateParams&) const = default;
};

struct LearningParams {
  double learning_rate = 0.05;
  double l2 = 1e-3;
  double margin = 0.5;

  void validate() const;
};

struct HysteresisConfig {
  double tau_high = 0.7;
  double tau_low = 0.3;
  int dwell = 3;

  void validate() const;
};

struct GateState {
  int switch_state = 1;  // 1 = planner branch, 0 = reactive branch
  int count_high = 0;
  int count_low = 0;

  bool operator==(const GateState&) const = default;
};

double sigmoid(double x);

// p = sigmoid(w . z + b).
double predict(const GateParams& params, const FeatureVector& z);

// Dual-threshold switch with dwell. Counters grow while their threshold is
// met and reset on violation; the switch flips after `dwell` consecutive
// confirmations and both counters reset on a flip.
GateState update_hysteresis(const GateState& state, double fidelity, const HysteresisConfig& config);

// Regularized cross-entropy of the gate on one sample. `target` is usually a
// 0/1 pseudo-label but any value in [0, 1] is accepted.
double gate_loss(const GateParams& params, const FeatureVector& z, double target, double l2);

struct GateGradient {
  std::array<double, kFeatureCount> weights{};
  double bias = 0.0;
};

GateGradient gate_loss_gradient(const GateParams& params, const FeatureVector& z, double target,
                                double l2);

enum class UpdateStatus { Applied, BelowMargin, RejectedNonFinite };

// One margin-gated SGD step. `fidelity` must be predict(params, z). On a
// non-finite result the parameters are left untouched.
UpdateStatus online_update(GateParams& params, const FeatureVector& z, double fidelity, int label,
                           double score, const LearningParams& learning);

// Plain-text parameter file: a version line followed by w1..w8 and b.
inline constexpr std::string_view kGateFileHeader = "gate-params v1";
std::string format_gate_params(const GateParams& params);
GateParams parse_gate_params(std::string_view text);
void save_gate_params(const GateParams& params, const std::filesystem::path& path);
GateParams load_gate_params(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// History and self-supervision

struct StepRecord {
  Cell pose;                           // pose after the step
  bool moved = false;
  int newly_seen = 0;                  // cells this robot's sensing revealed
  std::optional<Cell> goal;
  std::optional<int> goal_distance;    // BFS steps to goal at decision time
  int collisions = 0;                  // obstacle contacts and cancelled robot moves
  int violations = 0;                  // infeasible proposals replaced by Stay
  bool switch_flipped = false;
  bool planner_ok = false;
  bool planner_selected = false;       // gate switch was on the planner branch
  bool recovery = false;
};

// Fixed-capacity FIFO of the most recent step records, oldest first.
class HistoryBuffer {
 public:
  explicit HistoryBuffer(std::size_t capacity = 8);

  void push(const StepRecord& record);
  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool full() const { return records_.size() == capacity_; }
  bool empty() const { return records_.empty(); }
  const StepRecord& operator[](std::size_t i) const { return records_[i]; }
  const StepRecord& back() const { return records_.back(); }
  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

 private:
  std::size_t capacity_;
  std::deque<StepRecord> records_;
};

struct SurrogateWeights {
  double coverage = 1.0;
  double distance = 0.5;
  double risk = 2.0;
  double stall = 1.0;

  void validate() const;
};

struct WindowTerms {
  double coverage = 0.0;  // newly observed cells
  double progress = 0.0;  // goal distance drop under the current goal
  double risk = 0.0;      // collisions plus violations
  double stall = 0.0;     // 1 if neither moved nor saw anything new
};

WindowTerms window_terms(const HistoryBuffer& history);
double surrogate_score(const WindowTerms& terms, const SurrogateWeights& weights);
double surrogate_score(const HistoryBuffer& history, const SurrogateWeights& weights);
int pseudo_label(double score);

// One self-supervised training pair collected during rollouts.
struct LabeledSample {
  FeatureVector z{};
  int label = 0;
};

// ---------------------------------------------------------------------------
// Feature extraction

struct FeatureContext {
  const GridMap* map = nullptr;
  Cell pose;
  std::optional<Cell> goal;
  std::span<const Cell> teammates;     // other robots only
  const DistanceField* own_field = nullptr;  // BFS from pose on map
  ActionSet feasible;
  const HistoryBuffer* history = nullptr;
  bool planner_ok = false;
  int sensing_radius = 3;
  int interaction_radius = 3;
  int team_size = 1;
};

FeatureVector extract_features(const FeatureContext& ctx);

}  // namespace mrx
