#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mrx/gate.hpp"
#include "mrx/scenario.hpp"

namespace mrx {

struct FitOptions {
  double l2 = 1e-3;
  double learning_rate = 0.5;
  int max_iterations = 10000;
  double tolerance = 1e-6;  // relative loss change that ends the descent
};

struct FitResult {
  GateParams params;
  int iterations = 0;
  double loss = 0.0;
  bool degenerate = false;  // all labels equal; bias-only fit
  bool converged = false;
};

// Mean per-sample cross-entropy plus l2/2 |w|^2, and its gradient.
double batch_loss(const GateParams& params, std::span<const LabeledSample> samples, double l2);
GateGradient batch_gradient(const GateParams& params, std::span<const LabeledSample> samples,
                            double l2);

// Full-batch gradient descent from zero parameters. With a single label
// value the weights stay at zero and the bias is the smoothed log-odds of the
// labels. Throws ConfigError on an empty sample set.
FitResult warm_start_fit(std::span<const LabeledSample> samples, const FitOptions& options = {});

// Pairs logged by cold-start, adaptive Full episodes on the given seeds.
std::vector<LabeledSample> collect_rollouts(const ScenarioConfig& base,
                                            std::span<const std::uint64_t> seeds, int workers = 0);

}  // namespace mrx
