#include "mrx/warmstart.hpp"

#include <cmath>
#include <iostream>

#include "mrx/episode.hpp"
#include "mrx/error.hpp"
#include "mrx/matrix.hpp"

namespace mrx {

double batch_loss(const GateParams& params, std::span<const LabeledSample> samples, double l2) {
  double total = 0.0;
  for (const auto& s : samples) total += gate_loss(params, s.z, s.label, 0.0);
  double norm2 = 0.0;
  for (double w : params.weights) norm2 += w * w;
  return total / static_cast<double>(samples.size()) + 0.5 * l2 * norm2;
}

GateGradient batch_gradient(const GateParams& params, std::span<const LabeledSample> samples,
                            double l2) {
  GateGradient g;
  for (const auto& s : samples) {
    const auto one = gate_loss_gradient(params, s.z, s.label, 0.0);
    for (std::size_t k = 0; k < kFeatureCount; ++k) g.weights[k] += one.weights[k];
    g.bias += one.bias;
  }
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    g.weights[k] = g.weights[k] * inv + l2 * params.weights[k];
  }
  g.bias *= inv;
  return g;
}

FitResult warm_start_fit(std::span<const LabeledSample> samples, const FitOptions& options) {
  if (samples.empty()) throw ConfigError("warm start needs at least one labeled sample");
  FitResult out;
  std::size_t positives = 0;
  for (const auto& s : samples) positives += s.label ? 1 : 0;
  if (positives == 0 || positives == samples.size()) {
    std::cerr << "warning: all " << samples.size() << " pseudo-labels are " << (positives ? 1 : 0)
              << "; fitting the bias only\n";
    const double n = static_cast<double>(samples.size());
    const double rate = (static_cast<double>(positives) + 1.0) / (n + 2.0);
    out.params.bias = std::log(rate / (1.0 - rate));
    out.degenerate = true;
    out.converged = true;
    out.loss = batch_loss(out.params, samples, options.l2);
    return out;
  }

  double loss = batch_loss(out.params, samples, options.l2);
  for (out.iterations = 0; out.iterations < options.max_iterations;) {
    const auto g = batch_gradient(out.params, samples, options.l2);
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      out.params.weights[k] -= options.learning_rate * g.weights[k];
    }
    out.params.bias -= options.learning_rate * g.bias;
    ++out.iterations;
    const double next = batch_loss(out.params, samples, options.l2);
    const double change = std::fabs(loss - next) / std::max(std::fabs(loss), 1e-300);
    loss = next;
    if (change < options.tolerance) {
      out.converged = true;
      break;
    }
  }
  if (!out.params.finite()) throw ConfigError("warm start diverged to non-finite parameters");
  out.loss = loss;
  return out;
}

std::vector<LabeledSample> collect_rollouts(const ScenarioConfig& base,
                                            std::span<const std::uint64_t> seeds, int workers) {
  Variant variant;
  variant.architecture = Architecture::Full;
  variant.init = GateInit::Cold;
  variant.adaptation = GateAdaptation::Adaptive;
  std::vector<std::vector<LabeledSample>> per_seed(seeds.size());
  parallel_for(seeds.size(), workers, [&](std::size_t i) {
    ScenarioConfig cfg = base;
    cfg.seed = seeds[i];
    EpisodeOptions options;
    options.samples = &per_seed[i];
    run_episode(cfg, variant, options);
  });
  std::vector<LabeledSample> all;
  for (auto& v : per_seed) all.insert(all.end(), v.begin(), v.end());
  return all;
}

}  // namespace mrx
