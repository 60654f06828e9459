#include "mrx/gate.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mrx/error.hpp"

namespace mrx {

bool GateParams::finite() const {
  return std::all_of(weights.begin(), weights.end(), [](double v) { return std::isfinite(v); }) &&
         std::isfinite(bias);
}

void LearningParams::validate() const {
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) {
    throw ConfigError("gate learning rate must be positive");
  }
  if (l2 < 0 || margin < 0) throw ConfigError("gate l2 and margin must be non-negative");
}

void HysteresisConfig::validate() const {
  if (!(tau_high > tau_low)) throw ConfigError("hysteresis requires tau_high > tau_low");
  if (tau_low < 0 || tau_high > 1) throw ConfigError("hysteresis thresholds must lie in [0, 1]");
  if (dwell < 1) throw ConfigError("hysteresis dwell must be >= 1");
}

double sigmoid(double x) {
  // Split by sign so exp never overflows.
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double predict(const GateParams& params, const FeatureVector& z) {
  double logit = params.bias;
  for (std::size_t k = 0; k < kFeatureCount; ++k) logit += params.weights[k] * z[k];
  return sigmoid(logit);
}

GateState update_hysteresis(const GateState& state, double fidelity, const HysteresisConfig& config) {
  GateState next = state;
  next.count_high = fidelity >= config.tau_high ? state.count_high + 1 : 0;
  next.count_low = fidelity <= config.tau_low ? state.count_low + 1 : 0;
  assert(next.count_high == 0 || next.count_low == 0);
  if (state.switch_state == 0 && next.count_high >= config.dwell) {
    next.switch_state = 1;
    next.count_high = next.count_low = 0;
  } else if (state.switch_state == 1 && next.count_low >= config.dwell) {
    next.switch_state = 0;
    next.count_high = next.count_low = 0;
  }
  return next;
}

double gate_loss(const GateParams& params, const FeatureVector& z, double target, double l2) {
  double logit = params.bias;
  for (std::size_t k = 0; k < kFeatureCount; ++k) logit += params.weights[k] * z[k];
  // log p = -softplus(-x), log(1 - p) = -softplus(x)
  auto softplus = [](double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); };
  double norm2 = 0.0;
  for (double w : params.weights) norm2 += w * w;
  return target * softplus(-logit) + (1.0 - target) * softplus(logit) + 0.5 * l2 * norm2;
}

GateGradient gate_loss_gradient(const GateParams& params, const FeatureVector& z, double target,
                                double l2) {
  const double residual = predict(params, z) - target;
  GateGradient g;
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    g.weights[k] = residual * z[k] + l2 * params.weights[k];
  }
  g.bias = residual;
  return g;
}

UpdateStatus online_update(GateParams& params, const FeatureVector& z, double fidelity, int label,
                           double score, const LearningParams& learning) {
  if (std::abs(score) < learning.margin) return UpdateStatus::BelowMargin;
  const double residual = fidelity - static_cast<double>(label);
  GateParams next = params;
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    next.weights[k] -= learning.learning_rate * (residual * z[k] + learning.l2 * params.weights[k]);
  }
  next.bias -= learning.learning_rate * residual;
  if (!next.finite()) return UpdateStatus::RejectedNonFinite;
  params = next;
  return UpdateStatus::Applied;
}

std::string format_gate_params(const GateParams& params) {
  std::string out(kGateFileHeader);
  out.push_back('\n');
  char buf[64];
  for (double w : params.weights) {
    std::snprintf(buf, sizeof buf, "%.17g\n", w);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g\n", params.bias);
  out += buf;
  return out;
}

GateParams parse_gate_params(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::string header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    header = line;
    break;
  }
  if (header != kGateFileHeader) {
    throw ConfigError("gate parameter file: expected header '" + std::string(kGateFileHeader) +
                      "', got '" + header + "'");
  }
  std::array<double, kFeatureCount + 1> values{};
  std::size_t n = 0;
  std::string token;
  while (in >> token) {
    if (token.front() == '#') {
      std::getline(in, line);
      continue;
    }
    if (n == values.size()) throw ConfigError("gate parameter file: more than 9 numbers");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || !std::isfinite(v)) {
      throw ConfigError("gate parameter file: bad number '" + token + "'");
    }
    values[n++] = v;
  }
  if (n != values.size()) {
    throw ConfigError("gate parameter file: expected 9 numbers, got " + std::to_string(n));
  }
  GateParams params;
  std::copy_n(values.begin(), kFeatureCount, params.weights.begin());
  params.bias = values[kFeatureCount];
  return params;
}

void save_gate_params(const GateParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write gate parameter file " + path.string());
  out << format_gate_params(params);
}

GateParams load_gate_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open gate parameter file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_gate_params(buf.str());
}

// ---------------------------------------------------------------------------

HistoryBuffer::HistoryBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("history window must be >= 1");
}

void HistoryBuffer::push(const StepRecord& record) {
  if (records_.size() == capacity_) records_.pop_front();
  records_.push_back(record);
}

void SurrogateWeights::validate() const {
  if (!(coverage > 0 && distance > 0 && risk > 0 && stall > 0)) {
    throw ConfigError("surrogate weights must all be positive");
  }
}

WindowTerms window_terms(const HistoryBuffer& history) {
  WindowTerms t;
  if (history.empty()) return t;
  bool moved = false;
  for (const auto& rec : history) {
    t.coverage += rec.newly_seen;
    t.risk += rec.collisions + rec.violations;
    moved = moved || rec.moved;
  }
  const StepRecord& last = history.back();
  if (last.goal && last.goal_distance) {
    // Progress is measured from the first record that pursued the same goal.
    for (const auto& rec : history) {
      if (rec.goal == last.goal && rec.goal_distance) {
        t.progress = *rec.goal_distance - *last.goal_distance;
        break;
      }
    }
  }
  t.stall = (!moved && t.coverage == 0) ? 1.0 : 0.0;
  return t;
}

double surrogate_score(const WindowTerms& terms, const SurrogateWeights& weights) {
  return weights.coverage * terms.coverage + weights.distance * terms.progress -
         weights.risk * terms.risk - weights.stall * terms.stall;
}

double surrogate_score(const HistoryBuffer& history, const SurrogateWeights& weights) {
  return surrogate_score(window_terms(history), weights);
}

int pseudo_label(double score) { return score >= 0.0 ? 1 : 0; }

// ---------------------------------------------------------------------------

namespace {

double unknown_ratio(const GridMap& map, Cell center, int radius) {
  const Window win = map.window(center, radius);
  int unknown = 0;
  for (int r = win.row0; r <= win.row1; ++r) {
    for (int c = win.col0; c <= win.col1; ++c) {
      unknown += map.at(Cell{r, c}) == CellState::Unk ? 1 : 0;
    }
  }
  return static_cast<double>(unknown) / static_cast<double>(win.cell_count());
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

FeatureVector extract_features(const FeatureContext& ctx) {
  const GridMap& map = *ctx.map;
  FeatureVector z{};

  if (ctx.team_size > 1) {
    int near = 0;
    for (const Cell& mate : ctx.teammates) {
      const auto d = ctx.own_field->at(mate);
      if (d && *d <= ctx.interaction_radius) ++near;
    }
    z[0] = static_cast<double>(near) / static_cast<double>(ctx.team_size - 1);
  }

  const HistoryBuffer& hist = *ctx.history;
  if (hist.full()) {
    const bool moved = std::any_of(hist.begin(), hist.end(), [](const auto& r) { return r.moved; });
    z[1] = moved ? 0.0 : 1.0;
  }

  z[2] = 1.0;
  if (ctx.goal) {
    if (const auto d = ctx.own_field->at(*ctx.goal)) {
      z[2] = static_cast<double>(*d) / static_cast<double>(map.width() + map.height());
    }
  }

  z[3] = static_cast<double>(ctx.feasible.size()) / 5.0;
  z[4] = unknown_ratio(map, ctx.pose, ctx.sensing_radius);
  z[5] = ctx.goal ? unknown_ratio(map, *ctx.goal, ctx.sensing_radius) : 1.0;

  int free_neighbors = 0;
  for (const Cell& off : kNeighbors4) free_neighbors += map.is_free(ctx.pose + off) ? 1 : 0;
  z[6] = 1.0 - static_cast<double>(free_neighbors) / 4.0;

  z[7] = ctx.planner_ok ? 1.0 : 0.0;

  for (double& v : z) v = clamp01(v);
  return z;
}

}  // namespace mrx
