#include "mrx/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "mrx/error.hpp"

namespace mrx {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view raw) {
  const std::string text = trim(raw);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("bad value '" + std::string(raw) + "' for " + std::string(key));
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view raw) {
  const std::string text = trim(raw);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("bad boolean '" + std::string(raw) + "' for " + std::string(key));
}

std::string fmt(double v) {
  // Shortest text that reads back to the same double.
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Binding {
  const char* key;
  std::function<void(ScenarioConfig&, std::string_view, std::string_view)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

template <typename T, typename Member>
Binding num(const char* key, Member member) {
  return {key,
          [member](ScenarioConfig& c, std::string_view k, std::string_view v) {
            std::invoke(member, c) = parse_number<T>(k, v);
          },
          [member](const ScenarioConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return fmt(std::invoke(member, c));
            } else {
              return std::to_string(std::invoke(member, c));
            }
          }};
}

#define MRX_FIELD(path) [](auto& c) -> auto& { return c.path; }

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> table = {
      {"scenario.name", [](ScenarioConfig& c, std::string_view, std::string_view v) { c.name = trim(v); },
       [](const ScenarioConfig& c) { return c.name; }},
      num<int>("scenario.width", MRX_FIELD(width)),
      num<int>("scenario.height", MRX_FIELD(height)),
      num<int>("scenario.robots", MRX_FIELD(team_size)),
      num<double>("scenario.static_density", MRX_FIELD(static_density)),
      num<double>("scenario.static_density_max", MRX_FIELD(static_density_max)),
      num<int>("scenario.dynamic_obstacles", MRX_FIELD(dynamic_obstacles)),
      num<double>("scenario.speed_ratio", MRX_FIELD(speed_ratio)),
      num<int>("scenario.sensing_radius", MRX_FIELD(sensing_radius)),
      num<int>("scenario.interaction_radius", MRX_FIELD(interaction_radius)),
      num<int>("scenario.horizon", MRX_FIELD(horizon)),
      num<int>("scenario.obstacle_memory", MRX_FIELD(obstacle_memory)),
      num<std::uint64_t>("scenario.seed", MRX_FIELD(seed)),
      {"scenario.strict_collisions",
       [](ScenarioConfig& c, std::string_view k, std::string_view v) { c.strict_collisions = parse_bool(k, v); },
       [](const ScenarioConfig& c) { return std::string(c.strict_collisions ? "true" : "false"); }},
      num<int>("scenario.max_attempts", MRX_FIELD(max_generation_attempts)),
      num<double>("assignment.lambda0", MRX_FIELD(assignment.lambda0)),
      num<double>("assignment.lambda1", MRX_FIELD(assignment.lambda1)),
      num<double>("assignment.rho0", MRX_FIELD(assignment.rho0)),
      num<double>("assignment.rho1", MRX_FIELD(assignment.rho1)),
      num<double>("assignment.beta", MRX_FIELD(assignment.beta)),
      num<double>("assignment.sigma_x", MRX_FIELD(assignment.sigma_x)),
      num<double>("assignment.sigma_g", MRX_FIELD(assignment.sigma_g)),
      num<int>("assignment.reassign_interval", MRX_FIELD(assignment.reassign_interval)),
      num<double>("gate.tau_high", MRX_FIELD(hysteresis.tau_high)),
      num<double>("gate.tau_low", MRX_FIELD(hysteresis.tau_low)),
      num<int>("gate.dwell", MRX_FIELD(hysteresis.dwell)),
      num<int>("gate.window", MRX_FIELD(history_window)),
      num<int>("gate.update_interval", MRX_FIELD(update_interval)),
      num<double>("gate.learning_rate", MRX_FIELD(learning.learning_rate)),
      num<double>("gate.l2", MRX_FIELD(learning.l2)),
      num<double>("gate.margin", MRX_FIELD(learning.margin)),
      num<double>("gate.w_coverage", MRX_FIELD(surrogate.coverage)),
      num<double>("gate.w_distance", MRX_FIELD(surrogate.distance)),
      num<double>("gate.w_risk", MRX_FIELD(surrogate.risk)),
      num<double>("gate.w_stall", MRX_FIELD(surrogate.stall)),
      {"gate.warm_params", [](ScenarioConfig& c, std::string_view, std::string_view v) { c.warm_params = trim(v); },
       [](const ScenarioConfig& c) { return c.warm_params; }},
      num<int>("execution.recovery_length", MRX_FIELD(recovery.length)),
      num<int>("execution.oscillation_flips", MRX_FIELD(recovery.oscillation_flips)),
      num<double>("execution.obstacle_penalty", MRX_FIELD(reactive.obstacle_penalty)),
      num<double>("execution.teammate_penalty", MRX_FIELD(reactive.teammate_penalty)),
      num<double>("execution.stay_penalty", MRX_FIELD(reactive.stay_penalty)),
      num<double>("execution.jitter", MRX_FIELD(reactive.jitter)),
      {"execution.policy_command",
       [](ScenarioConfig& c, std::string_view, std::string_view v) { c.policy_command = trim(v); },
       [](const ScenarioConfig& c) { return c.policy_command; }},
      num<double>("metrics.alpha", MRX_FIELD(objective.alpha)),
      num<double>("metrics.lambda_overlap", MRX_FIELD(objective.lambda_overlap)),
  };
  return table;
}

#undef MRX_FIELD

const Binding& find_binding(std::string_view key) {
  for (const auto& b : bindings()) {
    if (key == b.key) return b;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& b : bindings()) keys.emplace_back(b.key);
  return keys;
}

void apply_setting(ScenarioConfig& config, std::string_view key, std::string_view value) {
  find_binding(key).set(config, key, value);
}

void apply_ini(ScenarioConfig& config, std::string_view text) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      apply_setting(config, section + "." + key, value.get_value<std::string>());
    }
  }
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ScenarioConfig config;
  apply_ini(config, buf.str());
  return config;
}

std::vector<std::string> apply_overrides(ScenarioConfig& config,
                                         std::span<const std::string> args) {
  std::vector<std::string> rest;
  for (const auto& arg : args) {
    const auto eq = arg.find('=');
    if (arg.rfind("--", 0) != 0 || eq == std::string::npos ||
        arg.find('.') == std::string::npos || arg.find('.') > eq) {
      rest.push_back(arg);
      continue;
    }
    apply_setting(config, std::string_view(arg).substr(2, eq - 2), std::string_view(arg).substr(eq + 1));
  }
  return rest;
}

std::string format_config(const ScenarioConfig& config) {
  std::string out;
  std::string section;
  for (const auto& b : bindings()) {
    const std::string_view key = b.key;
    const auto dot = key.find('.');
    if (key.substr(0, dot) != section) {
      section = std::string(key.substr(0, dot));
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    out += std::string(key.substr(dot + 1)) + " = " + b.get(config) + "\n";
  }
  return out;
}

}  // namespace mrx
