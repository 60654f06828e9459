// mrx: command-line front end for episodes, experiment matrices, gate
// warm-starting and log post-processing.
//
// Exit codes: 0 success, 2 configuration or usage error, 1 anything else.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mrx/config.hpp"
#include "mrx/episode.hpp"
#include "mrx/error.hpp"
#include "mrx/matrix.hpp"
#include "mrx/metrics.hpp"
#include "mrx/warmstart.hpp"

namespace {

using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 1;

json metrics_json(const mrx::EpisodeMetrics& m) {
  json j;
  j["success"] = m.success;
  j["t_star"] = m.t_star ? json(*m.t_star) : json(nullptr);
  j["exploration_length"] = m.exploration_length;
  j["overlap"] = m.overlap ? json(*m.overlap) : json(nullptr);
  j["objective"] = m.objective;
  j["recoveries"] = m.recoveries;
  j["planner_fraction"] = m.planner_fraction;
  j["collisions"] = m.collisions;
  return j;
}

json mean_std_json(const mrx::MeanStd& ms) {
  return {{"mean", ms.mean}, {"std", ms.std}, {"count", ms.count}};
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw mrx::ConfigError("cannot write " + path);
  out << text;
}

mrx::ScenarioConfig base_config(const std::string& path, const std::vector<std::string>& overrides) {
  mrx::ScenarioConfig cfg = path.empty() ? mrx::ScenarioConfig{} : mrx::load_config(path);
  mrx::apply_overrides(cfg, overrides);
  cfg.validate();
  return cfg;
}

std::vector<mrx::Variant> parse_variants(const std::vector<std::string>& tags) {
  std::vector<mrx::Variant> out;
  for (const auto& t : tags) out.push_back(mrx::Variant::parse(t));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  // "--section.key=value" settings are peeled off before CLI11 sees the rest.
  std::vector<std::string> overrides;
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    const auto eq = a.find('=');
    const auto dot = a.find('.');
    if (a.rfind("--", 0) == 0 && eq != std::string::npos && dot != std::string::npos && dot < eq) {
      overrides.push_back(a);
    } else {
      args.push_back(a);
    }
  }
  std::reverse(args.begin(), args.end());

  CLI::App app{"Multi-robot frontier exploration simulator"};
  app.require_subcommand(1);
  app.footer("Any config key can be overridden with --section.key=value, e.g. --scenario.robots=8.");

  std::string config_path;
  std::vector<std::string> config_paths;
  std::vector<std::string> variant_tags{"Full"};
  std::string out_path;
  std::string log_path;
  std::string log_dir;
  std::uint64_t first_seed = 0;
  std::size_t seed_count = 10;
  int workers = 0;
  bool timing = false;
  std::size_t min_samples = 500;
  std::vector<std::string> log_paths;
  double alpha = 1.0;
  double lambda_overlap = 0.1;
  bool print_config = false;

  auto* run = app.add_subcommand("run", "Run one episode and print its metrics as JSON");
  run->add_option("-c,--config", config_path, "INI config file");
  run->add_option("-v,--variant", variant_tags, "Variant tag")->expected(1);
  run->add_option("--log", log_path, "Write the JSON-lines episode log here");
  run->add_flag("--print-config", print_config, "Print the effective config and exit");

  auto* matrix = app.add_subcommand("matrix", "Run configs x variants x seeds and write the CSV");
  matrix->add_option("-c,--config", config_paths, "INI config file(s)");
  matrix->add_option("-v,--variants", variant_tags, "Variant tags")->delimiter(',');
  matrix->add_option("--first-seed", first_seed, "First seed");
  matrix->add_option("-n,--seeds", seed_count, "Number of consecutive seeds");
  matrix->add_option("-j,--workers", workers, "Worker threads (default: MRX_WORKERS or all cores)");
  matrix->add_option("-o,--out", out_path, "CSV output path ('-' for stdout)");
  matrix->add_option("--log-dir", log_dir, "Directory for per-episode JSON-lines logs");
  matrix->add_option("--summary", log_path, "Write per-group mean/std summary JSON here");
  matrix->add_flag("--timing", timing, "Record measured wall times (breaks byte-identical output)");

  auto* warm = app.add_subcommand("warmstart", "Fit a gate parameter file from cold adaptive rollouts");
  warm->add_option("-c,--config", config_path, "INI config file");
  warm->add_option("--first-seed", first_seed, "First rollout seed");
  warm->add_option("-n,--seeds", seed_count, "Number of rollout episodes");
  warm->add_option("-j,--workers", workers, "Worker threads");
  warm->add_option("--min-samples", min_samples, "Minimum labeled pairs required");
  warm->add_option("-o,--out", out_path, "Gate parameter file")->required();

  auto* replay = app.add_subcommand("replay", "Recompute metrics from a JSON-lines log");
  replay->add_option("log", log_path, "Episode log")->required();
  replay->add_option("--alpha", alpha, "Completion-time weight");
  replay->add_option("--lambda-overlap", lambda_overlap, "Overlap weight");

  auto* plot = app.add_subcommand("emit-plot-data", "Per-step coverage curves from logs as CSV");
  plot->add_option("logs", log_paths, "Episode logs")->required();
  plot->add_option("-o,--out", out_path, "CSV output path ('-' for stdout)");

  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      const auto cfg = base_config(config_path, overrides);
      if (print_config) {
        std::cout << mrx::format_config(cfg);
        return 0;
      }
      const auto variant = mrx::Variant::parse(variant_tags.at(0));
      std::optional<mrx::GateParams> params;
      mrx::EpisodeOptions options;
      if (variant.init == mrx::GateInit::Warm) {
        if (cfg.warm_params.empty()) throw mrx::ConfigError("warm variant needs gate.warm_params");
        params = mrx::load_gate_params(cfg.warm_params);
        options.warm_params = &*params;
      }
      const auto result = mrx::run_episode(cfg, variant, options);
      if (!log_path.empty()) mrx::save_episode_log(result.record, log_path);
      json j = metrics_json(result.metrics);
      j["scenario"] = result.record.header.scenario;
      j["variant"] = result.record.header.variant;
      j["seed"] = cfg.seed;
      j["steps"] = result.record.steps_taken();
      std::cout << j.dump(2) << '\n';
      return 0;
    }

    if (*matrix) {
      std::vector<mrx::ScenarioConfig> configs;
      if (config_paths.empty()) config_paths.emplace_back();
      for (const auto& p : config_paths) configs.push_back(base_config(p, overrides));
      const auto variants = parse_variants(variant_tags);
      const auto seeds = mrx::seed_range(first_seed, seed_count);
      mrx::MatrixOptions mo;
      mo.workers = workers;
      mo.timing = timing;
      mo.log_dir = log_dir;
      const auto result = mrx::run_matrix(configs, variants, seeds, mo);
      write_text(out_path, result.to_csv(timing));
      if (!log_path.empty()) {
        json groups = json::array();
        for (const auto& g : result.groups) {
          const auto& s = g.summary;
          groups.push_back({{"scenario", g.scenario},
                            {"variant", g.variant},
                            {"episodes", s.episodes},
                            {"success_rate", s.success_rate},
                            {"exploration_length", mean_std_json(s.exploration_length)},
                            {"overlap", mean_std_json(s.overlap)},
                            {"recoveries", mean_std_json(s.recoveries)},
                            {"planner_fraction", mean_std_json(s.planner_fraction)},
                            {"objective", mean_std_json(s.objective)}});
        }
        write_text(log_path, groups.dump(2) + "\n");
      }
      for (const auto& r : result.rows) {
        if (!r.error.empty()) return kExitRuntime;
      }
      return 0;
    }

    if (*warm) {
      const auto cfg = base_config(config_path, overrides);
      const auto seeds = mrx::seed_range(first_seed, seed_count);
      const auto samples = mrx::collect_rollouts(cfg, seeds, workers);
      if (samples.size() < min_samples) {
        std::cerr << "error: only " << samples.size() << " labeled pairs, need " << min_samples
                  << "; add seeds\n";
        return kExitConfig;
      }
      mrx::FitOptions fo;
      fo.l2 = cfg.learning.l2;
      const auto fit = mrx::warm_start_fit(samples, fo);
      mrx::save_gate_params(fit.params, out_path);
      std::size_t positives = 0;
      for (const auto& s : samples) positives += s.label ? 1 : 0;
      std::cerr << "fitted on " << samples.size() << " pairs (" << positives << " positive), "
                << fit.iterations << " iterations, loss " << fit.loss
                << (fit.converged ? "" : " (iteration cap reached)") << '\n';
      return 0;
    }

    if (*replay) {
      const auto record = mrx::load_episode_log(log_path);
      const mrx::ObjectiveWeights weights{alpha, lambda_overlap};
      weights.validate();
      json j = metrics_json(mrx::compute_metrics(record, weights));
      j["scenario"] = record.header.scenario;
      j["variant"] = record.header.variant;
      j["seed"] = record.header.seed;
      j["steps"] = record.steps_taken();
      std::cout << j.dump(2) << '\n';
      return 0;
    }

    if (*plot) {
      std::string csv = "scenario,variant,seed,t,known,fraction\n";
      for (const auto& p : log_paths) {
        const auto record = mrx::load_episode_log(p);
        for (const auto& pt : mrx::coverage_curve(record)) {
          char buf[64];
          std::snprintf(buf, sizeof buf, ",%d,%d,%.6f\n", pt.t, pt.known, pt.fraction);
          csv += record.header.scenario + "," + record.header.variant + "," +
                 std::to_string(record.header.seed) + buf;
        }
      }
      write_text(out_path, csv);
      return 0;
    }
  } catch (const mrx::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
