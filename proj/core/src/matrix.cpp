#include "mrx/matrix.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "mrx/episode.hpp"
#include "mrx/error.hpp"

namespace mrx {

int default_worker_count() {
  if (const char* env = std::getenv("MRX_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    std::cerr << "warning: ignoring MRX_WORKERS='" << env << "'\n";
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = first + i;
  return seeds;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 0) workers = default_worker_count();
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_row(const std::string& label, const std::string& seed, const std::string& sr,
                    const std::string& el, const std::string& overlap, const std::string& rec,
                    const std::string& pf, const std::string& wall) {
  return label + ',' + seed + ',' + sr + ',' + el + ',' + overlap + ',' + rec + ',' + pf + ',' +
         wall + '\n';
}

}  // namespace

std::string MatrixResult::to_csv(bool timing) const {
  std::string out = "variant,seed,SR,EL,overlap,recoveries,planner_fraction,wall_time\n";
  std::size_t row = 0;
  for (const auto& g : groups) {
    const std::string label = g.scenario + '/' + g.variant;
    const std::size_t end = std::min(rows.size(), row + static_cast<std::size_t>(g.summary.episodes));
    for (; row < end; ++row) {
      const auto& r = rows[row];
      const auto& m = r.metrics;
      out += csv_row(label, std::to_string(r.seed), m.success ? "1" : "0",
                     m.success ? std::to_string(*m.t_star) : "",
                     m.overlap ? fixed(*m.overlap) : "", std::to_string(m.recoveries),
                     fixed(m.planner_fraction), timing ? fixed(r.wall_time) : "0");
    }
    const auto& s = g.summary;
    out += csv_row(label, "mean", fixed(s.success_rate),
                   s.exploration_length.count ? fixed(s.exploration_length.mean) : "",
                   s.overlap.count ? fixed(s.overlap.mean) : "", fixed(s.recoveries.mean),
                   fixed(s.planner_fraction.mean), timing ? fixed(g.wall_time) : "0");
  }
  return out;
}

const MatrixGroup& MatrixResult::group(std::string_view scenario, std::string_view variant) const {
  for (const auto& g : groups) {
    if (g.scenario == scenario && g.variant == variant) return g;
  }
  throw std::out_of_range("no matrix group " + std::string(scenario) + "/" + std::string(variant));
}

MatrixResult run_matrix(std::span<const ScenarioConfig> configs, std::span<const Variant> variants,
                        std::span<const std::uint64_t> seeds, const MatrixOptions& options) {
  // Configuration problems surface before any episode runs.
  std::vector<std::optional<GateParams>> warm(configs.size());
  const bool any_warm = std::any_of(variants.begin(), variants.end(),
                                    [](const Variant& v) { return v.init == GateInit::Warm; });
  for (std::size_t c = 0; c < configs.size(); ++c) {
    configs[c].validate();
    if (!any_warm) continue;
    if (configs[c].warm_params.empty()) {
      throw ConfigError("warm variants need gate.warm_params for scenario " + configs[c].label());
    }
    warm[c] = load_gate_params(configs[c].warm_params);
  }
  if (!options.log_dir.empty()) std::filesystem::create_directories(options.log_dir);

  const std::size_t nv = variants.size();
  const std::size_t ns = seeds.size();
  MatrixResult result;
  result.rows.resize(configs.size() * nv * ns);

  parallel_for(result.rows.size(), options.workers, [&](std::size_t job) {
    const std::size_t c = job / (nv * ns);
    const std::size_t v = (job / ns) % nv;
    const std::size_t s = job % ns;
    ScenarioConfig cfg = configs[c];
    cfg.seed = seeds[s];
    EpisodeRow& row = result.rows[job];
    row.scenario = cfg.label();
    row.variant = variants[v].label();
    row.seed = seeds[s];
    const auto start = std::chrono::steady_clock::now();
    try {
      EpisodeOptions eo;
      if (warm[c]) eo.warm_params = &*warm[c];
      auto ep = run_episode(cfg, variants[v], eo);
      row.metrics = ep.metrics;
      if (!options.log_dir.empty()) {
        save_episode_log(ep.record, options.log_dir / (row.scenario + "_" + row.variant + "_" +
                                                       std::to_string(row.seed) + ".jsonl"));
      }
    } catch (const std::exception& e) {
      row.metrics = EpisodeMetrics{};
      row.error = e.what();
      std::cerr << "episode " << row.scenario << '/' << row.variant << " seed " << row.seed
                << " failed: " << e.what() << '\n';
    }
    row.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  for (std::size_t c = 0; c < configs.size(); ++c) {
    for (std::size_t v = 0; v < nv; ++v) {
      std::vector<EpisodeMetrics> ms;
      double wall = 0.0;
      const std::size_t base = (c * nv + v) * ns;
      for (std::size_t s = 0; s < ns; ++s) {
        ms.push_back(result.rows[base + s].metrics);
        wall += result.rows[base + s].wall_time;
      }
      MatrixGroup g;
      g.scenario = configs[c].label();
      g.variant = variants[v].label();
      g.summary = summarize(ms);
      g.wall_time = ns ? wall / static_cast<double>(ns) : 0.0;
      result.groups.push_back(std::move(g));
    }
  }
  return result;
}

}  // namespace mrx
