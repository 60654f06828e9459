#include <benchmark/benchmark.h>

#include <vector>

#include "mrx/allocators.hpp"
#include "mrx/assignment.hpp"
#include "mrx/episode.hpp"
#include "mrx/execution.hpp"
#include "mrx/grid.hpp"
#include "mrx/scenario.hpp"

using namespace mrx;

namespace {

// Scenario with roughly half of the truth revealed around the starts.
struct Fixture {
  Scenario sc;
  GridMap known;

  explicit Fixture(int side, int team = 8) {
    ScenarioConfig cfg;
    cfg.width = cfg.height = side;
    cfg.team_size = team;
    cfg.seed = 7;
    sc = generate_scenario(cfg);
    known = GridMap(side, side);
    for (const Cell& s : sc.starts) sense_and_fuse(known, sc.truth, {}, s, side / 4);
  }
};

void bm_bfs(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bfs_distance_field(f.known, f.sc.starts[0]));
}
BENCHMARK(bm_bfs)->Arg(40)->Arg(80)->Arg(160);

void bm_frontiers(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(extract_frontiers(f.known));
}
BENCHMARK(bm_frontiers)->Arg(40)->Arg(80)->Arg(160);

void bm_astar(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  const auto fr = extract_frontiers(f.known);
  const auto field = bfs_distance_field(f.known, f.sc.starts[0]);
  const auto goal = nearest_frontier(field, fr);
  for (auto _ : state) benchmark::DoNotOptimize(plan_astar(f.known, f.sc.starts[0], goal, {}));
}
BENCHMARK(bm_astar)->Arg(40)->Arg(80)->Arg(160);

void bm_assignment_round(benchmark::State& state) {
  const Fixture f(80, static_cast<int>(state.range(0)));
  const auto fr = extract_frontiers(f.known);
  const std::vector<std::optional<Cell>> goals(f.sc.starts.size());
  const AssignmentParams params;
  for (auto _ : state) {
    std::vector<DistanceField> fields;
    for (const Cell& s : f.sc.starts) fields.push_back(bfs_distance_field(f.known, s));
    const auto ctx = AssignmentContext::build(f.known, f.sc.starts, goals, std::move(fields), fr, 3);
    for (int i = 0; i < ctx.team_size(); ++i) benchmark::DoNotOptimize(assign_target(i, ctx, 0.5, params));
  }
}
BENCHMARK(bm_assignment_round)->Arg(4)->Arg(8)->Arg(16);

void bm_matching(benchmark::State& state, bool auction) {
  const Fixture f(80, static_cast<int>(state.range(0)));
  const auto fr = extract_frontiers(f.known);
  std::vector<DistanceField> fields;
  for (const Cell& s : f.sc.starts) fields.push_back(bfs_distance_field(f.known, s));
  const auto costs = distance_costs(fr, fields);
  for (auto _ : state) {
    if (auction) {
      benchmark::DoNotOptimize(auction_assignment(costs));
    } else {
      benchmark::DoNotOptimize(hungarian_assignment(costs));
    }
  }
  state.counters["frontiers"] = static_cast<double>(fr.size());
}
BENCHMARK_CAPTURE(bm_matching, hungarian, false)->Arg(4)->Arg(16);
BENCHMARK_CAPTURE(bm_matching, auction, true)->Arg(4)->Arg(16);

void bm_episode(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.width = cfg.height = static_cast<int>(state.range(0));
  cfg.team_size = 4;
  cfg.dynamic_obstacles = 16;
  const auto variant = Variant::parse("Full+cold-adaptive");
  for (auto _ : state) benchmark::DoNotOptimize(run_episode(cfg, variant).metrics);
}
BENCHMARK(bm_episode)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
