#include <algorithm>
#include <filesystem>

#include "doctest.h"
#include "mrx/error.hpp"
#include "mrx/grid.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mrx;
using testing_support::random_map;

TEST_CASE("ascii maps round-trip") {
  const std::string text = "..#?\n#?..\n????\n";
  const GridMap m = parse_ascii_map(text);
  CHECK(m.width() == 4);
  CHECK(m.height() == 3);
  CHECK(m.at(Cell{0, 2}) == CellState::Occ);
  CHECK(m.at(Cell{1, 1}) == CellState::Unk);
  CHECK(to_ascii(m) == text);

  Rng rng(7);
  for (int k = 0; k < 20; ++k) {
    const GridMap r = random_map(rng, 3 + k, 5 + k % 4, 0.3, 0.3);
    CHECK(parse_ascii_map(to_ascii(r)) == r);
  }

  const auto path = std::filesystem::temp_directory_path() / "mrx_ascii_roundtrip.txt";
  save_ascii_map(m, path);
  CHECK(load_ascii_map(path) == m);
  std::filesystem::remove(path);
}

TEST_CASE("ascii parser rejects bad input") {
  CHECK_THROWS_AS(parse_ascii_map("..\n...\n"), ConfigError);
  CHECK_THROWS_AS(parse_ascii_map("..x\n"), ConfigError);
}

TEST_CASE("sensing reveals the Chebyshev block") {
  GridMap shared(5, 5, CellState::Unk);
  const GridMap truth(5, 5, CellState::Free);
  const int seen = sense_and_fuse(shared, truth, {}, Cell{2, 2}, 1);
  CHECK(seen == 9);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) {
      const bool inside = std::abs(r - 2) <= 1 && std::abs(c - 2) <= 1;
      CHECK(shared.at(Cell{r, c}) == (inside ? CellState::Free : CellState::Unk));
    }
  }
  const GridMap before = shared;
  CHECK(sense_and_fuse(shared, truth, {}, Cell{2, 2}, 1) == 0);
  CHECK(shared == before);
}

TEST_CASE("sensing matches a per-cell scan") {
  Rng rng(11);
  for (int k = 0; k < 50; ++k) {
    const GridMap truth = random_map(rng, 10, 10, 0.3, 0.0);
    GridMap shared = random_map(rng, 10, 10, 0.1, 0.6);
    const GridMap before = shared;
    const Cell pose{static_cast<int>(rng.below(10)), static_cast<int>(rng.below(10))};
    const std::vector<Cell> obstacles{{static_cast<int>(rng.below(10)), static_cast<int>(rng.below(10))}};
    sense_and_fuse(shared, truth, obstacles, pose, 3);
    for (int r = 0; r < 10; ++r) {
      for (int c = 0; c < 10; ++c) {
        const Cell x{r, c};
        if (chebyshev(x, pose) <= 3) {
          const bool obs = x == obstacles[0];
          CHECK(shared.at(x) == (obs ? CellState::Occ : truth.at(x)));
        } else {
          CHECK(shared.at(x) == before.at(x));
        }
      }
    }
  }
}

TEST_CASE("sensing rejects mismatched maps") {
  GridMap shared(4, 4);
  const GridMap truth(5, 4, CellState::Free);
  CHECK_THROWS_AS(sense_and_fuse(shared, truth, {}, Cell{0, 0}, 1), ConfigError);
}

TEST_CASE("frontiers by definition") {
  GridMap m(3, 3, CellState::Free);
  m.set({1, 1}, CellState::Unk);
  const std::vector<Cell> expect{{0, 1}, {1, 0}, {1, 2}, {2, 1}};
  CHECK(extract_frontiers(m) == expect);
  CHECK(extract_frontiers(GridMap(6, 4, CellState::Free)).empty());

  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    const GridMap r = random_map(rng, 20, 20, 0.2, 0.4);
    CHECK(extract_frontiers(r) == oracle::frontiers(r));
  }
}

TEST_CASE("bfs distances") {
  const GridMap corridor = parse_ascii_map(".....\n");
  const auto f = bfs_distance_field(corridor, Cell{0, 0});
  for (int c = 0; c < 5; ++c) CHECK(f.at(Cell{0, c}) == c);

  const GridMap walled = parse_ascii_map("..#..\n..#..\n");
  const auto g = bfs_distance_field(walled, Cell{0, 0});
  CHECK_FALSE(g.reachable(Cell{0, 3}));
  CHECK_FALSE(g.reachable(Cell{1, 4}));
  CHECK(g.at(Cell{1, 1}) == 2);

  CHECK_THROWS_AS(bfs_distance_field(walled, Cell{0, 2}), InvalidSource);
  CHECK_FALSE(bfs_distance_field_or_empty(walled, Cell{0, 2}).reachable(Cell{0, 0}));

  Rng rng(5);
  for (int k = 0; k < 50; ++k) {
    const GridMap r = random_map(rng, 15, 15, 0.25, 0.1);
    const auto cells = testing_support::pick_free(rng, r, 1);
    if (cells.empty()) continue;
    CHECK(testing_support::as_longs(bfs_distance_field(r, cells[0])) == oracle::dijkstra(r, cells[0]));
  }
}

TEST_CASE("bfs triangle inequality") {
  Rng rng(17);
  for (int k = 0; k < 30; ++k) {
    const GridMap r = random_map(rng, 12, 12, 0.2, 0.0);
    const auto p = testing_support::pick_free(rng, r, 3);
    if (p.size() < 3) continue;
    const auto fa = bfs_distance_field(r, p[0]);
    const auto fb = bfs_distance_field(r, p[1]);
    const auto ab = fa.at(p[1]), bc = fb.at(p[2]), ac = fa.at(p[2]);
    if (ab && bc) {
      REQUIRE(ac.has_value());
      CHECK(*ac <= *ab + *bc);
    }
  }
}

TEST_CASE("feasible actions") {
  const GridMap open(5, 5, CellState::Free);
  CHECK(feasible_actions(open, Cell{2, 2}, {}, {}) == ActionSet::all());

  const GridMap dead_end = parse_ascii_map("###\n#.#\n#.#\n");
  const auto s = feasible_actions(dead_end, Cell{1, 1}, {}, {});
  CHECK(s.size() == 2);
  CHECK(s.contains(Action::Down));
  CHECK(s.contains(Action::Stay));

  Rng rng(23);
  for (int k = 0; k < 200; ++k) {
    const GridMap m = random_map(rng, 6, 6, 0.2, 0.2);
    const auto cells = testing_support::pick_free(rng, m, 6);
    if (cells.size() < 6) continue;
    const Cell pose = cells[0];
    const std::vector<Cell> others(cells.begin() + 1, cells.begin() + 3);
    const std::vector<Cell> obstacles(cells.begin() + 3, cells.end());
    const auto got = feasible_actions(m, pose, others, obstacles);
    std::set<int> as_ints;
    for (Action a : got.to_vector()) as_ints.insert(static_cast<int>(a));
    CHECK(as_ints == oracle::feasible(m, pose, others, obstacles));
  }
}

TEST_CASE("obstacles stay put on odd steps and when boxed in") {
  const GridMap open(10, 10, CellState::Free);
  const std::vector<Cell> start{{1, 1}, {5, 5}, {8, 2}};
  auto set = make_obstacles(start, 99, 0.5);
  step_dynamic_obstacles(set, open, {}, 1);
  CHECK(set.positions() == start);
  step_dynamic_obstacles(set, open, {}, 3);
  CHECK(set.positions() == start);

  const GridMap box = parse_ascii_map("###\n#.#\n###\n");
  const std::vector<Cell> one{{1, 1}};
  auto boxed = make_obstacles(one, 5, 0.5);
  for (int t = 0; t < 20; ++t) {
    step_dynamic_obstacles(boxed, box, {}, t);
    CHECK(boxed.items[0].cell == Cell{1, 1});
  }
}

TEST_CASE("obstacle motion equals the replayed rule") {
  Rng rng(31);
  GridMap truth = random_map(rng, 10, 10, 0.1, 0.0);
  const auto cells = testing_support::pick_free(rng, truth, 8);
  const std::vector<Cell> robots(cells.begin(), cells.begin() + 2);
  const std::vector<Cell> obs_cells(cells.begin() + 2, cells.end());
  auto set = make_obstacles(obs_cells, 1234, 0.5);
  std::vector<oracle::ReplayObstacle> replay;
  for (const auto& o : set.items) replay.push_back({o.cell, o.heading, o.blocked, o.rng});
  const std::size_t static_occ = truth.count(CellState::Occ);
  for (int t = 0; t < 100; ++t) {
    step_dynamic_obstacles(set, truth, robots, t);
    oracle::replay_step(replay, truth, robots, t, 0.5, 0.8);
    REQUIRE(set.size() == replay.size());
    for (std::size_t k = 0; k < replay.size(); ++k) {
      CHECK(set.items[k].cell == replay[k].cell);
      CHECK(truth.at(set.items[k].cell) == CellState::Free);
    }
  }
  CHECK(truth.count(CellState::Occ) == static_occ);
}

TEST_CASE("obstacle marks expire") {
  const GridMap truth(6, 6, CellState::Free);
  GridMap shared(6, 6, CellState::Unk);
  ObstacleMarks marks(shared.size(), 3);
  const std::vector<Cell> obs{{0, 1}};
  sense_and_fuse(shared, truth, obs, Cell{0, 0}, 1);
  marks.observe(shared, obs, Cell{0, 0}, 1, 0);
  CHECK(shared.at(Cell{0, 1}) == CellState::Occ);
  CHECK(marks.active() == 1);
  CHECK(marks.expire(shared, 2) == 0);
  CHECK(marks.expire(shared, 3) == 1);
  CHECK(shared.at(Cell{0, 1}) == CellState::Free);
  CHECK(marks.active() == 0);

  // Without a lifetime the mark stays until sensing clears it.
  GridMap keep(6, 6, CellState::Unk);
  ObstacleMarks forever(keep.size(), 0);
  sense_and_fuse(keep, truth, obs, Cell{0, 0}, 1);
  forever.observe(keep, obs, Cell{0, 0}, 1, 0);
  CHECK(forever.expire(keep, 1000) == 0);
  CHECK(keep.at(Cell{0, 1}) == CellState::Occ);
}

TEST_CASE("actions parse and print") {
  for (Action a : kAllActions) CHECK(parse_action(to_string(a)) == a);
  CHECK_FALSE(parse_action("Jump").has_value());
  CHECK(apply(Cell{2, 2}, Action::Up) == Cell{1, 2});
  CHECK(apply(Cell{2, 2}, Action::Right) == Cell{2, 3});
}
