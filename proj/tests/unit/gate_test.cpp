#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "mrx/error.hpp"
#include "mrx/gate.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mrx;

TEST_CASE("predict") {
  GateParams g;
  const FeatureVector z{0.3, 1, 0.2, 0.8, 0.1, 0.5, 0.25, 1};
  CHECK(predict(g, z) == 0.5);
  g.bias = 20;
  CHECK(predict(g, z) > 0.999999);
  GateParams e;
  e.weights[0] = 1;
  FeatureVector unit{};
  unit[0] = 1;
  CHECK(predict(e, unit) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-15));
  CHECK(sigmoid(-800) >= 0.0);
  CHECK(sigmoid(800) <= 1.0);
}

TEST_CASE("hysteresis examples") {
  HysteresisConfig cfg{0.8, 0.3, 2};
  GateState s{0, 0, 0};
  s = update_hysteresis(s, 0.9, cfg);
  CHECK(s.switch_state == 0);
  s = update_hysteresis(s, 0.9, cfg);
  CHECK(s.switch_state == 1);
  CHECK(s.count_high == 0);
  CHECK(s.count_low == 0);

  GateState a{0, 0, 0};
  for (int k = 0; k < 40; ++k) {
    a = update_hysteresis(a, k % 2 == 0 ? 0.9 : 0.5, cfg);
    CHECK(a.switch_state == 0);
    CHECK(a.count_high < 2);
  }
}

TEST_CASE("hysteresis matches the transcription") {
  Rng rng(61);
  for (int k = 0; k < 500; ++k) {
    HysteresisConfig cfg;
    cfg.dwell = 1 + static_cast<int>(rng.below(4));
    GateState s;
    oracle::Hysteresis o;
    int last_flip = -1000;
    for (int t = 0; t < 60; ++t) {
      const double p = rng.uniform();
      const int before = s.switch_state;
      s = update_hysteresis(s, p, cfg);
      o.step(p, cfg.tau_high, cfg.tau_low, cfg.dwell);
      REQUIRE(s.switch_state == o.s);
      CHECK(s.count_high == o.ch);
      CHECK(s.count_low == o.cl);
      CHECK((s.count_high == 0 || s.count_low == 0));
      if (s.switch_state != before) {
        CHECK(t - last_flip >= cfg.dwell);
        last_flip = t;
      }
    }
  }
}

TEST_CASE("surrogate score and labels") {
  SurrogateWeights ones{1, 1, 1, 1};
  CHECK(surrogate_score(WindowTerms{2, 1, 0, 0}, ones) == 3.0);

  HistoryBuffer h(4);
  for (int k = 0; k < 4; ++k) h.push(StepRecord{});
  CHECK(surrogate_score(h, ones) == -1.0);

  CHECK(pseudo_label(0.0) == 1);
  CHECK(pseudo_label(-0.001) == 0);
  CHECK(pseudo_label(3.0) == 1);

  // Scripted window: two goals, the second one closing in from 7 to 4.
  HistoryBuffer w(5);
  const Cell g1{1, 1}, g2{5, 5};
  w.push({Cell{0, 0}, true, 3, g1, 2, 0, 0});
  w.push({Cell{0, 1}, true, 0, g2, 7, 1, 0});
  w.push({Cell{0, 2}, true, 2, g2, 6, 0, 1});
  w.push({Cell{0, 2}, false, 0, g2, 6, 0, 0});
  w.push({Cell{1, 2}, true, 1, g2, 4, 0, 0});
  const auto terms = window_terms(w);
  CHECK(terms.coverage == 6.0);
  CHECK(terms.progress == 3.0);
  CHECK(terms.risk == 2.0);
  CHECK(terms.stall == 0.0);
  const SurrogateWeights sw;
  CHECK(surrogate_score(w, sw) == oracle::surrogate(6, 3, 2, 0, 1.0, 0.5, 2.0, 1.0));
}

TEST_CASE("history buffer evicts oldest") {
  HistoryBuffer h(3);
  for (int k = 0; k < 5; ++k) {
    StepRecord r;
    r.newly_seen = k;
    h.push(r);
  }
  CHECK(h.full());
  CHECK(h.size() == 3);
  CHECK(h[0].newly_seen == 2);
  CHECK(h.back().newly_seen == 4);
}

TEST_CASE("online update") {
  LearningParams lp{0.1, 0.0, 0.5};
  GateParams g;
  g.weights = {0.1, -0.2, 0.3, 0, 0, 0, 0, 0.4};
  g.bias = -0.1;
  const FeatureVector z{1, 0, 0.5, 0.2, 0, 1, 0.25, 1};
  GateParams same = g;
  CHECK(online_update(same, z, 0.5, 1, 0.49, lp) == UpdateStatus::BelowMargin);
  CHECK(same == g);

  GateParams moved = g;
  CHECK(online_update(moved, z, 0.5, 1, 2.0, lp) == UpdateStatus::Applied);
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    CHECK(moved.weights[k] == doctest::Approx(g.weights[k] + 0.05 * z[k]).epsilon(1e-15));
  }
  CHECK(moved.bias == doctest::Approx(g.bias + 0.05).epsilon(1e-15));

  GateParams bad = g;
  FeatureVector huge{};
  huge[0] = 1e308;
  LearningParams big{1e10, 0.0, 0.5};
  CHECK(online_update(bad, huge, 0.0, 1, 5.0, big) == UpdateStatus::RejectedNonFinite);
  CHECK(bad == g);
}

TEST_CASE("loss gradient against finite differences") {
  Rng rng(67);
  for (int k = 0; k < 20; ++k) {
    GateParams g;
    FeatureVector z{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      g.weights[i] = 2 * rng.uniform() - 1;
      z[i] = rng.uniform();
    }
    g.bias = 2 * rng.uniform() - 1;
    const double y = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const double l2 = 1e-3;
    CHECK(gate_loss(g, z, y, l2) == doctest::Approx(oracle::logistic_loss(g.weights, g.bias, z, y, l2)).epsilon(1e-12));
    const auto grad = gate_loss_gradient(g, z, y, l2);
    const double h = 1e-6;
    double num2 = 0, diff2 = 0, ana2 = 0;
    for (std::size_t i = 0; i <= kFeatureCount; ++i) {
      auto up = g.weights, dn = g.weights;
      double bu = g.bias, bd = g.bias;
      if (i < kFeatureCount) {
        up[i] += h;
        dn[i] -= h;
      } else {
        bu += h;
        bd -= h;
      }
      const double num = (oracle::logistic_loss(up, bu, z, y, l2) - oracle::logistic_loss(dn, bd, z, y, l2)) / (2 * h);
      const double ana = i < kFeatureCount ? grad.weights[i] : grad.bias;
      num2 += num * num;
      ana2 += ana * ana;
      diff2 += (num - ana) * (num - ana);
    }
    CHECK(std::sqrt(diff2) / std::max(std::sqrt(num2), std::sqrt(ana2)) < 1e-6);
  }
}

TEST_CASE("parameter files") {
  GateParams g;
  g.weights = {0.1, -2.5, 1e-9, 3, 0, 0, 7, -1.0 / 3.0};
  g.bias = 0.125;
  CHECK(parse_gate_params(format_gate_params(g)) == g);
  const auto path = std::filesystem::temp_directory_path() / "mrx_gate_params.txt";
  save_gate_params(g, path);
  CHECK(load_gate_params(path) == g);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(parse_gate_params("gate-params v2\n1\n2\n3\n4\n5\n6\n7\n8\n9\n"), ConfigError);
  CHECK_THROWS_AS(parse_gate_params("gate-params v1\n1\n2\n"), ConfigError);
  CHECK_THROWS_AS(parse_gate_params("gate-params v1\n1\n2\n3\n4\n5\n6\n7\nnan\n9\n"), ConfigError);
  CHECK_THROWS_AS(load_gate_params("/nonexistent/gate.params"), ConfigError);
}

TEST_CASE("features") {
  // Lone robot in the open with a reachable goal and a working planner.
  GridMap m(10, 10, CellState::Free);
  const Cell pose{5, 5};
  const auto field = bfs_distance_field(m, pose);
  HistoryBuffer h(8);
  FeatureContext ctx;
  ctx.map = &m;
  ctx.pose = pose;
  ctx.goal = Cell{5, 9};
  ctx.own_field = &field;
  ctx.feasible = feasible_actions(m, pose, {}, {});
  ctx.history = &h;
  ctx.planner_ok = true;
  ctx.team_size = 1;
  auto z = extract_features(ctx);
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);
  CHECK(z[2] == doctest::Approx(4.0 / 20.0));
  CHECK(z[3] == 1.0);
  CHECK(z[6] == 0.0);
  CHECK(z[7] == 1.0);

  // Fully walled in.
  const GridMap box = parse_ascii_map("###\n#.#\n###\n");
  const auto bf = bfs_distance_field(box, Cell{1, 1});
  FeatureContext b = ctx;
  b.map = &box;
  b.pose = {1, 1};
  b.goal.reset();
  b.own_field = &bf;
  b.feasible = feasible_actions(box, Cell{1, 1}, {}, {});
  b.planner_ok = false;
  z = extract_features(b);
  CHECK(z[3] == doctest::Approx(0.2));
  CHECK(z[6] == 1.0);
  CHECK(z[2] == 1.0);
  CHECK(z[5] == 1.0);
  CHECK(z[7] == 0.0);
}

TEST_CASE("features over a scripted run") {
  // Robot walks right along a 1x12 strip; unknown right half; teammate fixed
  // at column 0. Each entry is evaluated from the definitions by hand.
  GridMap m = parse_ascii_map("......??????\n");
  const std::vector<Cell> mate{{0, 0}};
  HistoryBuffer h(3);
  for (int t = 0; t < 5; ++t) {
    const Cell pose{0, 1 + t};
    const auto field = bfs_distance_field(m, pose);
    FeatureContext ctx;
    ctx.map = &m;
    ctx.pose = pose;
    ctx.goal = Cell{0, 5};
    ctx.teammates = mate;
    ctx.own_field = &field;
    ctx.feasible = feasible_actions(m, pose, mate, {});
    ctx.history = &h;
    ctx.planner_ok = pose.col != 5;
    ctx.sensing_radius = 1;
    ctx.interaction_radius = 2;
    ctx.team_size = 2;
    const auto z = extract_features(ctx);
    const int c = pose.col;
    CHECK(z[0] == (c <= 2 ? 1.0 : 0.0));
    CHECK(z[1] == 0.0);
    CHECK(z[2] == doctest::Approx((5 - c) / 13.0));
    const int moves = (c - 1 >= 0 && c - 1 != 0 ? 1 : 0) + (c + 1 <= 5 ? 1 : 0);
    CHECK(z[3] == doctest::Approx((1 + moves) / 5.0));
    const int unk_robot = (c + 1 >= 6 ? 1 : 0);
    CHECK(z[4] == doctest::Approx(unk_robot / 3.0));
    CHECK(z[5] == doctest::Approx(1.0 / 3.0));
    const int free_nb = (c - 1 >= 0 ? 1 : 0) + (c + 1 <= 5 ? 1 : 0);
    CHECK(z[6] == doctest::Approx(1.0 - free_nb / 4.0));
    CHECK(z[7] == (c != 5 ? 1.0 : 0.0));
    StepRecord r;
    r.pose = pose;
    r.moved = t > 0;
    h.push(r);
  }
  // A full window without movement sets the stuck flag.
  HistoryBuffer still(3);
  for (int k = 0; k < 3; ++k) still.push(StepRecord{});
  const auto field = bfs_distance_field(m, Cell{0, 3});
  FeatureContext ctx;
  ctx.map = &m;
  ctx.pose = {0, 3};
  ctx.own_field = &field;
  ctx.feasible = feasible_actions(m, Cell{0, 3}, {}, {});
  ctx.history = &still;
  CHECK(extract_features(ctx)[1] == 1.0);
}

TEST_CASE("features stay in the unit range") {
  Rng rng(71);
  for (int k = 0; k < 200; ++k) {
    const GridMap m = testing_support::random_map(rng, 12, 12, 0.2, 0.3);
    const auto cells = testing_support::pick_free(rng, m, 4);
    if (cells.size() < 4) continue;
    const auto field = bfs_distance_field(m, cells[0]);
    const std::vector<Cell> mates(cells.begin() + 1, cells.begin() + 3);
    HistoryBuffer h(2);
    h.push(StepRecord{});
    h.push(StepRecord{});
    FeatureContext ctx;
    ctx.map = &m;
    ctx.pose = cells[0];
    ctx.goal = cells[3];
    ctx.teammates = mates;
    ctx.own_field = &field;
    ctx.feasible = feasible_actions(m, cells[0], mates, {});
    ctx.history = &h;
    ctx.team_size = 3;
    for (double v : extract_features(ctx)) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}
