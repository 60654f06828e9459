#pragma once

// Test-only reference implementations. Each one is written straight from the
// definition, shares no code with the library beyond plain data types, and
// favors obviousness over speed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "mrx/gate.hpp"
#include "mrx/grid.hpp"
#include "mrx/metrics.hpp"
#include "mrx/rng.hpp"

namespace oracle {

using mrx::Cell;
using mrx::CellState;
using mrx::GridMap;

inline const int kDr[4] = {-1, 1, 0, 0};
inline const int kDc[4] = {0, 0, -1, 1};

inline bool inside(const GridMap& m, int r, int c) {
  return r >= 0 && c >= 0 && r < m.height() && c < m.width();
}

// Free cells with an Unk four-neighbor, scanning every cell.
inline std::vector<Cell> frontiers(const GridMap& m) {
  std::vector<Cell> out;
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      if (m.at(Cell{r, c}) != CellState::Free) continue;
      bool any = false;
      for (int k = 0; k < 4; ++k) {
        const int rr = r + kDr[k], cc = c + kDc[k];
        if (inside(m, rr, cc) && m.at(Cell{rr, cc}) == CellState::Unk) any = true;
      }
      if (any) out.push_back({r, c});
    }
  }
  return out;
}

// Unit-weight Dijkstra through Free cells; -1 where unreachable.
inline std::vector<long> dijkstra(const GridMap& m, Cell source) {
  const int w = m.width();
  std::vector<long> dist(static_cast<std::size_t>(w * m.height()), -1);
  if (m.at(source) != CellState::Free) return dist;
  using Item = std::pair<long, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  std::vector<long> best(dist.size(), 1L << 40);
  const int s = source.row * w + source.col;
  best[static_cast<std::size_t>(s)] = 0;
  pq.push({0, s});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > best[static_cast<std::size_t>(u)]) continue;
    dist[static_cast<std::size_t>(u)] = d;
    const int r = u / w, c = u % w;
    for (int k = 0; k < 4; ++k) {
      const int rr = r + kDr[k], cc = c + kDc[k];
      if (!inside(m, rr, cc) || m.at(Cell{rr, cc}) != CellState::Free) continue;
      const int v = rr * w + cc;
      if (d + 1 < best[static_cast<std::size_t>(v)]) {
        best[static_cast<std::size_t>(v)] = d + 1;
        pq.push({d + 1, v});
      }
    }
  }
  return dist;
}

// Owner of each frontier: the robot with the smallest finite distance, lower
// id on ties; -1 when no robot reaches it.
inline std::vector<int> voronoi_owner(const std::vector<Cell>& fr,
                                      const std::vector<std::vector<long>>& dists, int width) {
  std::vector<int> owner;
  for (const Cell& f : fr) {
    int best = -1;
    for (int i = 0; i < static_cast<int>(dists.size()); ++i) {
      const long d = dists[static_cast<std::size_t>(i)][static_cast<std::size_t>(f.row * width + f.col)];
      if (d < 0) continue;
      bool beats_all = true;
      for (int j = 0; j < static_cast<int>(dists.size()); ++j) {
        const long dj = dists[static_cast<std::size_t>(j)][static_cast<std::size_t>(f.row * width + f.col)];
        if (dj < 0 || j == i) continue;
        if (dj < d || (dj == d && j < i)) beats_all = false;
      }
      if (beats_all) best = i;
    }
    owner.push_back(best);
  }
  return owner;
}

inline int utility(const GridMap& m, Cell f, int radius) {
  int n = 0;
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      if (std::max(std::abs(r - f.row), std::abs(c - f.col)) <= radius &&
          m.at(Cell{r, c}) == CellState::Unk) {
        ++n;
      }
    }
  }
  return n;
}

// Fraction of visited cells that two or more distinct robots stood on.
inline double overlap(const mrx::EpisodeRecord& rec) {
  std::map<std::pair<int, int>, std::set<std::size_t>> who;
  for (const auto& s : rec.steps()) {
    for (std::size_t i = 0; i < s.robots.size(); ++i) {
      who[{s.robots[i].pose.row, s.robots[i].pose.col}].insert(i);
    }
  }
  std::size_t shared = 0;
  for (const auto& [cell, ids] : who) shared += ids.size() >= 2 ? 1 : 0;
  return static_cast<double>(shared) / static_cast<double>(who.size());
}

// Exhaustive assignment search. Returns (permitted pairs, total cost) of the
// best assignment: most permitted pairs first, then least cost.
inline std::pair<int, long long> best_assignment(const std::vector<std::vector<std::optional<int>>>& cost) {
  const std::size_t rows = cost.size();
  const std::size_t cols = rows ? cost[0].size() : 0;
  std::pair<int, long long> best{0, 0};
  bool have = false;
  std::vector<bool> used(cols, false);
  std::function<void(std::size_t, int, long long)> go = [&](std::size_t r, int pairs, long long total) {
    if (r == rows) {
      if (!have || pairs > best.first || (pairs == best.first && total < best.second)) {
        best = {pairs, total};
        have = true;
      }
      return;
    }
    go(r + 1, pairs, total);  // row left unmatched
    for (std::size_t c = 0; c < cols; ++c) {
      if (used[c] || !cost[r][c]) continue;
      used[c] = true;
      go(r + 1, pairs + 1, total + *cost[r][c]);
      used[c] = false;
    }
  };
  go(0, 0, 0);
  return best;
}

// Pose and goal repulsion sums, term by term.
inline double repulsion(int self, const std::vector<std::optional<int>>& pose_d,
                        const std::vector<std::optional<int>>& goal_d, int radius, double beta,
                        double sx, double sg) {
  const int n = static_cast<int>(pose_d.size());
  if (n <= 1) return 0.0;
  double pose_sum = 0.0, goal_sum = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == self) continue;
    const auto& dp = pose_d[static_cast<std::size_t>(j)];
    const auto& dg = goal_d[static_cast<std::size_t>(j)];
    if (dp && *dp <= radius) pose_sum += std::exp(-static_cast<double>(*dp) / sx);
    if (dg && *dg <= radius) goal_sum += std::exp(-static_cast<double>(*dg) / sg);
  }
  return pose_sum / (n - 1) + beta * goal_sum / (n - 1);
}

// Coupled score with min-max normalization (constant columns map to 0).
inline std::vector<double> coupled_scores(const std::vector<double>& u, const std::vector<double>& d,
                                          const std::vector<double>& r, double p, double l0,
                                          double l1, double r0, double r1) {
  auto norm = [](const std::vector<double>& v) {
    const double lo = *std::min_element(v.begin(), v.end());
    const double hi = *std::max_element(v.begin(), v.end());
    std::vector<double> out(v.size(), 0.0);
    if (hi > lo) {
      for (std::size_t k = 0; k < v.size(); ++k) out[k] = (v[k] - lo) / (hi - lo);
    }
    return out;
  };
  const auto un = norm(u), dn = norm(d), rn = norm(r);
  const double lam = l0 + l1 * (1.0 - p);
  const double rho = r0 + r1 * (1.0 - p);
  std::vector<double> phi(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) phi[k] = un[k] - lam * dn[k] - rho * rn[k];
  return phi;
}

inline double surrogate(double cov, double dist, double risk, double stall, double wc, double wd,
                        double wr, double ws) {
  return wc * cov + wd * dist - wr * risk - ws * stall;
}

inline int label(double q) { return q >= 0.0 ? 1 : 0; }

inline double objective(double t_star, double omega, double alpha, double lam) {
  return alpha * t_star + lam * omega;
}

// Dual-threshold dwell switch as written, plus counters cleared on a flip.
struct Hysteresis {
  int s = 1;
  int ch = 0;
  int cl = 0;
  void step(double p, double th, double tl, int k) {
    ch = (p >= th) ? ch + 1 : 0;
    cl = (p <= tl) ? cl + 1 : 0;
    if (s == 0 && ch >= k) {
      s = 1;
      ch = cl = 0;
    } else if (s == 1 && cl >= k) {
      s = 0;
      ch = cl = 0;
    }
  }
};

// Plain cross-entropy of a logistic model plus l2/2 |w|^2.
inline double logistic_loss(const std::array<double, 8>& w, double b, const std::array<double, 8>& z,
                            double y, double l2) {
  long double x = b;
  for (int k = 0; k < 8; ++k) x += static_cast<long double>(w[static_cast<std::size_t>(k)]) * z[static_cast<std::size_t>(k)];
  const long double p = 1.0L / (1.0L + std::exp(-x));
  long double reg = 0;
  for (double v : w) reg += static_cast<long double>(v) * v;
  return static_cast<double>(-y * std::log(p) - (1 - y) * std::log(1 - p) + 0.5L * l2 * reg);
}

// Replay of the obstacle motion rule on independent copies of each stream.
struct ReplayObstacle {
  Cell cell;
  int heading;
  bool blocked = false;
  mrx::Rng rng;
};

// A move is due whenever t * nu crosses an integer.
inline bool due(int t, double nu) { return std::floor(t * nu) > std::floor((t - 1) * nu); }

inline void replay_step(std::vector<ReplayObstacle>& obs, const GridMap& truth,
                        const std::vector<Cell>& robots, int t, double nu, double keep) {
  if (!due(t, nu)) return;
  for (std::size_t k = 0; k < obs.size(); ++k) {
    auto& o = obs[k];
    const double u = o.rng.uniform();
    if (o.blocked || u >= keep) o.heading = static_cast<int>(o.rng.below(4));
    const Cell to{o.cell.row + kDr[o.heading], o.cell.col + kDc[o.heading]};
    bool ok = inside(truth, to.row, to.col) && truth.at(to) == CellState::Free;
    for (std::size_t j = 0; j < obs.size() && ok; ++j) ok = !(j != k && obs[j].cell == to);
    for (const Cell& r : robots) ok = ok && !(r == to);
    if (ok) {
      o.cell = to;
      o.blocked = false;
    } else {
      o.blocked = true;
    }
  }
}

// The feasibility rule checked one action at a time.
inline std::set<int> feasible(const GridMap& m, Cell pose, const std::vector<Cell>& others,
                              const std::vector<Cell>& obstacles) {
  std::set<int> out{4};
  for (int k = 0; k < 4; ++k) {
    const Cell to{pose.row + kDr[k], pose.col + kDc[k]};
    if (!inside(m, to.row, to.col) || m.at(to) != CellState::Free) continue;
    if (std::find(others.begin(), others.end(), to) != others.end()) continue;
    if (std::find(obstacles.begin(), obstacles.end(), to) != obstacles.end()) continue;
    out.insert(k);
  }
  return out;
}

}  // namespace oracle
