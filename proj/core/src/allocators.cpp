#include "mrx/allocators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrx/assignment.hpp"

namespace mrx {

namespace {

// Prohibited pairs get a cost large enough that any assignment with more
// permitted pairs is cheaper than one with fewer.
long long prohibited_cost(const CostMatrix& costs) {
  long long worst = 0;
  for (std::size_t r = 0; r < costs.rows(); ++r) {
    for (std::size_t c = 0; c < costs.cols(); ++c) {
      if (costs.at(r, c)) worst = std::max<long long>(worst, *costs.at(r, c));
    }
  }
  return (worst + 1) * static_cast<long long>(std::min(costs.rows(), costs.cols()) + 1);
}

// Shortest augmenting path with potentials; n <= m, a is 1-based n x m.
std::vector<std::size_t> hungarian_rows(const std::vector<std::vector<long long>>& a, std::size_t n,
                                        std::size_t m) {
  constexpr long long kInf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(n + 1, 0), v(m + 1, 0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<long long> minv(m + 1, kInf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      long long delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const long long cur = a[i0][j] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n + 1, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j]] = j;
  }
  return row_to_col;
}

// Square forward auction: n bidders, n objects. Every bidder ends up with an
// object; the total is within n * final_epsilon of the optimum.
std::vector<std::size_t> auction_square(const std::vector<std::vector<double>>& benefit,
                                        std::size_t n, double final_epsilon) {
  std::vector<double> price(n, 0.0);
  std::vector<std::optional<std::size_t>> owner(n);
  std::vector<std::size_t> assigned(n, 0);

  double spread = 0.0;
  for (const auto& row : benefit) {
    for (double b : row) spread = std::max(spread, std::fabs(b));
  }
  double eps = std::max(final_epsilon, spread / 4.0);
  while (true) {
    // Each phase restarts the bidding but keeps the prices.
    std::fill(owner.begin(), owner.end(), std::nullopt);
    std::vector<std::size_t> queue;
    for (std::size_t i = n; i-- > 0;) queue.push_back(i);
    while (!queue.empty()) {
      const std::size_t i = queue.back();
      queue.pop_back();
      std::size_t best = 0;
      double v1 = -std::numeric_limits<double>::infinity();
      double v2 = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        const double val = benefit[i][j] - price[j];
        if (val > v1) {
          v2 = v1;
          v1 = val;
          best = j;
        } else if (val > v2) {
          v2 = val;
        }
      }
      price[best] += n > 1 ? v1 - v2 + eps : eps;
      if (owner[best]) queue.push_back(*owner[best]);
      owner[best] = i;
      assigned[i] = best;
    }
    if (eps <= final_epsilon) break;
    eps = std::max(final_epsilon, eps / 4.0);
  }
  return assigned;
}

std::vector<std::optional<Cell>> with_fallback(std::span<const Cell> frontiers,
                                               std::span<const DistanceField> fields,
                                               const std::vector<std::optional<std::size_t>>& match) {
  std::vector<std::optional<Cell>> goals(fields.size());
  for (std::size_t r = 0; r < fields.size(); ++r) {
    goals[r] = match[r] ? std::optional<Cell>(frontiers[*match[r]])
                        : nearest_frontier(fields[r], frontiers);
  }
  return goals;
}

}  // namespace

CostMatrix distance_costs(std::span<const Cell> frontiers, std::span<const DistanceField> fields) {
  CostMatrix costs(fields.size(), frontiers.size());
  for (std::size_t r = 0; r < fields.size(); ++r) {
    for (std::size_t c = 0; c < frontiers.size(); ++c) costs.at(r, c) = fields[r].at(frontiers[c]);
  }
  return costs;
}

std::vector<std::optional<std::size_t>> hungarian_assignment(const CostMatrix& costs) {
  const std::size_t rows = costs.rows();
  const std::size_t cols = costs.cols();
  std::vector<std::optional<std::size_t>> result(rows);
  if (rows == 0 || cols == 0) return result;
  const long long big = prohibited_cost(costs);
  const bool transpose = rows > cols;
  const std::size_t n = transpose ? cols : rows;
  const std::size_t m = transpose ? rows : cols;
  std::vector<std::vector<long long>> a(n + 1, std::vector<long long>(m + 1, 0));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& entry = costs.at(r, c);
      const long long value = entry ? *entry : big;
      if (transpose) {
        a[c + 1][r + 1] = value;
      } else {
        a[r + 1][c + 1] = value;
      }
    }
  }
  const auto match = hungarian_rows(a, n, m);
  for (std::size_t i = 1; i <= n; ++i) {
    if (match[i] == 0) continue;
    const std::size_t r = transpose ? match[i] - 1 : i - 1;
    const std::size_t c = transpose ? i - 1 : match[i] - 1;
    if (costs.at(r, c)) result[r] = c;
  }
  return result;
}

std::vector<std::optional<std::size_t>> auction_assignment(const CostMatrix& costs,
                                                           double final_epsilon) {
  const std::size_t rows = costs.rows();
  const std::size_t cols = costs.cols();
  std::vector<std::optional<std::size_t>> result(rows);
  if (rows == 0 || cols == 0) return result;
  // Rectangular problems are padded with zero-benefit dummies so that stale
  // prices on unmatched objects cannot hold the auction away from the
  // optimum. The prohibited cost also has to outweigh the n * epsilon slack.
  const std::size_t n = std::max(rows, cols);
  const double big = static_cast<double>(prohibited_cost(costs)) +
                     std::ceil(static_cast<double>(n) * final_epsilon) + 1.0;
  std::vector<std::vector<double>> benefit(n, std::vector<double>(n, 0.0));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& entry = costs.at(r, c);
      benefit[r][c] = entry ? -static_cast<double>(*entry) : -big;
    }
  }
  const auto match = auction_square(benefit, n, final_epsilon);
  for (std::size_t r = 0; r < rows; ++r) {
    if (match[r] < cols && costs.at(r, match[r])) result[r] = match[r];
  }
  return result;
}

long long assignment_cost(const CostMatrix& costs,
                          std::span<const std::optional<std::size_t>> assignment) {
  long long total = 0;
  for (std::size_t r = 0; r < assignment.size(); ++r) {
    if (assignment[r] && costs.at(r, *assignment[r])) total += *costs.at(r, *assignment[r]);
  }
  return total;
}

std::vector<std::optional<Cell>> allocate_greedy(std::span<const Cell> frontiers,
                                                 std::span<const DistanceField> fields) {
  std::vector<std::optional<Cell>> goals(fields.size());
  for (std::size_t r = 0; r < fields.size(); ++r) goals[r] = nearest_frontier(fields[r], frontiers);
  return goals;
}

std::vector<std::optional<Cell>> allocate_hungarian(std::span<const Cell> frontiers,
                                                    std::span<const DistanceField> fields) {
  return with_fallback(frontiers, fields, hungarian_assignment(distance_costs(frontiers, fields)));
}

std::vector<std::optional<Cell>> allocate_auction(std::span<const Cell> frontiers,
                                                  std::span<const DistanceField> fields,
                                                  double final_epsilon) {
  return with_fallback(frontiers, fields,
                       auction_assignment(distance_costs(frontiers, fields), final_epsilon));
}

}  // namespace mrx
