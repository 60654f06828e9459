#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mrx/grid.hpp"

namespace mrx {

// Dense rows x cols matrix of integer costs; a missing entry is a prohibited
// pairing.
class CostMatrix {
 public:
  CostMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), cost_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::optional<int>& at(std::size_t r, std::size_t c) { return cost_[r * cols_ + c]; }
  const std::optional<int>& at(std::size_t r, std::size_t c) const { return cost_[r * cols_ + c]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::optional<int>> cost_;
};

// Robots x frontiers BFS distance costs.
CostMatrix distance_costs(std::span<const Cell> frontiers, std::span<const DistanceField> fields);

// Column assigned to each row (or none). Maximizes the number of permitted
// pairs, then minimizes their total cost; each column is used at most once.
std::vector<std::optional<std::size_t>> hungarian_assignment(const CostMatrix& costs);

// Forward auction with epsilon scaling down to final_epsilon. Same pairing
// rules as hungarian_assignment; the total cost is within
// max(rows, cols) * final_epsilon of the optimum, so integer costs with
// final_epsilon < 1 / max(rows, cols) give an exact optimum.
std::vector<std::optional<std::size_t>> auction_assignment(const CostMatrix& costs,
                                                           double final_epsilon = 1.0);

// Sum of the costs of the chosen pairs.
long long assignment_cost(const CostMatrix& costs,
                          std::span<const std::optional<std::size_t>> assignment);

// Baseline allocators. Greedy gives each robot its nearest reachable frontier
// (duplicates allowed). Matching allocators give each robot a distinct
// frontier when possible; robots left over fall back to their nearest
// reachable frontier. No reachable frontier means no goal.
std::vector<std::optional<Cell>> allocate_greedy(std::span<const Cell> frontiers,
                                                 std::span<const DistanceField> fields);
std::vector<std::optional<Cell>> allocate_hungarian(std::span<const Cell> frontiers,
                                                    std::span<const DistanceField> fields);
std::vector<std::optional<Cell>> allocate_auction(std::span<const Cell> frontiers,
                                                  std::span<const DistanceField> fields,
                                                  double final_epsilon = 1.0);

}  // namespace mrx
