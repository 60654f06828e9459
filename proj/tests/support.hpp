#pragma once

#include <vector>

#include "mrx/grid.hpp"
#include "mrx/rng.hpp"

namespace testing_support {

// Random map with independent per-cell states.
inline mrx::GridMap random_map(mrx::Rng& rng, int w, int h, double p_occ, double p_unk) {
  mrx::GridMap m(w, h, mrx::CellState::Free);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double u = rng.uniform();
      if (u < p_occ) {
        m.set({r, c}, mrx::CellState::Occ);
      } else if (u < p_occ + p_unk) {
        m.set({r, c}, mrx::CellState::Unk);
      }
    }
  }
  return m;
}

inline std::vector<mrx::Cell> free_cells(const mrx::GridMap& m) {
  std::vector<mrx::Cell> out;
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      if (m.at(mrx::Cell{r, c}) == mrx::CellState::Free) out.push_back({r, c});
    }
  }
  return out;
}

// Distinct free cells drawn without replacement.
inline std::vector<mrx::Cell> pick_free(mrx::Rng& rng, const mrx::GridMap& m, std::size_t k) {
  auto pool = free_cells(m);
  std::vector<mrx::Cell> out;
  for (std::size_t i = 0; i < k && i < pool.size(); ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

inline std::vector<long> as_longs(const mrx::DistanceField& f) {
  std::vector<long> out;
  for (int v : f.raw()) out.push_back(v);
  return out;
}

}  // namespace testing_support
