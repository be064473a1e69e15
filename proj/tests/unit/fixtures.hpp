#pragma once

#include <string>
#include <vector>

#include "ratchet/config.hpp"
#include "ratchet/pipeline.hpp"

namespace ratchet::testing {

inline std::string source_path(const std::string& rel) { return std::string(RATCHET_SOURCE_DIR) + "/" + rel; }

/// Bundled defaults on a coarse grid: 281 z nodes, 50 tau steps, 16 habit slices.
inline RunConfig coarse_config(std::vector<std::string> extra = {}) {
  std::vector<std::string> ov{"grid.nz=281", "grid.n_tau=50", "grid.habit.count=16", "sim.n_paths=2000"};
  ov.insert(ov.end(), extra.begin(), extra.end());
  return load_config(source_path("configs/default.json"), ov);
}

/// Coarse solution shared by the tests of one binary.
inline const Solution& coarse_solution() {
  static const Solution sol = solve(coarse_config(), 1);
  return sol;
}

}  // namespace ratchet::testing
