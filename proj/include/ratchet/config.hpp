#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "ratchet/dual.hpp"
#include "ratchet/grid.hpp"
#include "ratchet/market.hpp"
#include "ratchet/obstacle.hpp"
#include "ratchet/simulator.hpp"
#include "ratchet/utility.hpp"

namespace ratchet {

struct GridSpec {
  double z_min = -8.0;
  double z_max = 6.0;
  int nz = 561;
  int n_tau = 200;
  double margin = 3.0;
  double collar = 1.5;
};

struct HabitSpec {
  double min = 0.05;
  double max = 8.0;
  int count = 40;
  HabitSpacing spacing = HabitSpacing::geometric;
  double cap_multiplier = 1.0;  ///< h_bar = cap_multiplier * max
};

struct SimSpec {
  bool enabled = true;
  bool compare = true;  ///< also run the clamped Merton policy (CRRA only)
  SimConfig run;
};

struct OutputSpec {
  std::string directory = "out";
  int tau_stride = 10;  ///< tau stride of the dense surface exports
  int z_stride = 2;
  std::vector<double> probe_x{0.5, 1.0, 2.0, 3.0, 5.0};
  std::vector<double> probe_t{0.0, 0.25, 0.5, 0.75};
  std::vector<double> probe_h{0.5, 1.0, 2.0};
};

/// Everything a run reads. Loaded from a JSON tree whose sections mirror these fields.
struct RunConfig {
  MarketParams market;
  UtilityKernel kernel;
  GridSpec grid;
  HabitSpec habit;
  Scheme scheme = Scheme::penalty;  ///< scheme of the surface; boundaries always use the complementarity scheme
  PenaltyParams penalty;
  ComplementarityParams complementarity;
  HabitQuadrature quadrature = HabitQuadrature::corrected;
  double continuation_level = default_continuation_level;
  SimSpec sim;
  OutputSpec outputs;

  Grid1D make_grid() const;
  /// Habit slices; above habit.max extended geometrically up to h_bar, whose slice carries the cap.
  std::vector<double> habit_grid() const;
  double h_bar() const { return habit.cap_multiplier * habit.max; }
};

/// Applies `key.path=value` to a JSON tree. The value is read as JSON when it parses, else as a string.
/// Throws ConfigError on a malformed override.
void apply_override(nlohmann::json& tree, const std::string& assignment);

/// Validates and converts a tree. Throws ConfigError naming the first offending field; unknown keys
/// are errors. The `market` section and all its fields are required, every other field has a default.
RunConfig parse_config(const nlohmann::json& tree);

/// Reads a file, applies overrides in order and parses.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Fully resolved tree of a configuration, every field present.
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace ratchet
