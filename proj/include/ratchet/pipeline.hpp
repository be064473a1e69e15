#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ratchet/config.hpp"
#include "ratchet/free_boundary.hpp"
#include "ratchet/obstacle.hpp"
#include "ratchet/primal.hpp"
#include "ratchet/simulator.hpp"

namespace ratchet {

/// Everything the solve stages produce.
struct Solution {
  RunConfig cfg;
  Grid1D grid;
  std::vector<double> h_grid;
  std::vector<ObstacleSolution> surface;   ///< slices from the configured scheme
  std::vector<ObstacleSolution> contact;   ///< complementarity slices, used for the boundaries
  std::vector<BoundaryCurve> curves;
  std::unique_ptr<PolicySurface> policy;
};

/// Stages obstacle, boundary, dual and primal. Library errors are rethrown as StageError naming the stage.
Solution solve(const RunConfig& cfg, int threads);

/// Optimal run at the configured state plus, when `compare` is set and U is CRRA, the clamped Merton run.
struct SimulationOutcome {
  double value = 0.0;  ///< V(x0, t0, h0) from the surface
  SimResult optimal;
  std::optional<SimResult> comparison;
  std::string comparison_note;  ///< reason the comparison was skipped
};
SimulationOutcome simulate(const Solution& sol, int threads);

/// Diagnostics of every module on the solved pipeline, as a versioned JSON tree.
nlohmann::json diagnostics(const Solution& sol);
nlohmann::json to_json(const SimResult& r);
nlohmann::json to_json(const SimulationOutcome& o, const SimConfig& cfg);

/// Artifact groups written by the CLI verbs.
struct ExportSelection {
  bool dense = true;        ///< w surface, boundaries, thresholds, dual samples, report
  bool probes = true;       ///< policy samples
  bool simulation = true;   ///< simulation report and trace
};

/// Solves, optionally simulates, and writes the selected artifacts plus config.json and manifest.json
/// into `dir`. Returns the simulation outcome when one was run.
std::optional<SimulationOutcome> run_pipeline(const RunConfig& cfg, const std::string& dir, int threads,
                                              const ExportSelection& sel = {});

/// File names of the artifact directory.
namespace artifact {
inline constexpr const char* config = "config.json";
inline constexpr const char* manifest = "manifest.json";
inline constexpr const char* w_surface = "w_surface.csv";
inline constexpr const char* boundary = "boundary.csv";
inline constexpr const char* thresholds = "thresholds.csv";
inline constexpr const char* dual_samples = "dual_samples.csv";
inline constexpr const char* policy = "policy.csv";
inline constexpr const char* report = "report.json";
inline constexpr const char* simulation = "simulation.json";
inline constexpr const char* trace = "sim_trace.csv";
}  // namespace artifact

}  // namespace ratchet
