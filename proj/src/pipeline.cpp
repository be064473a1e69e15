#include "ratchet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ratchet/artifacts.hpp"
#include "ratchet/dual.hpp"
#include "ratchet/errors.hpp"
#include "ratchet/merton.hpp"

namespace ratchet {

using nlohmann::json;

namespace {

/// Runs one stage, tagging library failures with its name. Config errors pass through untouched.
template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

/// JSON has no infinities; non-finite values become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

Solution solve(const RunConfig& cfg, int threads) {
  Solution sol;
  sol.cfg = cfg;
  sol.grid = cfg.make_grid();
  sol.h_grid = cfg.habit_grid();
  const MarketParams& p = cfg.market;
  const UtilityKernel& k = cfg.kernel;

  SweepOptions opt{cfg.scheme, cfg.penalty, cfg.complementarity, threads};
  sol.surface = stage("obstacle", [&] { return sweep_habit_slices(p, k, sol.grid, sol.h_grid, opt); });

  sol.curves = stage("boundary", [&] {
    if (cfg.scheme == Scheme::complementarity) {
      sol.contact = sol.surface;
    } else {
      SweepOptions psor = opt;
      psor.scheme = Scheme::complementarity;
      sol.contact = sweep_habit_slices(p, k, sol.grid, sol.h_grid, psor);
    }
    std::vector<BoundaryCurve> curves;
    for (const ObstacleSolution& s : sol.contact) curves.push_back(extract_boundary(s, sol.grid, 0.0));
    return curves;
  });

  DualSurface dual = stage("dual", [&] {
    Eigen::MatrixXd phi = solve_capped_linear(p, k, sol.grid, sol.h_grid.back());
    return integrate_over_habit(p, k, sol.grid, phi, sol.surface, cfg.quadrature, cfg.continuation_level);
  });

  sol.policy = stage("primal", [&] { return std::make_unique<PolicySurface>(p, k, std::move(dual), sol.curves); });
  return sol;
}

SimulationOutcome simulate(const Solution& sol, int threads) {
  return stage("simulate", [&] {
    const RunConfig& cfg = sol.cfg;
    const SimConfig& run = cfg.sim.run;
    SimulationOutcome out;
    out.value = sol.policy->value(run.x0, run.t0, run.h0);
    OptimalPolicy optimal(*sol.policy);
    out.optimal = simulate_policy(optimal, cfg.market, cfg.kernel, run, threads);
    if (!cfg.sim.compare) {
      out.comparison_note = "disabled";
      return out;
    }
    try {
      ClampedMertonPolicy merton(make_merton(cfg.market, cfg.kernel), cfg.market.b);
      SimConfig quiet = run;
      quiet.trace_paths = 0;
      out.comparison = simulate_policy(merton, cfg.market, cfg.kernel, quiet, threads);
    } catch (const PreconditionError& e) {
      out.comparison_note = e.what();
    }
    return out;
  });
}

json to_json(const SimResult& r) {
  return {{"value_estimate", r.value_estimate},   {"std_error", r.std_error},
          {"paths_used", r.paths_used},           {"excluded", r.excluded},
          {"floor_breaches", r.floor_breaches},   {"habit_updates", r.habit_updates},
          {"min_consumption_margin", number(r.min_consumption_margin)},
          {"max_habit_drop", r.max_habit_drop}};
}

json to_json(const SimulationOutcome& o, const SimConfig& cfg) {
  const SimResult& r = o.optimal;
  const double allowance = 5e-3 * std::abs(o.value);
  json j{{"schema_version", report_schema_version},
         {"config", {{"n_paths", cfg.n_paths}, {"n_steps", cfg.n_steps}, {"seed", cfg.seed}, {"x0", cfg.x0},
                     {"h0", cfg.h0}, {"t0", cfg.t0}, {"antithetic", cfg.antithetic}}},
         {"value_function", o.value},
         {"optimal", to_json(r)},
         {"bracket", {{"lower", o.value - 2.0 * r.std_error - allowance},
                      {"upper", o.value + 2.0 * r.std_error},
                      {"allowance", allowance}}}};
  if (o.comparison) {
    const double combined = std::hypot(r.std_error, o.comparison->std_error);
    j["comparison"] = to_json(*o.comparison);
    j["comparison"]["policy"] = "clamped_merton";
    j["comparison"]["gap"] = r.value_estimate - o.comparison->value_estimate;
    j["comparison"]["combined_std_error"] = combined;
  } else {
    j["comparison"] = {{"skipped", o.comparison_note}};
  }
  return j;
}

json diagnostics(const Solution& sol) {
  const RunConfig& cfg = sol.cfg;
  const MarketParams& p = cfg.market;
  const UtilityKernel& k = cfg.kernel;
  const Grid1D& g = sol.grid;
  const PolicySurface& ps = *sol.policy;

  SliceReport slice{};
  double scheme_gap = 0.0;
  int max_iter = 0;
  for (std::size_t i = 0; i < sol.surface.size(); ++i) {
    SliceReport s = check_slice(p, g, sol.surface[i]);
    slice.negativity = std::max(slice.negativity, s.negativity);
    slice.growth_excess = std::max(slice.growth_excess, s.growth_excess);
    slice.z_decrease = std::max(slice.z_decrease, s.z_decrease);
    slice.tau_decrease = std::max(slice.tau_decrease, s.tau_decrease);
    max_iter = std::max(max_iter, sol.surface[i].max_iterations);
    scheme_gap = std::max(scheme_gap, (sol.surface[i].w - sol.contact[i].w).cwiseAbs().maxCoeff());
  }
  HabitPairReport pair{};
  for (std::size_t i = 0; i + 1 < sol.surface.size(); ++i) {
    HabitPairReport r = check_habit_pair(p, k, sol.surface[i], sol.surface[i + 1]);
    pair.monotonicity = std::max(pair.monotonicity, r.monotonicity);
    pair.slope_excess = std::max(pair.slope_excess, r.slope_excess);
  }
  BoundaryReport br = check_boundaries(sol.curves, k);
  SurfaceReport sr = check_surface(ps.dual(), p, k, sol.surface, cfg.continuation_level);
  SlopeReport slope = slope_asymptote_check(ps.dual(), p);
  const double h_hi = cfg.outputs.probe_h.empty()
                          ? ps.h_min()
                          : *std::max_element(cfg.outputs.probe_h.begin(), cfg.outputs.probe_h.end());
  PrimalReport pr = check_primal(ps, h_hi, cfg.outputs.tau_stride);

  json j{{"schema_version", report_schema_version},
         {"grid", {{"z_min", g.z_min}, {"z_max", g.z_max}, {"nz", g.nz}, {"dz", g.dz}, {"n_tau", g.n_tau},
                   {"d_tau", g.d_tau}, {"slices", sol.h_grid.size()}, {"h_bar", ps.dual().h_bar}}},
         {"obstacle", {{"scheme", to_string(cfg.scheme)},
                       {"negativity", slice.negativity},
                       {"growth_excess", slice.growth_excess},
                       {"z_decrease", slice.z_decrease},
                       {"tau_decrease", slice.tau_decrease},
                       {"habit_monotonicity", pair.monotonicity},
                       {"habit_slope_excess", pair.slope_excess},
                       {"max_iterations", max_iter},
                       {"scheme_gap", scheme_gap}}},
         {"boundary", {{"max_above_limit", br.max_above_limit},
                       {"max_tau_increase", br.max_tau_increase},
                       {"max_habit_increase", br.max_habit_increase},
                       {"max_first_step_gap", br.max_first_step_gap},
                       {"flagged_nodes", br.flagged_nodes}}},
         {"dual", {{"min_convexity", sr.min_convexity},
                   {"max_v_y", sr.max_v_y},
                   {"max_habit_increase", sr.max_habit_increase},
                   {"max_continuation_residual", sr.max_continuation_residual},
                   {"min_stopped_excess", sr.min_stopped_excess},
                   {"z_right", slope.z_right},
                   {"max_right_slope_gap", slope.max_right_gap},
                   {"right_slope_gap_at_T", slope.right_gap_at_T},
                   {"max_left_slope", slope.max_left_slope}}},
         {"primal", {{"h_hi", h_hi},
                     {"max_ordering_violation", number(pr.max_ordering_violation)},
                     {"max_floor_violation", number(pr.max_floor_violation)},
                     {"max_habit_decrease", number(pr.max_habit_decrease)},
                     {"max_round_trip", pr.max_round_trip},
                     {"max_marginal_mismatch", pr.max_marginal_mismatch},
                     {"max_curvature_mismatch", pr.max_curvature_mismatch},
                     {"max_hjb_residual", pr.max_hjb_residual},
                     {"max_bound_violation", number(pr.max_bound_violation)},
                     {"max_terminal_cells", pr.max_terminal_cells},
                     {"min_pi", number(pr.min_pi)},
                     {"max_c_violation", pr.max_c_violation},
                     {"max_concavity", number(pr.max_concavity)},
                     {"max_switching_slope", pr.max_switching_slope},
                     {"probes", pr.probes},
                     {"hjb_probes", pr.hjb_probes}}}};
  try {
    MertonReport mr = merton_reference(p, k, g, cfg.outputs.probe_x, cfg.outputs.tau_stride, &ps, h_hi);
    j["merton"] = {{"max_rel_error", mr.max_rel_error},
                   {"max_factor_gap", mr.max_factor_gap},
                   {"max_constrained_excess", mr.max_constrained_excess},
                   {"probes", mr.probes}};
  } catch (const PreconditionError& e) {
    j["merton"] = {{"skipped", e.what()}};
  }
  return j;
}

namespace {

std::string w_surface_csv(const Solution& sol) {
  const Grid1D& g = sol.grid;
  const int zs = sol.cfg.outputs.z_stride, ts = sol.cfg.outputs.tau_stride;
  CsvTable t({"z", "tau", "h", "w"});
  for (const ObstacleSolution& s : sol.surface)
    for (int n = 0; n <= g.n_tau; n += ts)
      for (int j = 0; j < g.nz; j += zs) {
        t << g.z(j) << g.tau(n) << s.h << s.w(j, n);
        t.end_row();
      }
  return t.text();
}

std::string boundary_csv(const Solution& sol) {
  CsvTable t({"tau", "h", "z_star"});
  for (const BoundaryCurve& c : sol.curves)
    for (Eigen::Index n = 0; n < c.tau_nodes.size(); ++n) {
      t << c.tau_nodes[n] << c.h << c.z_star[n];
      t.end_row();
    }
  return t.text();
}

std::string thresholds_csv(const Solution& sol) {
  ThresholdTable tab = threshold_table(*sol.policy);
  CsvTable t({"t", "h", "x_L", "x_H", "x_star"});
  for (std::size_t i = 0; i < tab.t.size(); ++i) {
    t << tab.t[i] << tab.h[i] << tab.x_L[i] << tab.x_H[i] << tab.x_star[i];
    t.end_row();
  }
  return t.text();
}

std::string dual_samples_csv(const Solution& sol) {
  const DualSurface& s = sol.policy->dual();
  const Grid1D& g = s.grid;
  const int zs = sol.cfg.outputs.z_stride, ts = sol.cfg.outputs.tau_stride;
  CsvTable t({"z", "tau", "h", "u", "v_y", "v_yy"});
  for (int k = 0; k < s.slices(); ++k)
    for (int n = 0; n <= g.n_tau; n += ts)
      for (int j = 0; j <= g.j_report_max(); j += zs) {
        t << g.z(j) << g.tau(n) << s.h_grid[k] << s.u[k](j, n) << s.v_y(j, n, k) << s.v_yy(j, n, k);
        t.end_row();
      }
  return t.text();
}

std::string policy_csv(const Solution& sol) {
  const PolicySurface& ps = *sol.policy;
  const OutputSpec& o = sol.cfg.outputs;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CsvTable t({"x", "t", "h", "V", "pi", "c", "region"});
  for (double time : o.probe_t)
    for (double h : o.probe_h)
      for (double x : o.probe_x) {
        double V = nan;
        Feedback f{nan, nan, nan, Region::low};
        std::string region;
        try {
          V = ps.value(x, time, h);
          f = ps.feedback(x, time, h);
          region = to_string(f.region);
        } catch (const DomainError&) {
          region = "below_floor";
        } catch (const TruncationError&) {
          region = "outside_box";
        }
        t << x << time << h << V << f.pi << f.c << region;
        t.end_row();
      }
  return t.text();
}

std::string trace_csv(const SimResult& r) {
  CsvTable t({"path", "s", "X", "H", "pi", "C"});
  for (const TraceRow& row : r.trace) {
    t << static_cast<double>(row.path) << row.s << row.x << row.h << row.pi << row.c;
    t.end_row();
  }
  return t.text();
}

}  // namespace

std::optional<SimulationOutcome> run_pipeline(const RunConfig& cfg, const std::string& dir, int threads,
                                              const ExportSelection& sel) {
  Solution sol = solve(cfg, threads);
  std::optional<SimulationOutcome> sim;
  if (sel.simulation && cfg.sim.enabled) sim = simulate(sol, threads);

  stage("export", [&] {
    const json config = to_json(cfg);
    ArtifactWriter out(dir);
    out.write_json(artifact::config, config);
    if (sel.dense) {
      out.write(artifact::w_surface, w_surface_csv(sol));
      out.write(artifact::boundary, boundary_csv(sol));
      out.write(artifact::thresholds, thresholds_csv(sol));
      out.write(artifact::dual_samples, dual_samples_csv(sol));
      out.write_json(artifact::report, diagnostics(sol));
    }
    if (sel.probes) out.write(artifact::policy, policy_csv(sol));
    if (sim) {
      out.write_json(artifact::simulation, to_json(*sim, cfg.sim.run));
      if (!sim->optimal.trace.empty()) out.write(artifact::trace, trace_csv(sim->optimal));
    }
    out.write_manifest(config);
    return 0;
  });
  return sim;
}

}  // namespace ratchet
