// Command line front end: solve, simulate, export-probes and audit.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "ratchet/audit.hpp"
#include "ratchet/config.hpp"
#include "ratchet/errors.hpp"
#include "ratchet/pipeline.hpp"

namespace {

struct RunArgs {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  int threads = 0;
};

void add_run_options(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--config", a.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", a.out, "artifact directory (default: outputs.directory)");
  cmd->add_option("--override", a.overrides, "replace one field, as key.path=value")->take_all();
  cmd->add_option("--threads", a.threads, "worker threads (default: RATCHET_THREADS or all cores)")
      ->envname("RATCHET_THREADS")
      ->check(CLI::NonNegativeNumber);
}

int run(const RunArgs& a, const ratchet::ExportSelection& sel) {
  const ratchet::RunConfig cfg = ratchet::load_config(a.config, a.overrides);
  const int threads = a.threads > 0 ? a.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const std::string dir = a.out.empty() ? cfg.outputs.directory : a.out;
  auto start = std::chrono::steady_clock::now();
  auto sim = ratchet::run_pipeline(cfg, dir, threads, sel);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("artifacts written to %s in %.1f s with %d thread(s)\n", dir.c_str(), secs, threads);
  if (sim) {
    std::printf("V(x0, t0, h0) = %.10g\n", sim->value);
    std::printf("optimal policy estimate = %.10g +- %.3g (%d paths used, %d excluded, %d floor breaches)\n",
                sim->optimal.value_estimate, sim->optimal.std_error, sim->optimal.paths_used, sim->optimal.excluded,
                sim->optimal.floor_breaches);
    if (sim->comparison)
      std::printf("clamped Merton estimate = %.10g +- %.3g\n", sim->comparison->value_estimate,
                  sim->comparison->std_error);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consumption drawdown problem: dual obstacle solver, primal policies and Monte Carlo check"};
  app.require_subcommand(1);

  RunArgs solve_args, sim_args, probe_args;
  auto* solve = app.add_subcommand("solve", "run every stage and write all artifacts");
  add_run_options(solve, solve_args);
  auto* simulate = app.add_subcommand("simulate", "solve, then write the simulation report only");
  add_run_options(simulate, sim_args);
  auto* probes = app.add_subcommand("export-probes", "solve, then write the policy samples only");
  add_run_options(probes, probe_args);

  std::string audit_dir;
  bool audit_json = false;
  auto* audit = app.add_subcommand("audit", "re-check the invariants of an artifact directory");
  audit->add_option("dir", audit_dir, "artifact directory")->required();
  audit->add_flag("--json", audit_json, "print the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve) return run(solve_args, {true, true, true});
    if (*simulate) return run(sim_args, {false, false, true});
    if (*probes) return run(probe_args, {false, true, false});
    ratchet::AuditReport rep;
    try {
      rep = ratchet::audit_artifacts(audit_dir);
    } catch (const ratchet::DataError& e) {
      std::cerr << "audit: " << e.what() << '\n';
      return 2;
    }
    if (audit_json)
      std::cout << rep.to_json().dump(2) << '\n';
    else
      std::cout << rep.text();
    return rep.passed() ? 0 : 1;
  } catch (const ratchet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ratchet::StageError& e) {
    std::cerr << "stage " << e.stage() << " failed: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
