#include "ratchet/simulator.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "ratchet/errors.hpp"

namespace ratchet {

Action OptimalPolicy::act(double x, double s, double h) const {
  if (h > ps_.h_max()) throw TruncationError("habit lies above the surface range");
  try {
    Feedback f = ps_.feedback(x, s, h);
    if (f.region == Region::switching && f.habit >= ps_.h_max())
      throw TruncationError("habit update reaches the top of the surface range");
    return {f.pi, f.c, f.habit};
  } catch (const TruncationError&) {
    const DualInterpolant& d = ps_.interp();
    const Grid1D& g = ps_.dual().grid;
    const double tau = ps_.params().T - s;
    const double z_edge = g.z(g.j_report_max());
    DualSlope edge = d.slope(z_edge, tau, h);
    const double x_edge = -edge.v_y, fl = ps_.floor(s, h);
    if (!(x < x_edge)) throw;
    double pi_edge = ps_.params().kappa / ps_.params().sigma * std::exp(z_edge) * edge.v_yy;
    return {pi_edge * std::max(0.0, x - fl) / (x_edge - fl), ps_.kernel().b * h, h};
  }
}

Action ClampedMertonPolicy::act(double x, double s, double h) const {
  const double tau = m_.p.T - s;
  double c = x > 0.0 ? m_.consumption(x, tau) : 0.0;
  return {m_.stock(x), std::clamp(c, b_ * h, h), h};
}

void SimConfig::validate(const MarketParams& p) const {
  if (n_paths < 1) throw ConfigError("sim.n_paths", "must be at least 1");
  if (n_steps < 1) throw ConfigError("sim.n_steps", "must be at least 1");
  if (antithetic && n_paths % 2 != 0) throw ConfigError("sim.n_paths", "must be even with antithetic pairs");
  if (!(t0 >= 0.0 && t0 < p.T)) throw ConfigError("sim.t0", "must lie in [0, T)");
  if (!(h0 > 0.0)) throw ConfigError("sim.h0", "must be positive");
  if (!(x0 > p.wealth_floor(h0, p.T - t0))) throw ConfigError("sim.x0", "must exceed the wealth floor");
  if (trace_paths < 0 || trace_paths > 100) throw ConfigError("sim.trace_paths", "must lie in [0, 100]");
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x5eedu};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

struct PathOutcome {
  double value = 0.0;
  bool excluded = false;
  int breaches = 0;  ///< members of the unit projected onto the floor
  long updates = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  double max_drop = 0.0;
};

/// One path driven by the increments in `z` (already signed).
PathOutcome run_path(const Policy& policy, const MarketParams& p, const UtilityKernel& k, const SimConfig& cfg,
                     const std::vector<double>& z, std::vector<TraceRow>* trace, int path) {
  PathOutcome out;
  const double ds = (p.T - cfg.t0) / cfg.n_steps, sq = std::sqrt(ds);
  double x = cfg.x0, h = cfg.h0, acc = 0.0;
  bool absorbed = false;
  for (int i = 0; i < cfg.n_steps; ++i) {
    const double s = cfg.t0 + i * ds;
    const double disc = std::exp(-p.rho * (s - cfg.t0));
    Action a{0.0, k.b * h, h};
    if (!absorbed) {
      try {
        a = policy.act(x, s, h);
      } catch (const TruncationError&) {
        out.excluded = true;
        return out;
      }
    }
    if (a.habit > h) ++out.updates;
    out.max_drop = std::max(out.max_drop, h - a.habit);
    h = std::max(h, a.habit);
    out.min_margin = std::min(out.min_margin, a.c - k.b * h);
    if (trace) trace->push_back({path, s, x, h, a.pi, a.c});
    acc += disc * k.U.value(a.c) * ds;
    const double s_next = s + ds, fl = p.wealth_floor(h, p.T - s_next);
    if (absorbed) {
      x = fl;
      continue;
    }
    x += (p.r * x + (p.mu - p.r) * a.pi - a.c) * ds + p.sigma * a.pi * sq * z[i];
    if (x <= fl) {
      x = fl;
      absorbed = true;
      out.breaches = 1;
    }
  }
  if (trace) trace->push_back({path, p.T, x, h, 0.0, 0.0});
  acc += std::exp(-p.rho * (p.T - cfg.t0)) * k.U_T.value(x);
  out.value = acc;
  return out;
}

}  // namespace

SimResult simulate_policy(const Policy& policy, const MarketParams& p, const UtilityKernel& k, const SimConfig& cfg,
                          int threads) {
  cfg.validate(p);
  // A unit is a path, or an antithetic pair averaged into one sample.
  const int units = cfg.antithetic ? cfg.n_paths / 2 : cfg.n_paths;
  std::vector<PathOutcome> outcomes(units);
  std::vector<std::vector<TraceRow>> traces(std::min(cfg.trace_paths, units));
  std::atomic<int> next{0};
  auto worker = [&] {
    std::vector<double> z(cfg.n_steps), mirrored(cfg.n_steps);
    for (int u = next++; u < units; u = next++) {
      std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                        static_cast<std::uint32_t>(u)};
      std::mt19937_64 gen(seq);
      std::normal_distribution<double> normal;
      for (double& zi : z) zi = normal(gen);
      std::vector<TraceRow>* trace = u < static_cast<int>(traces.size()) ? &traces[u] : nullptr;
      PathOutcome o = run_path(policy, p, k, cfg, z, trace, u);
      if (cfg.antithetic && !o.excluded) {
        for (int i = 0; i < cfg.n_steps; ++i) mirrored[i] = -z[i];
        PathOutcome m = run_path(policy, p, k, cfg, mirrored, nullptr, u);
        o.excluded = m.excluded;
        o.value = 0.5 * (o.value + m.value);
        o.breaches += m.breaches;
        o.updates += m.updates;
        o.min_margin = std::min(o.min_margin, m.min_margin);
        o.max_drop = std::max(o.max_drop, m.max_drop);
      }
      outcomes[u] = o;
    }
  };
  const int n_threads = std::max(1, std::min(threads, units));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SimResult r;
  r.min_consumption_margin = std::numeric_limits<double>::infinity();
  const int per_unit = cfg.antithetic ? 2 : 1;
  double sum = 0.0;
  int kept = 0;
  for (const PathOutcome& o : outcomes) {
    if (o.excluded) {
      r.excluded += per_unit;
      continue;
    }
    sum += o.value;
    ++kept;
    r.floor_breaches += o.breaches;
    r.habit_updates += o.updates;
    r.min_consumption_margin = std::min(r.min_consumption_margin, o.min_margin);
    r.max_habit_drop = std::max(r.max_habit_drop, o.max_drop);
  }
  if (r.excluded * 100 > cfg.n_paths) {
    std::ostringstream os;
    os << r.excluded << " of " << cfg.n_paths << " paths left the policy domain (limit 1%)";
    throw DataError(os.str());
  }
  r.paths_used = kept * per_unit;
  r.value_estimate = sum / kept;
  double ss = 0.0;
  for (const PathOutcome& o : outcomes)
    if (!o.excluded) ss += (o.value - r.value_estimate) * (o.value - r.value_estimate);
  r.std_error = kept > 1 ? std::sqrt(ss / (kept - 1) / kept) : 0.0;
  for (auto& t : traces) r.trace.insert(r.trace.end(), t.begin(), t.end());
  return r;
}

std::vector<BatchEntry> simulate_batch(const Policy& policy, const MarketParams& p, const UtilityKernel& k,
                                       const std::vector<SimConfig>& cfgs, int threads) {
  if (cfgs.empty()) throw PreconditionError("simulation batch is empty");
  std::vector<BatchEntry> out(cfgs.size());
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    SimConfig c = cfgs[i];
    c.seed = derived_seed(cfgs[i].seed, i);
    try {
      out[i].result = simulate_policy(policy, p, k, c, threads);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  }
  return out;
}

}  // namespace ratchet
