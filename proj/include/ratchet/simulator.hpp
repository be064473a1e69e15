#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ratchet/market.hpp"
#include "ratchet/merton.hpp"
#include "ratchet/primal.hpp"
#include "ratchet/utility.hpp"

namespace ratchet {

/// Controls applied over one step.
struct Action {
  double pi = 0.0;     ///< amount held in the stock
  double c = 0.0;      ///< consumption rate
  double habit = 0.0;  ///< habit after this step's update
};

/// Feedback rule (x, s, h) -> action. Implementations must be safe to call from several threads.
class Policy {
 public:
  virtual ~Policy() = default;
  /// Throws TruncationError when the state leaves the region the rule is defined on.
  virtual Action act(double x, double s, double h) const = 0;
};

/// Optimal feedback from a policy surface. Habit updates follow the inverse of h -> x_star(s, h).
/// Below the lowest wealth the surface represents, the low-consumption policy of that wealth is used
/// with the stock position scaled down linearly to zero at the floor.
class OptimalPolicy : public Policy {
 public:
  explicit OptimalPolicy(const PolicySurface& ps) : ps_(ps) {}
  Action act(double x, double s, double h) const override;

 private:
  const PolicySurface& ps_;
};

/// Merton stock position ignoring the constraint, with Merton consumption clamped to [b h, h]. The
/// habit never moves.
class ClampedMertonPolicy : public Policy {
 public:
  ClampedMertonPolicy(MertonModel m, double b) : m_(m), b_(b) {}
  Action act(double x, double s, double h) const override;

 private:
  MertonModel m_;
  double b_;
};

struct SimConfig {
  int n_paths = 200000;
  int n_steps = 200;
  std::uint64_t seed = 20240601;
  double x0 = 2.0;
  double h0 = 1.0;
  double t0 = 0.0;
  bool antithetic = false;  ///< pairs paths with mirrored increments; n_paths must then be even
  int trace_paths = 0;      ///< number of leading paths whose states are recorded (at most 100)

  /// Throws ConfigError naming the offending field.
  void validate(const MarketParams& p) const;
};

struct TraceRow {
  int path = 0;
  double s = 0.0, x = 0.0, h = 0.0, pi = 0.0, c = 0.0;
};

struct SimResult {
  double value_estimate = 0.0;  ///< mean discounted utility over the paths kept
  double std_error = 0.0;
  int paths_used = 0;
  int excluded = 0;             ///< paths dropped after leaving the policy domain
  int floor_breaches = 0;       ///< paths projected onto the wealth floor
  long habit_updates = 0;       ///< steps where the habit increased
  double min_consumption_margin = 0.0;  ///< min over steps of C - b H (must stay >= 0)
  double max_habit_drop = 0.0;          ///< max over steps of H_before - H_after (must be 0)
  std::vector<TraceRow> trace;
};

/// Euler-Maruyama on dX = (r X + (mu - r) pi - C) ds + sigma pi dW from (x0, t0, h0) to T, with
/// left-endpoint utility quadrature plus the discounted terminal utility. Each path draws from its own
/// generator keyed by (seed, path), so results do not depend on `threads`. A path that would cross the
/// floor b H (1 - e^{-r (T-s)}) / r is put on it and held there with pi = 0, C = b H. Paths whose
/// policy throws TruncationError are excluded; more than 1% excluded throws DataError.
SimResult simulate_policy(const Policy& policy, const MarketParams& p, const UtilityKernel& k, const SimConfig& cfg,
                          int threads = 1);

struct BatchEntry {
  std::optional<SimResult> result;
  std::string error;  ///< empty on success
};

/// Independent runs; run i uses the seed derived from (cfgs[i].seed, i). Errors stay with their run.
std::vector<BatchEntry> simulate_batch(const Policy& policy, const MarketParams& p, const UtilityKernel& k,
                                       const std::vector<SimConfig>& cfgs, int threads = 1);

/// Seed of run `index` in a batch.
std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace ratchet
