#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ratchet/errors.hpp"
#include "ratchet/merton.hpp"
#include "ratchet/primal.hpp"

using namespace ratchet;
using ratchet::testing::coarse_config;
using ratchet::testing::coarse_solution;

namespace {

const PolicySurface& surface() { return *coarse_solution().policy; }

}  // namespace

TEST(Inversion, RoundTripAndMarginalValue) {
  const PolicySurface& ps = surface();
  for (double t : {0.0, 0.5, 0.9})
    for (double h : {0.5, 1.0, 2.0})
      for (double x : {0.7, 1.5, 3.0, 6.0}) {
        if (x <= ps.floor(t, h) * 1.01) continue;
        double I = ps.marginal(x, t, h);
        double z = std::log(I);
        EXPECT_NEAR(-ps.interp().slope(z, ps.params().T - t, h).v_y, x, 1e-9 * (1.0 + x));
        double dx = 1e-4 * (x - ps.floor(t, h));
        double fd = (ps.value(x + dx, t, h) - ps.value(x - dx, t, h)) / (2.0 * dx);
        EXPECT_NEAR(fd, I, 1e-4 * I) << "x = " << x << " t = " << t << " h = " << h;
      }
}

TEST(Inversion, MarginalValueDecreasesInWealth) {
  const PolicySurface& ps = surface();
  double prev = std::numeric_limits<double>::infinity();
  for (double x = 0.3; x < 8.0; x += 0.1) {
    double I = ps.marginal(x, 0.2, 1.0);
    EXPECT_LT(I, prev);
    prev = I;
  }
}

TEST(Inversion, FloorAndBoxErrors) {
  const PolicySurface& ps = surface();
  EXPECT_THROW(ps.marginal(ps.floor(0.0, 1.0), 0.0, 1.0), DomainError);
  EXPECT_THROW(ps.marginal(1e9, 0.0, 1.0), TruncationError);
}

TEST(Value, SandwichBounds) {
  const PolicySurface& ps = surface();
  for (double t : {0.0, 0.5})
    for (double h : {0.5, 1.0, 2.0})
      for (double x : {0.7, 2.0, 5.0}) {
        ValueBounds b = value_bounds(ps.params(), ps.kernel(), x, t, h);
        double V = ps.value(x, t, h);
        EXPECT_LE(b.lower, V);
        EXPECT_LE(V, b.upper);
      }
}

TEST(Value, TerminalConsistencyImprovesUnderRefinement) {
  const double x = 2.0, h = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int n_tau : {25, 50, 100}) {
    Solution s = solve(coarse_config({"grid.n_tau=" + std::to_string(n_tau), "grid.habit.count=8"}), 1);
    double dt = s.grid.d_tau;
    double gap = std::abs(s.policy->value(x, s.cfg.market.T - dt, h) - s.cfg.kernel.U_T.value(x));
    EXPECT_LT(gap, prev) << "n_tau = " << n_tau;
    prev = gap;
  }
}

TEST(Value, ZeroTerminalUtilityVanishesAtTheHorizon) {
  Solution s = solve(coarse_config({"utility.U_T={\"kind\":\"zero\"}", "grid.habit.count=8"}), 1);
  const double dt = s.grid.d_tau, T = s.cfg.market.T;
  for (double x : {0.01, 0.05, 0.1}) EXPECT_LE(std::abs(s.policy->value(x, T - dt, 1.0)), 5.0 * dt) << "x = " << x;
}

TEST(Thresholds, OrderedAndNondecreasingInHabit) {
  const PolicySurface& ps = surface();
  const double cell = ps.dual().grid.dz;
  for (double t : {0.0, 0.3, 0.7, 0.95}) {
    Thresholds prev{};
    bool first = true;
    for (double h : {0.3, 0.5, 1.0, 2.0, 4.0}) {
      Thresholds th = ps.thresholds(t, h);
      EXPECT_LT(th.x_L, th.x_H);
      EXPECT_LE(th.x_H, th.x_star);
      if (!first) {
        // One z cell of slack, converted to wealth through the local slope.
        EXPECT_GE(th.x_star, prev.x_star * (1.0 - 2.0 * cell));
        EXPECT_GE(th.x_H, prev.x_H);
        EXPECT_GE(th.x_L, prev.x_L);
      }
      prev = th;
      first = false;
    }
  }
}

TEST(Thresholds, TerminalLimitsWithMatchingUtilities) {
  // With U_T = U the high threshold tends to (U_T')^{-1}(U'(h)) = h, and x_star to x_H.
  Thresholds th = terminal_thresholds(surface().kernel(), 1.3);
  EXPECT_NEAR(th.x_H, 1.3, 1e-12);
  EXPECT_NEAR(th.x_star, th.x_H, 1e-12);
  const PolicySurface& ps = surface();
  const double t = ps.params().T - ps.dual().grid.d_tau;
  Thresholds near = ps.thresholds(t, 1.0);
  EXPECT_NEAR(std::log(near.x_H), std::log(1.0), 0.2);
}

TEST(Thresholds, FullDrawdownMergesLowAndHigh) {
  Solution s = solve(coarse_config({"market.b=1.0", "grid.habit.count=8", "sim.enabled=false"}), 1);
  for (double t : {0.0, 0.5})
    for (double h : {0.5, 1.0}) {
      Thresholds th = s.policy->thresholds(t, h);
      EXPECT_NEAR(th.x_L, th.x_H, 1e-12 * (1.0 + th.x_H));
    }
}

TEST(Feedback, ConsumptionBranchesAndRegions) {
  const PolicySurface& ps = surface();
  const double t = 0.25, h = 1.0, b = ps.kernel().b;
  Thresholds th = ps.thresholds(t, h);
  EXPECT_NEAR(ps.feedback(th.x_H, t, h).c, h, 1e-8);
  EXPECT_EQ(ps.feedback(th.x_L * 0.999, t, h).c, b * h);
  EXPECT_EQ(ps.feedback(th.x_L * 0.999, t, h).region, Region::low);
  EXPECT_EQ(ps.feedback(0.5 * (th.x_L + th.x_H), t, h).region, Region::medium);
  EXPECT_EQ(ps.feedback(0.5 * (th.x_H + th.x_star), t, h).region, Region::high);
  Feedback s = ps.feedback(th.x_star * 1.2, t, h);
  EXPECT_EQ(s.region, Region::switching);
  EXPECT_GT(s.habit, h);
  EXPECT_NEAR(s.c, s.habit, 1e-15);
  for (double x = 0.3; x < 6.0; x += 0.05) {
    Feedback f = ps.feedback(x, t, h);
    EXPECT_GE(f.pi, 0.0);
    EXPECT_GE(f.c, b * h);
    if (f.region != Region::switching) EXPECT_LE(f.c, h);
  }
}

TEST(Feedback, ConsumptionNondecreasingInWealth) {
  const PolicySurface& ps = surface();
  double prev = 0.0;
  for (double x = 0.3; x < 2.5; x += 0.02) {
    double c = ps.feedback(x, 0.5, 1.0).c;
    EXPECT_GE(c, prev - 1e-12);
    prev = c;
  }
}

TEST(PrimalReport, CoarseSurfacePassesTheReconstructionChecks) {
  PrimalReport r = check_primal(surface(), 2.0, 5);
  EXPECT_GT(r.hjb_probes, 100);
  // The coarse grid leaves a few times the default-grid residual.
  EXPECT_LE(r.max_hjb_residual, 5e-3);
  EXPECT_LE(r.max_round_trip, 1e-9);
  EXPECT_LE(r.max_marginal_mismatch, 1e-4);
  EXPECT_LE(r.max_curvature_mismatch, 1e-3);
  EXPECT_LE(r.max_bound_violation, 0.0);
  EXPECT_LE(r.max_ordering_violation, 0.0);
  EXPECT_LE(r.max_concavity, 0.0);
  EXPECT_GE(r.min_pi, 0.0);
}

TEST(Merton, ClosedFormMatchesOdeOracle) {
  const PolicySurface& ps = surface();
  MertonModel m = make_merton(ps.params(), ps.kernel());
  for (double tau : {0.1, 0.5, 1.0}) EXPECT_NEAR(m.factor(tau), merton_factor_ode(m, tau, 1e-12), 1e-10 * m.factor(tau));
}

TEST(Merton, UnconstrainedPipelineMatchesClosedForm) {
  const Solution& s = coarse_solution();
  MertonReport r = merton_reference(s.cfg.market, s.cfg.kernel, s.grid, {0.5, 1.0, 2.0, 3.0, 5.0}, 5, s.policy.get(), 2.0);
  EXPECT_GT(r.probes, 0);
  EXPECT_LE(r.max_rel_error, 1e-2);
  EXPECT_LE(r.max_constrained_excess, 1e-4);
}

TEST(Merton, RequiresCrra) {
  UtilityKernel k = make_kernel(Utility(LogUtility{}), Utility(LogUtility{}), {}, 0.25);
  EXPECT_THROW(make_merton(surface().params(), k), PreconditionError);
}
