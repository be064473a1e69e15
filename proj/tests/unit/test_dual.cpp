#include <cmath>

#include <gtest/gtest.h>

#include "ratchet/dual.hpp"
#include "ratchet/errors.hpp"

using namespace ratchet;

namespace {

MarketParams market() { return MarketParams::make(0.05, 0.1, 0.3, 0.1, 0.25, 1.0); }

UtilityKernel kernel() { return make_kernel(Utility(Crra{0.5}), Utility(Crra{0.5}), {}, 0.25); }

Grid1D grid() { return Grid1D::make(-8.0, 6.0, 141, 40, 1.0); }

std::vector<ObstacleSolution> constant_slices(const Grid1D& g, const std::vector<double>& hs, double w0) {
  std::vector<ObstacleSolution> out;
  for (double h : hs) {
    ObstacleSolution s;
    s.h = h;
    s.w = Eigen::MatrixXd::Constant(g.nz, g.n_tau + 1, w0);
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(LinearDual, ZeroDataStaysZero) {
  const Grid1D g = grid();
  Eigen::MatrixXd u = solve_linear_dual(market(), g, Eigen::VectorXd::Zero(g.nz), Eigen::VectorXd::Zero(g.nz));
  EXPECT_EQ(u.lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(LinearDual, ConstantSourceFollowsTheDecayOde) {
  const MarketParams p = market();
  const Grid1D g = grid();
  const double s0 = 0.7;
  Eigen::MatrixXd u = solve_linear_dual(p, g, Eigen::VectorXd::Constant(g.nz, s0), Eigen::VectorXd::Zero(g.nz));
  for (int n = 0; n <= g.n_tau; ++n) {
    double exact = s0 / p.rho * (1.0 - std::exp(-p.rho * g.tau(n)));
    EXPECT_LE((u.col(n).array() - exact).abs().maxCoeff(), s0 * g.d_tau) << "n = " << n;
  }
}

TEST(LinearDual, CappedSolveSelfConverges) {
  const MarketParams p = market();
  const UtilityKernel k = kernel();
  const Grid1D coarse = Grid1D::make(-8.0, 6.0, 141, 50, 1.0);
  const Grid1D fine = Grid1D::make(-8.0, 6.0, 561, 200, 1.0);
  Eigen::MatrixXd a = solve_capped_linear(p, k, coarse, 8.0), b = solve_capped_linear(p, k, fine, 8.0);
  const int jc = 80, jf = 320;  // z = 0
  ASSERT_NEAR(coarse.z(jc), 0.0, 1e-12);
  ASSERT_NEAR(fine.z(jf), 0.0, 1e-12);
  EXPECT_LE(std::abs(a(jc, coarse.n_tau) - b(jf, fine.n_tau)) / std::abs(b(jf, fine.n_tau)), 1e-2);
}

TEST(HabitIntegral, ZeroObstacleLeavesCappedSolution) {
  const MarketParams p = market();
  const UtilityKernel k = kernel();
  const Grid1D g = grid();
  Eigen::MatrixXd phi = solve_capped_linear(p, k, g, 2.0);
  for (auto rule : {HabitQuadrature::trapezoid, HabitQuadrature::corrected}) {
    DualSurface s = integrate_over_habit(p, k, g, phi, constant_slices(g, {0.5, 1.0, 2.0}, 0.0), rule);
    for (int i = 0; i < s.slices(); ++i) EXPECT_EQ((s.u[i] - phi).lpNorm<Eigen::Infinity>(), 0.0);
  }
}

TEST(HabitIntegral, ConstantObstacleIsIntegratedExactly) {
  const MarketParams p = market();
  const UtilityKernel k = kernel();
  const Grid1D g = grid();
  Eigen::MatrixXd phi = solve_capped_linear(p, k, g, 2.0);
  const double w0 = 0.3;
  DualSurface s = integrate_over_habit(p, k, g, phi, constant_slices(g, {0.5, 2.0}, w0), HabitQuadrature::trapezoid);
  EXPECT_LT(((s.u[0] - phi).array() - w0 * 1.5).abs().maxCoeff(), 1e-12);
  EXPECT_EQ((s.u[1] - phi).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(HabitIntegral, TopSliceMustCarryTheCap) {
  const Grid1D g = grid();
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(g.nz, g.n_tau + 1);
  auto sols = constant_slices(g, {0.5, 1.0}, 0.0);
  sols[1].w.resize(3, 3);
  EXPECT_THROW(integrate_over_habit(market(), kernel(), g, phi, sols), PreconditionError);
}

class SolvedSurface : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    p = market();
    k = kernel();
    g = Grid1D::make(-8.0, 6.0, 281, 50, 1.0);
    hs = make_habit_grid(0.05, 8.0, 16, HabitSpacing::geometric);
    sols = sweep_habit_slices(p, k, g, hs, {});
    s = integrate_over_habit(p, k, g, solve_capped_linear(p, k, g, hs.back()), sols);
  }
  static MarketParams p;
  static UtilityKernel k;
  static Grid1D g;
  static std::vector<double> hs;
  static std::vector<ObstacleSolution> sols;
  static DualSurface s;
};
MarketParams SolvedSurface::p;
UtilityKernel SolvedSurface::k;
Grid1D SolvedSurface::g;
std::vector<double> SolvedSurface::hs;
std::vector<ObstacleSolution> SolvedSurface::sols;
DualSurface SolvedSurface::s;

TEST_F(SolvedSurface, ConvexWithNegativeSlope) {
  SurfaceReport r = check_surface(s, p, k, sols);
  EXPECT_GE(r.min_convexity, -1e-7);
  EXPECT_LT(r.max_v_y, 0.0);
  EXPECT_LE(r.max_habit_increase, 1e-12);
}

TEST_F(SolvedSurface, SlopeAsymptotes) {
  SlopeReport r = slope_asymptote_check(s, p);
  EXPECT_LE(r.max_right_gap, 1e-2);
  EXPECT_LE(r.max_left_slope, -1e3);
}

TEST_F(SolvedSurface, IdenticalCapsGiveZeroGap) {
  auto probes = make_probes(s, 0.05, 20.0, 1.0, 10);
  ASSERT_FALSE(probes.empty());
  CapReport r = cap_stability_check(p, k, s, s.h_bar, probes, {});
  EXPECT_EQ(r.min_gap, 0.0);
  EXPECT_EQ(r.max_gap, 0.0);
  // Habit quadrature error: about 3e-4 with 16 habits, shrinking as habits are added.
  EXPECT_LE(r.max_excess_over_unconstrained, 1e-3);
  EXPECT_THROW(cap_stability_check(p, k, s, 0.5 * s.h_bar, probes, {}), PreconditionError);
}

TEST_F(SolvedSurface, HabitDifferenceTracksObstacle) {
  // -u_h approximates w at the cell midpoint.
  const int n = g.n_tau;
  for (int i = 0; i + 1 < s.slices(); ++i) {
    double dh = hs[i + 1] - hs[i];
    for (int j = 0; j <= g.j_report_max(); j += 10) {
      double slope = (s.u[i](j, n) - s.u[i + 1](j, n)) / dh;
      double mid = 0.5 * (sols[i].w(j, n) + sols[i + 1].w(j, n));
      EXPECT_NEAR(slope, mid, 0.05 * (1.0 + std::abs(mid))) << "i = " << i << " j = " << j;
    }
  }
}

TEST(SlopeAsymptote, NoDrawdownMeansZeroRightSlope) {
  MarketParams p = MarketParams::make(0.05, 0.1, 0.3, 0.1, 0.0, 1.0);
  UtilityKernel k = make_kernel(Utility(Crra{0.5}), Utility(Crra{0.5}), {}, 0.0);
  const Grid1D g = Grid1D::make(-8.0, 6.0, 281, 50, 1.0);
  auto hs = make_habit_grid(0.5, 4.0, 6, HabitSpacing::geometric);
  auto sols = sweep_habit_slices(p, k, g, hs, {});
  DualSurface s = integrate_over_habit(p, k, g, solve_capped_linear(p, k, g, hs.back()), sols);
  EXPECT_LE(slope_asymptote_check(s, p).max_right_gap, 1e-3);
}
