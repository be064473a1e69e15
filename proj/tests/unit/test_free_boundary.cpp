#include <cmath>

#include <gtest/gtest.h>

#include "ratchet/errors.hpp"
#include "ratchet/free_boundary.hpp"

using namespace ratchet;

namespace {

MarketParams market() { return MarketParams::make(0.05, 0.1, 0.3, 0.1, 0.25, 1.0); }

UtilityKernel kernel() { return make_kernel(Utility(Crra{0.5}), Utility(Crra{0.5}), {}, 0.25); }

}  // namespace

TEST(ExtractBoundary, ZeroSliceIsDegenerate) {
  const Grid1D g = Grid1D::make(-8.0, 6.0, 141, 20, 1.0);
  ObstacleSolution s;
  s.h = 1.0;
  s.w = Eigen::MatrixXd::Zero(g.nz, g.n_tau + 1);
  BoundaryCurve c = extract_boundary(s, g, 0.0);
  for (int n = 0; n <= g.n_tau; ++n) {
    EXPECT_EQ(c.z_star[n], g.z_max);
    EXPECT_EQ(c.flags[n], BoundaryFlag::degenerate);
  }
}

TEST(ExtractBoundary, PositiveSliceExitsTheBox) {
  const Grid1D g = Grid1D::make(-8.0, 6.0, 141, 20, 1.0);
  ObstacleSolution s;
  s.w = Eigen::MatrixXd::Constant(g.nz, g.n_tau + 1, 1.0);
  BoundaryCurve c = extract_boundary(s, g, 0.0);
  EXPECT_EQ(c.z_star[3], g.z_min);
  EXPECT_EQ(c.flags[3], BoundaryFlag::exited);
}

TEST(ExtractBoundary, RefinesLinearlyAndRejectsDecrease) {
  const Grid1D g = Grid1D::make(0.0, 10.0, 11, 1, 1.0);
  ObstacleSolution s;
  s.w = Eigen::MatrixXd::Zero(g.nz, 2);
  for (int j = 5; j < g.nz; ++j) s.w(j, 1) = 0.2 * (j - 4);
  EXPECT_NEAR(extract_boundary(s, g, 0.1).z_star[1], 4.5, 1e-12);
  s.w(8, 1) = 0.0;
  EXPECT_THROW(extract_boundary(s, g, 0.1), DataError);
}

TEST(ExtractBoundary, SolvedSlicesFollowTheLimitAndOrdering) {
  const MarketParams p = market();
  const UtilityKernel k = kernel();
  const Grid1D g = Grid1D::make(-8.0, 6.0, 281, 50, 1.0);
  auto sols = sweep_habit_slices(p, k, g, {0.8, 1.0, 1.25}, {Scheme::complementarity, {}, {}, 1});
  std::vector<BoundaryCurve> curves;
  for (const auto& s : sols) curves.push_back(extract_boundary(s, g, 0.0));
  BoundaryReport r = check_boundaries(curves, k);
  EXPECT_LE(r.max_above_limit, 0.0);
  EXPECT_LE(r.max_tau_increase, g.dz);
  EXPECT_LE(r.max_habit_increase, g.dz);
  // Limit at the first step: 2 dz plus a d_tau term.
  EXPECT_LE(r.max_first_step_gap, 2.0 * g.dz + 10.0 * g.d_tau);
  for (std::size_t i = 0; i < curves.size(); ++i)
    EXPECT_NEAR(curves[i].z_star[1], std::log(k.U.marginal(sols[i].h)), 2.0 * g.dz + 10.0 * g.d_tau);
}

TEST(InvertBoundary, SingleSliceIsAStep) {
  const Grid1D g = Grid1D::make(-2.0, 2.0, 41, 2, 1.0);
  BoundaryCurve c;
  c.h = 1.5;
  c.tau_nodes = Eigen::VectorXd::LinSpaced(3, 0.0, 1.0);
  c.z_star = Eigen::VectorXd::Constant(3, 0.3);
  c.flags.assign(3, BoundaryFlag::interior);
  InverseBoundary inv = invert_boundary({c}, g);
  for (int j = 0; j < g.nz; ++j) EXPECT_EQ(inv.h_star(j, 1), g.z(j) < 0.3 ? 1.5 : 0.0) << "z = " << g.z(j);
}

TEST(InvertBoundary, RoundTripWithinOneCell) {
  const MarketParams p = market();
  const UtilityKernel k = kernel();
  const Grid1D g = Grid1D::make(-8.0, 6.0, 281, 50, 1.0);
  std::vector<double> hs{0.5, 0.7, 1.0, 1.4, 2.0};
  auto sols = sweep_habit_slices(p, k, g, hs, {Scheme::complementarity, {}, {}, 1});
  std::vector<BoundaryCurve> curves;
  for (const auto& s : sols) curves.push_back(extract_boundary(s, g, 0.0));
  InverseBoundary inv = invert_boundary(curves, g);
  for (int n = 1; n <= g.n_tau; ++n) {
    std::vector<double> zs;
    for (const auto& c : curves) zs.push_back(c.z_star[n]);
    for (int j = 0; j < g.nz; ++j) {
      double hstar = inv.h_star(j, n);
      if (n > 1) EXPECT_LE(hstar, inv.h_star(j, n - 1) + 1e-12);
      if (hstar <= hs.front() || hstar >= hs.back()) continue;
      // z*(tau, h*(z)) by linear interpolation in h.
      std::size_t i = 1;
      while (hs[i] < hstar) ++i;
      double t = (hstar - hs[i - 1]) / (hs[i] - hs[i - 1]);
      double z_back = zs[i - 1] + t * (zs[i] - zs[i - 1]);
      EXPECT_NEAR(z_back, g.z(j), g.dz);
    }
  }
}

TEST(InvertBoundary, CrossingCurvesAreRejected) {
  const Grid1D g = Grid1D::make(-2.0, 2.0, 41, 1, 1.0);
  auto curve = [](double h, double z) {
    BoundaryCurve c;
    c.h = h;
    c.tau_nodes = Eigen::VectorXd::LinSpaced(2, 0.0, 1.0);
    c.z_star = Eigen::VectorXd::Constant(2, z);
    c.flags.assign(2, BoundaryFlag::interior);
    return c;
  };
  EXPECT_THROW(invert_boundary({curve(1.0, 0.0), curve(2.0, 0.5)}, g), DataError);
}
