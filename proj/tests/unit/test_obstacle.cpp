#include <array>
#include <cmath>

#include <gtest/gtest.h>

#include "ratchet/errors.hpp"
#include "ratchet/obstacle.hpp"
#include "ratchet/operator.hpp"

using namespace ratchet;

namespace {

MarketParams market() { return MarketParams::make(0.05, 0.1, 0.3, 0.1, 0.25, 1.0); }

UtilityKernel kernel() { return make_kernel(Utility(Crra{0.5}), Utility(Crra{0.5}), {}, 0.25); }

Grid1D small_grid() { return Grid1D::make(-8.0, 6.0, 141, 40, 1.0); }

}  // namespace

TEST(TOperator, ConstantsMapToMinusRho) {
  const Grid1D g = small_grid();
  Eigen::VectorXd out = discrete_T_operator(Eigen::VectorXd::Ones(g.nz), market(), g);
  EXPECT_LT((out.array() + market().rho).abs().maxCoeff(), 1e-13);
}

TEST(TOperator, ExponentialMapsToMinusRTimesItself) {
  const MarketParams p = market();
  for (int nz : {141, 281}) {
    const Grid1D g = Grid1D::make(-2.0, 2.0, nz, 10, 1.0);
    Eigen::VectorXd e = g.z_nodes().array().exp();
    Eigen::VectorXd out = discrete_T_operator(e, p, g);
    double err = 0.0;
    for (int j = 1; j + 1 < g.nz; ++j) err = std::max(err, std::abs(out[j] + p.r * e[j]) / e[j]);
    // Second order: the relative error is a fixed multiple of dz^2.
    EXPECT_LT(err, 0.5 * g.dz * g.dz) << "nz = " << nz;
  }
}

TEST(TOperator, IdentityMapsToAffine) {
  const MarketParams p = market();
  const Grid1D g = small_grid();
  Eigen::VectorXd out = discrete_T_operator(g.z_nodes(), p, g);
  const OperatorCoefficients c = operator_coefficients(p);
  for (int j = 1; j + 1 < g.nz; ++j) EXPECT_NEAR(out[j], c.drift - p.rho * g.z(j), 1e-12);
}

TEST(TOperator, LengthMismatchThrows) {
  EXPECT_THROW(discrete_T_operator(Eigen::VectorXd::Zero(5), market(), small_grid()), PreconditionError);
}

TEST(TOperator, MatrixMatchesStencil) {
  const Grid1D g = small_grid();
  Eigen::VectorXd u = g.z_nodes().array().sin();
  Eigen::VectorXd a = assemble_T_matrix(market(), g) * u;
  EXPECT_LT((a - discrete_T_operator(u, market(), g)).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Obstacle, ZeroSourceKeepsZero) {
  const Grid1D g = small_grid();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(g.nz);
  // The penalty holds the contact set at its noise floor rather than at exact zero.
  ObstacleSolution pen = solve_penalized(market(), g, 1.0, f, 1.0, {});
  EXPECT_GE(pen.w.minCoeff(), 0.0);
  EXPECT_LE(pen.w.maxCoeff(), pen.noise_floor);
  EXPECT_EQ(solve_complementarity(market(), g, 1.0, f).w.lpNorm<Eigen::Infinity>(), 0.0);
}

// Three nodes: w_0 = 0 by the Dirichlet row, unknowns w_1 and the Neumann node w_2. One implicit step
// is a two-variable complementarity problem, solved here by enumerating the four active sets.
TEST(Obstacle, ThreeNodeStepMatchesEnumeratedComplementarity) {
  const MarketParams p = market();
  const Grid1D g = Grid1D::make(-0.5, 0.5, 3, 1, 0.5, 0.0, 0.0);
  const OperatorCoefficients c = operator_coefficients(p);
  const double d = c.diffusion / (g.dz * g.dz), a = c.drift / (2.0 * g.dz), dt = g.d_tau;
  // A w + dt f with A the implicit matrix on (w_1, w_2); the ghost node w_3 = w_1 doubles the coupling.
  const double A11 = 1.0 + dt * (2.0 * d + p.rho), A12 = -dt * (d + a), A21 = -dt * 2.0 * d, A22 = A11;
  for (std::array<double, 2> f : {std::array<double, 2>{-1.0, 0.5}, {-1.0, -2.0}, {0.5, 0.5}, {0.3, -4.0}}) {
    Eigen::VectorXd src(3);
    src << 0.0, f[0], f[1];
    const double b1 = -dt * f[0], b2 = -dt * f[1];
    double w1 = 0.0, w2 = 0.0;
    int found = 0;
    for (int mask = 0; mask < 4; ++mask) {
      bool free1 = mask & 1, free2 = mask & 2;
      double x1 = 0.0, x2 = 0.0;
      if (free1 && free2) {
        double det = A11 * A22 - A12 * A21;
        x1 = (b1 * A22 - A12 * b2) / det;
        x2 = (A11 * b2 - A21 * b1) / det;
      } else if (free1) {
        x1 = b1 / A11;
      } else if (free2) {
        x2 = b2 / A22;
      }
      double r1 = A11 * x1 + A12 * x2 - b1, r2 = A21 * x1 + A22 * x2 - b2;
      bool ok = x1 >= 0.0 && x2 >= 0.0 && (free1 ? std::abs(r1) < 1e-14 : r1 >= -1e-14) &&
                (free2 ? std::abs(r2) < 1e-14 : r2 >= -1e-14);
      if (ok) {
        w1 = x1;
        w2 = x2;
        ++found;
      }
    }
    ASSERT_GE(found, 1);
    ObstacleSolution s = solve_complementarity(p, g, 1.0, src);
    EXPECT_EQ(s.w(0, 1), 0.0);
    EXPECT_NEAR(s.w(1, 1), w1, 1e-10);
    EXPECT_NEAR(s.w(2, 1), w2, 1e-10);
  }
}

TEST(Obstacle, ComplementarityResidualIsSmall) {
  const MarketParams p = market();
  const UtilityKernel k = kernel();
  const Grid1D g = small_grid();
  ObstacleSolution s = solve_complementarity(p, k, g, 1.0);
  EXPECT_LE(complementarity_residual(p, g, s, obstacle_source(k, g, 1.0)), 1e-8);
}

TEST(Obstacle, PenaltyTracksComplementarity) {
  const MarketParams p = market();
  const UtilityKernel k = kernel();
  const Grid1D g = small_grid();
  ObstacleSolution pen = solve_penalized(p, k, g, 1.0, {});
  ObstacleSolution lcp = solve_complementarity(p, k, g, 1.0);
  EXPECT_LE((pen.w - lcp.w).lpNorm<Eigen::Infinity>(), 5e-4);
  EXPECT_LE(pen.w.row(g.nz - 1).maxCoeff(), std::exp(g.z_max) / p.r + 1e-6);
}

TEST(Obstacle, SliceEstimatesHold) {
  const MarketParams p = market();
  const Grid1D g = small_grid();
  for (Scheme sc : {Scheme::penalty, Scheme::complementarity}) {
    ObstacleSolution s = sc == Scheme::penalty ? solve_penalized(p, kernel(), g, 1.0, {})
                                               : solve_complementarity(p, kernel(), g, 1.0);
    SliceReport r = check_slice(p, g, s);
    EXPECT_LE(r.negativity, 1e-7);
    EXPECT_LE(r.growth_excess, 1e-7);
    EXPECT_LE(r.z_decrease, 1e-7);
    EXPECT_LE(r.tau_decrease, 1e-7);
  }
}

TEST(Obstacle, NarrowBoxIsRejected) {
  const Grid1D g = Grid1D::make(-1.0, 1.0, 81, 10, 1.0);
  EXPECT_THROW(solve_penalized(market(), kernel(), g, 1.0, {}), PreconditionError);
}

TEST(Obstacle, NewtonFailureCarriesResidual) {
  PenaltyParams pen;
  pen.newton_max_iter = 1;
  pen.newton_tol = 1e-300;
  try {
    solve_penalized(market(), kernel(), small_grid(), 1.0, pen);
    FAIL() << "expected a scheme error";
  } catch (const SchemeError& e) {
    EXPECT_TRUE(std::isfinite(e.residual()));
  }
}

TEST(Sweep, SingleSliceMatchesDirectSolve) {
  const Grid1D g = small_grid();
  auto v = sweep_habit_slices(market(), kernel(), g, {1.0}, {});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ((v[0].w - solve_penalized(market(), kernel(), g, 1.0, {}).w).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(Sweep, AdjacentSlicesAreOrderedAndBounded) {
  const MarketParams p = market();
  const UtilityKernel k = kernel();
  const Grid1D g = small_grid();
  SweepOptions opt;
  opt.threads = 2;
  auto v = sweep_habit_slices(p, k, g, {0.8, 1.0, 1.25}, opt);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    HabitPairReport r = check_habit_pair(p, k, v[i], v[i + 1]);
    EXPECT_LE(r.monotonicity, 1e-6);
    EXPECT_LE(r.slope_excess, 1e-6);
    EXPECT_GT(r.bound, 0.0);
  }
}

TEST(Sweep, ResultsDoNotDependOnThreads) {
  const Grid1D g = small_grid();
  SweepOptions one, many;
  many.threads = 3;
  auto a = sweep_habit_slices(market(), kernel(), g, {0.5, 1.0, 2.0}, one);
  auto b = sweep_habit_slices(market(), kernel(), g, {0.5, 1.0, 2.0}, many);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ((a[i].w - b[i].w).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(Sweep, RejectsUnorderedHabits) {
  EXPECT_THROW(sweep_habit_slices(market(), kernel(), small_grid(), {1.0, 0.5}, {}), PreconditionError);
}
