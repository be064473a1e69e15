#include "ratchet/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseLU>

#include "ratchet/errors.hpp"
#include "ratchet/free_boundary.hpp"
#include "ratchet/operator.hpp"

namespace ratchet {

struct LinearDualSolver::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

LinearDualSolver::LinearDualSolver(const MarketParams& p, const Grid1D& grid) : impl_(new Impl), grid_(grid) {
  check_monotone_stencil(operator_coefficients(p), grid.dz);
  Eigen::SparseMatrix<double> A = -grid.d_tau * assemble_T_matrix(p, grid);
  for (int j = 0; j < grid.nz; ++j) A.coeffRef(j, j) += 1.0;
  A.makeCompressed();
  impl_->lu.compute(A);
  if (impl_->lu.info() != Eigen::Success) {
    delete impl_;
    throw SchemeError("factorization of the implicit step matrix failed", 0.0);
  }
}

LinearDualSolver::~LinearDualSolver() { delete impl_; }

Eigen::MatrixXd LinearDualSolver::solve(const Eigen::VectorXd& source, const Eigen::VectorXd& initial) const {
  if (source.size() != grid_.nz || initial.size() != grid_.nz)
    throw PreconditionError("source or initial data length does not match grid node count");
  Eigen::MatrixXd u(grid_.nz, grid_.n_tau + 1);
  u.col(0) = initial;
  const Eigen::VectorXd forcing = grid_.d_tau * source;
  for (int n = 1; n <= grid_.n_tau; ++n) {
    u.col(n) = impl_->lu.solve(u.col(n - 1) + forcing);
    if (impl_->lu.info() != Eigen::Success) throw SchemeError("implicit step solve failed", 0.0);
  }
  return u;
}

Eigen::MatrixXd solve_linear_dual(const MarketParams& p, const Grid1D& grid, const Eigen::VectorXd& source,
                                  const Eigen::VectorXd& initial) {
  return LinearDualSolver(p, grid).solve(source, initial);
}

namespace {

Eigen::VectorXd terminal_dual(const UtilityKernel& k, const Grid1D& grid) {
  Eigen::VectorXd v(grid.nz);
  for (int j = 0; j < grid.nz; ++j) v[j] = tilde_U_T(k, std::exp(grid.z(j)));
  return v;
}

}  // namespace

Eigen::MatrixXd solve_capped_linear(const MarketParams& p, const UtilityKernel& k, const Grid1D& grid, double h_bar) {
  if (!(h_bar > 0.0)) throw PreconditionError("cap must be positive");
  Eigen::VectorXd src(grid.nz);
  for (int j = 0; j < grid.nz; ++j) src[j] = hat_U(k, std::exp(grid.z(j)), h_bar);
  return solve_linear_dual(p, grid, src, terminal_dual(k, grid));
}

Eigen::MatrixXd solve_unconstrained(const MarketParams& p, const UtilityKernel& k, const Grid1D& grid) {
  Eigen::VectorXd src(grid.nz);
  for (int j = 0; j < grid.nz; ++j) src[j] = tilde_U(k, std::exp(grid.z(j)));
  return solve_linear_dual(p, grid, src, terminal_dual(k, grid));
}

namespace {

void z_derivatives(const Eigen::MatrixXd& u, double dz, Eigen::MatrixXd& uz, Eigen::MatrixXd& uzz) {
  const Eigen::Index n = u.rows(), m = n - 1;
  uz.resize(u.rows(), u.cols());
  uzz.resize(u.rows(), u.cols());
  uz.middleRows(1, n - 2) = (u.bottomRows(n - 2) - u.topRows(n - 2)) / (2.0 * dz);
  uzz.middleRows(1, n - 2) = (u.bottomRows(n - 2) - 2.0 * u.middleRows(1, n - 2) + u.topRows(n - 2)) / (dz * dz);
  uz.row(0) = (-3.0 * u.row(0) + 4.0 * u.row(1) - u.row(2)) / (2.0 * dz);
  uzz.row(0) = (u.row(0) - 2.0 * u.row(1) + u.row(2)) / (dz * dz);
  uz.row(m) = (3.0 * u.row(m) - 4.0 * u.row(m - 1) + u.row(m - 2)) / (2.0 * dz);
  uzz.row(m) = (u.row(m) - 2.0 * u.row(m - 1) + u.row(m - 2)) / (dz * dz);
}

}  // namespace

DualSurface surface_from_values(const UtilityKernel& k, const Grid1D& grid, std::vector<double> h_grid, double h_bar,
                                std::vector<Eigen::MatrixXd> u) {
  if (u.size() != h_grid.size()) throw PreconditionError("one value array per habit slice required");
  DualSurface s;
  s.grid = grid;
  s.h_grid = std::move(h_grid);
  s.h_bar = h_bar;
  s.u = std::move(u);
  const int slices = s.slices();
  s.u_z.resize(slices);
  s.u_zz.resize(slices);
  s.u_tau.resize(slices);

  Eigen::VectorXd uz0(grid.nz), uzz0(grid.nz);
  for (int j = 0; j < grid.nz; ++j) {
    double y = std::exp(grid.z(j));
    double d1 = tilde_U_T_y(k, y), d2 = tilde_U_T_yy(k, y);
    uz0[j] = y * d1;
    uzz0[j] = y * d1 + y * y * d2;
  }
  for (int i = 0; i < slices; ++i) {
    const Eigen::MatrixXd& ui = s.u[i];
    if (ui.rows() != grid.nz || ui.cols() != grid.n_tau + 1) throw PreconditionError("value array does not match grid");
    z_derivatives(ui, grid.dz, s.u_z[i], s.u_zz[i]);
    s.u_z[i].col(0) = uz0;
    s.u_zz[i].col(0) = uzz0;
    Eigen::MatrixXd& ut = s.u_tau[i];
    ut.resize(grid.nz, grid.n_tau + 1);
    ut.rightCols(grid.n_tau) = (ui.rightCols(grid.n_tau) - ui.leftCols(grid.n_tau)) / grid.d_tau;
    ut.col(0) = ut.col(1);
  }
  return s;
}

namespace {

/// Cumulative habit integral of the slices from each level up to the top one, as in
/// integrate_over_habit, added onto `top`.
std::vector<Eigen::MatrixXd> accumulate_over_habit(const MarketParams& p, const UtilityKernel& k, const Grid1D& grid,
                                                   const Eigen::MatrixXd& top, const std::vector<ObstacleSolution>& sols,
                                                   HabitQuadrature rule, double level) {
  const std::size_t m = sols.size();
  std::vector<double> h(m);
  for (std::size_t i = 0; i < m; ++i) {
    h[i] = sols[i].h;
    if (sols[i].w.rows() != top.rows() || sols[i].w.cols() != top.cols())
      throw PreconditionError("obstacle slice does not match grid");
    if (i > 0 && !(h[i] > h[i - 1])) throw PreconditionError("habit slices must be increasing");
  }
  std::vector<Eigen::MatrixXd> u(m);
  u.back() = top;
  for (std::size_t i = m - 1; i-- > 0;) u[i] = u[i + 1] + 0.5 * (h[i + 1] - h[i]) * (sols[i].w + sols[i + 1].w);
  if (rule == HabitQuadrature::trapezoid || m < 2) return u;

  // Per cell, the trapezoid error of the obstacle-free part of w solves the linear equation with
  // source hat_U(h_i) - hat_U(h_{i+1}) + trapz f. It is removed where w exceeds `level` at the lower
  // end of the cell; elsewhere the plain rule is kept, since it is exact where w vanishes.
  LinearDualSolver solver(p, grid);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(grid.nz);
  Eigen::VectorXd f_next(grid.nz), f_here(grid.nz), defect(grid.nz);
  for (int j = 0; j < grid.nz; ++j) f_next[j] = f_source(k, grid.z(j), h[m - 1]);
  Eigen::MatrixXd carried = Eigen::MatrixXd::Zero(top.rows(), top.cols());
  for (std::size_t i = m - 1; i-- > 0;) {
    for (int j = 0; j < grid.nz; ++j) {
      double y = std::exp(grid.z(j));
      f_here[j] = f_source(k, grid.z(j), h[i]);
      defect[j] = hat_U(k, y, h[i]) - hat_U(k, y, h[i + 1]) + 0.5 * (h[i + 1] - h[i]) * (f_here[j] + f_next[j]);
    }
    Eigen::MatrixXd delta = solver.solve(defect, zero);
    carried += (sols[i].w.array() > level).select(delta, 0.0);
    u[i] += carried;
    std::swap(f_here, f_next);
  }
  return u;
}

}  // namespace

DualSurface integrate_over_habit(const MarketParams& p, const UtilityKernel& k, const Grid1D& grid,
                                 const Eigen::MatrixXd& phi, const std::vector<ObstacleSolution>& sols,
                                 HabitQuadrature rule, double level) {
  if (sols.empty()) throw PreconditionError("no obstacle slices to integrate");
  if (phi.rows() != grid.nz || phi.cols() != grid.n_tau + 1) throw PreconditionError("capped solution does not match grid");
  std::vector<Eigen::MatrixXd> u = accumulate_over_habit(p, k, grid, phi, sols, rule, level);
  std::vector<double> h(sols.size());
  for (std::size_t i = 0; i < sols.size(); ++i) h[i] = sols[i].h;
  double h_bar = h.back();
  return surface_from_values(k, grid, std::move(h), h_bar, std::move(u));
}

std::vector<SurfaceProbe> make_probes(const DualSurface& s, double y_lo, double y_hi, double h_hi, int tau_stride) {
  std::vector<SurfaceProbe> probes;
  const Grid1D& g = s.grid;
  int stride = std::max(1, tau_stride);
  for (int k = 0; k < s.slices(); ++k) {
    if (s.h_grid[k] > h_hi) continue;
    for (int n = stride; n <= g.n_tau; n += stride)
      for (int j = 0; j <= g.j_report_max(); ++j) {
        double y = std::exp(g.z(j));
        if (y >= y_lo && y <= y_hi) probes.push_back({j, n, k});
      }
  }
  return probes;
}

CapReport cap_stability_check(const MarketParams& p, const UtilityKernel& k, const DualSurface& s, double h_bar_2x,
                              const std::vector<SurfaceProbe>& probes, const SweepOptions& opt, HabitQuadrature rule,
                              double level) {
  const Grid1D& g = s.grid;
  const double h1 = s.h_bar;
  if (!(h_bar_2x >= h1)) throw PreconditionError("second cap must not lie below the first");
  CapReport rep;
  rep.h_bar = h1;
  rep.h_bar_2x = h_bar_2x;
  const Eigen::MatrixXd& phi1 = s.u.back();

  if (h_bar_2x == h1) {
    rep.gap = Eigen::MatrixXd::Zero(g.nz, g.n_tau + 1);
  } else {
    double ratio = s.slices() >= 2 ? s.h_grid.back() / s.h_grid[s.slices() - 2] : 2.0;
    int intervals = std::max(1, static_cast<int>(std::ceil(std::log(h_bar_2x / h1) / std::log(ratio) - 1e-9)));
    std::vector<double> ext = make_habit_grid(h1, h_bar_2x, intervals + 1, HabitSpacing::geometric);
    rep.extension_slices = intervals;
    std::vector<ObstacleSolution> sols = sweep_habit_slices(p, k, g, ext, opt);
    Eigen::MatrixXd phi2 = solve_capped_linear(p, k, g, h_bar_2x);
    rep.gap = accumulate_over_habit(p, k, g, phi2, sols, rule, level).front() - phi1;
  }
  rep.unconstrained = solve_unconstrained(p, k, g);

  rep.min_gap = std::numeric_limits<double>::infinity();
  rep.max_gap = -std::numeric_limits<double>::infinity();
  rep.max_excess_over_unconstrained = -std::numeric_limits<double>::infinity();
  for (const SurfaceProbe& q : probes) {
    double gap = rep.gap(q.j, q.n);
    double base = s.u[q.k](q.j, q.n);
    rep.min_gap = std::min(rep.min_gap, gap);
    rep.max_gap = std::max(rep.max_gap, gap);
    if (base != 0.0) rep.max_rel_gap = std::max(rep.max_rel_gap, std::abs(gap) / std::abs(base));
    rep.max_excess_over_unconstrained = std::max(rep.max_excess_over_unconstrained, base - rep.unconstrained(q.j, q.n));
  }
  if (probes.empty()) rep.min_gap = rep.max_gap = rep.max_excess_over_unconstrained = 0.0;
  return rep;
}

SlopeReport slope_asymptote_check(const DualSurface& s, const MarketParams& p) {
  const Grid1D& g = s.grid;
  SlopeReport rep;
  const int jr = g.j_report_max();
  rep.z_right = g.z(jr);
  rep.max_left_slope = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < s.slices(); ++k) {
    for (int n = 0; n <= g.n_tau; ++n) {
      double asymptote = -p.b * s.h_grid[k] * p.annuity(g.tau(n));
      double gap = std::abs(s.v_y(jr, n, k) - asymptote);
      rep.max_right_gap = std::max(rep.max_right_gap, gap);
      if (n == g.n_tau) rep.right_gap_at_T = std::max(rep.right_gap_at_T, gap);
      rep.max_left_slope = std::max(rep.max_left_slope, s.v_y(0, n, k));
    }
  }
  return rep;
}

SurfaceReport check_surface(const DualSurface& s, const MarketParams& p, const UtilityKernel& k,
                            const std::vector<ObstacleSolution>& sols, double level) {
  const Grid1D& g = s.grid;
  const OperatorCoefficients c = operator_coefficients(p);
  SurfaceReport rep;
  rep.min_convexity = std::numeric_limits<double>::infinity();
  rep.max_v_y = -std::numeric_limits<double>::infinity();
  rep.min_stopped_excess = std::numeric_limits<double>::infinity();
  const int jr = g.j_report_max();
  for (int i = 0; i < s.slices(); ++i) {
    const double h = s.h_grid[i];
    const double zero_tol = i < static_cast<int>(sols.size()) ? default_zero_tol(sols[i]) : 0.0;
    for (int n = 0; n <= g.n_tau; ++n) {
      for (int j = 0; j <= jr; ++j) {
        rep.min_convexity = std::min(rep.min_convexity, s.u_zz[i](j, n) - s.u_z[i](j, n));
        rep.max_v_y = std::max(rep.max_v_y, s.v_y(j, n, i));
        if (i + 1 < s.slices()) rep.max_habit_increase = std::max(rep.max_habit_increase, s.u[i + 1](j, n) - s.u[i](j, n));
        if (n == 0 || j == 0 || i >= static_cast<int>(sols.size())) continue;
        double src = hat_U(k, std::exp(g.z(j)), h);
        double lhs = s.u_tau[i](j, n) - (c.diffusion * s.u_zz[i](j, n) + c.drift * s.u_z[i](j, n) - c.discount * s.u[i](j, n));
        const Eigen::MatrixXd& w = sols[i].w;
        if (w(j - 1, n) > level && w(j, n - 1) > level)
          rep.max_continuation_residual = std::max(rep.max_continuation_residual, std::abs(lhs - src) / (1.0 + std::abs(src)));
        else if (w(j, n) <= zero_tol)
          rep.min_stopped_excess = std::min(rep.min_stopped_excess, lhs - src);
      }
    }
  }
  if (!std::isfinite(rep.min_stopped_excess)) rep.min_stopped_excess = 0.0;
  return rep;
}

}  // namespace ratchet
