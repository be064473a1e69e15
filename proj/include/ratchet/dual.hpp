#pragma once

#include <vector>

#include <Eigen/Core>

#include "ratchet/grid.hpp"
#include "ratchet/market.hpp"
#include "ratchet/obstacle.hpp"
#include "ratchet/utility.hpp"

namespace ratchet {

/// Dual value u(z, tau, h) per habit slice, with difference derivatives.
/// Each matrix has rows z and columns tau, matching Grid1D.
struct DualSurface {
  Grid1D grid;
  std::vector<double> h_grid;
  double h_bar = 0.0;
  std::vector<Eigen::MatrixXd> u, u_z, u_zz, u_tau;

  int slices() const { return static_cast<int>(h_grid.size()); }
  /// v_y = e^{-z} u_z
  double v_y(int j, int n, int k) const { return std::exp(-grid.z(j)) * u_z[k](j, n); }
  /// v_yy = e^{-2z} (u_zz - u_z)
  double v_yy(int j, int n, int k) const {
    return std::exp(-2.0 * grid.z(j)) * (u_zz[k](j, n) - u_z[k](j, n));
  }
};

/// Implicit Euler for u_tau - T u = source with u(tau = 0) = initial. Both end rows carry the
/// interior equation closed with one-sided differences. Returns rows z, columns tau.
Eigen::MatrixXd solve_linear_dual(const MarketParams& p, const Grid1D& grid, const Eigen::VectorXd& source,
                                  const Eigen::VectorXd& initial);

/// Capped problem: source hat_U(e^z, h_bar), initial data tilde_U_T(e^z).
Eigen::MatrixXd solve_capped_linear(const MarketParams& p, const UtilityKernel& k, const Grid1D& grid, double h_bar);

/// Problem without the drawdown constraint: source tilde_U(e^z), initial data tilde_U_T(e^z).
Eigen::MatrixXd solve_unconstrained(const MarketParams& p, const UtilityKernel& k, const Grid1D& grid);

/// Builds a surface from values per slice. The tau = 0 derivatives come from tilde_U_T.
DualSurface surface_from_values(const UtilityKernel& k, const Grid1D& grid, std::vector<double> h_grid, double h_bar,
                                std::vector<Eigen::MatrixXd> u);

/// Factorized implicit step of the linear dual equation, reused across sources.
class LinearDualSolver {
 public:
  LinearDualSolver(const MarketParams& p, const Grid1D& grid);
  ~LinearDualSolver();
  LinearDualSolver(const LinearDualSolver&) = delete;
  LinearDualSolver& operator=(const LinearDualSolver&) = delete;

  Eigen::MatrixXd solve(const Eigen::VectorXd& source, const Eigen::VectorXd& initial) const;

 private:
  struct Impl;
  Impl* impl_;
  Grid1D grid_;
};

enum class HabitQuadrature {
  trapezoid,  ///< trapezoid rule on w
  corrected,  ///< trapezoid rule plus the linear-part correction where w is clearly positive
};

/// Level of w above which the corrected rule applies its correction.
inline constexpr double default_continuation_level = 1e-5;

/// u(h) = phi + integral from h to h_bar of w over the slices.
/// The obstacle-free part of w solves a linear equation with source f, so its exact cell integral is
/// a difference of two capped solutions. The corrected rule adds that integral minus its trapezoid
/// value on nodes where w exceeds `level` at the lower end of the cell. Nodes near or in the contact
/// set keep the trapezoid value, which is exact where w vanishes.
DualSurface integrate_over_habit(const MarketParams& p, const UtilityKernel& k, const Grid1D& grid,
                                 const Eigen::MatrixXd& phi, const std::vector<ObstacleSolution>& sols,
                                 HabitQuadrature rule = HabitQuadrature::corrected,
                                 double level = default_continuation_level);

/// Surface point used by the cap and asymptote checks.
struct SurfaceProbe {
  int j;  ///< z node
  int n;  ///< tau node
  int k;  ///< habit slice
};

/// Probes on z nodes with e^z in [y_lo, y_hi], tau nodes with stride, slices with h <= h_hi.
std::vector<SurfaceProbe> make_probes(const DualSurface& s, double y_lo, double y_hi, double h_hi, int tau_stride);

struct CapReport {
  double h_bar = 0.0, h_bar_2x = 0.0;
  int extension_slices = 0;
  double min_gap = 0.0;       ///< min over probes of u^{h_bar_2x} - u^{h_bar}; negative means not monotone
  double max_gap = 0.0;
  double max_rel_gap = 0.0;   ///< max over probes of |gap| / |u^{h_bar}|
  double max_excess_over_unconstrained = 0.0;  ///< max over probes of u - u_bar
  Eigen::MatrixXd gap;        ///< u^{h_bar_2x}(h) - u^{h_bar}(h); independent of h
  Eigen::MatrixXd unconstrained;
};

/// Raises the cap from s.h_bar to h_bar_2x by solving extra slices above s.h_bar and the capped
/// problem at h_bar_2x; also solves the unconstrained problem.
CapReport cap_stability_check(const MarketParams& p, const UtilityKernel& k, const DualSurface& s, double h_bar_2x,
                              const std::vector<SurfaceProbe>& probes, const SweepOptions& opt,
                              HabitQuadrature rule = HabitQuadrature::corrected,
                              double level = default_continuation_level);

struct SlopeReport {
  double z_right = 0.0;
  double max_right_gap = 0.0;  ///< max over tau, h of |v_y(z_right) + b h (1 - e^{-r tau}) / r|
  double right_gap_at_T = 0.0; ///< same at tau = T, maximised over h
  double max_left_slope = 0.0; ///< max over tau > 0, h of v_y(z_min)
};

SlopeReport slope_asymptote_check(const DualSurface& s, const MarketParams& p);

/// Sign and residual checks of the assembled surface over the reporting window.
struct SurfaceReport {
  double min_convexity = 0.0;       ///< min of u_zz - u_z
  double max_v_y = 0.0;             ///< max of v_y (must stay negative)
  double max_habit_increase = 0.0;  ///< max of u(h_{k+1}) - u(h_k)
  /// |u_tau - T u - hat_U| / (1 + |hat_U|) where the whole stencil has w > level
  double max_continuation_residual = 0.0;
  double min_stopped_excess = 0.0;  ///< min of u_tau - T u - hat_U where w is at the scheme's contact level
};

SurfaceReport check_surface(const DualSurface& s, const MarketParams& p, const UtilityKernel& k,
                            const std::vector<ObstacleSolution>& sols, double level = default_continuation_level);

}  // namespace ratchet
