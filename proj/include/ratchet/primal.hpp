#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "ratchet/dual.hpp"
#include "ratchet/free_boundary.hpp"
#include "ratchet/market.hpp"
#include "ratchet/utility.hpp"

namespace ratchet {

/// Interpolated dual slope v_y and its y-derivative at one point.
struct DualSlope {
  double v_y = 0.0;
  double v_yy = 0.0;
};

/// Interpolant of a dual surface with v_y as the primary quantity: a monotone cubic in z on each node
/// column, linear in tau and in h. Node values of v_y use fourth-order z differences of u away from the
/// edges. The value v is the exact integral of that slope, shifted per column by the constant that best
/// matches u in relative terms on the reporting window. Built this way, V = v(I) + x I has V_x = I
/// exactly and -V_t equals the tau difference of v.
class DualInterpolant {
 public:
  explicit DualInterpolant(DualSurface s);

  const DualSurface& surface() const { return s_; }
  /// v_y and v_yy at (e^z, tau, h). Throws PreconditionError when h or tau leave the surface.
  DualSlope slope(double z, double tau, double h) const;
  /// v at (e^z, tau, h).
  double value(double z, double tau, double h) const;
  /// z = ln I(x, t, h): the root of v_y(e^z, tau, h) = -x on the reporting window.
  /// Throws DomainError at or below the wealth floor and TruncationError when the root leaves the window.
  double invert_log(const MarketParams& p, double x, double t, double h) const;
  /// I(x, t, h) = V_x, the marginal value of wealth.
  double invert(const MarketParams& p, double x, double t, double h) const;
  /// V(x, t, h) = v(I, tau, h) + x I.
  double primal_value(const MarketParams& p, double x, double t, double h) const;

 private:
  DualSurface s_;
  std::vector<Eigen::MatrixXd> G_;   ///< v_y on the nodes, per slice
  std::vector<Eigen::MatrixXd> dG_;  ///< limited z-slopes of v_y on the nodes
  std::vector<Eigen::MatrixXd> v_;   ///< v on the nodes, consistent with the slope
};

struct Thresholds {
  double x_L = 0.0;
  double x_H = 0.0;
  double x_star = 0.0;
};

enum class Region { low, medium, high, switching };
/// "LC", "MC", "HC" or "S".
std::string to_string(Region r);

struct Feedback {
  double pi = 0.0;     ///< amount held in the stock
  double c = 0.0;      ///< consumption rate
  double habit = 0.0;  ///< habit after the update; equals h outside the switching region
  Region region = Region::low;
};

/// Primal view of a dual surface: value, thresholds and feedback policies on demand.
class PolicySurface {
 public:
  PolicySurface(MarketParams p, UtilityKernel k, DualSurface s, const std::vector<BoundaryCurve>& curves);

  const MarketParams& params() const { return p_; }
  const UtilityKernel& kernel() const { return k_; }
  const DualSurface& dual() const { return d_.surface(); }
  const DualInterpolant& interp() const { return d_; }
  double h_min() const { return dual().h_grid.front(); }
  double h_max() const { return dual().h_grid.back(); }
  /// Calendar times t = T - tau on the tau nodes, in tau order.
  std::vector<double> t_grid() const;

  double floor(double t, double h) const { return p_.wealth_floor(h, p_.T - t); }
  double marginal(double x, double t, double h) const { return d_.invert(p_, x, t, h); }
  double value(double x, double t, double h) const { return d_.primal_value(p_, x, t, h); }

  /// Dual boundary z*(tau, h), linear in tau and h. At tau = 0 the limit ln U'(h) is used.
  double z_star(double tau, double h) const;
  /// The three wealth thresholds. Throws DataError when x_L < x_H <= x_star fails by more than one z cell.
  Thresholds thresholds(double t, double h) const;
  /// Habit level h' >= h with x_star(t, h') = x; h when x < x_star(t, h). Clamped to h_max.
  double updated_habit(double x, double t, double h) const;
  /// pi*, c* and the region label. In the switching region the policy of the updated habit is returned.
  Feedback feedback(double x, double t, double h) const;

 private:
  MarketParams p_;
  UtilityKernel k_;
  DualInterpolant d_;
  Eigen::MatrixXd z_star_;  ///< rows tau nodes, columns habit slices
};

/// Envelopes of the value function implied by the growth constants:
/// lower from the explicit subsolution in the dual, upper from the power supersolution of the
/// unconstrained dual problem.
struct ValueBounds {
  double lower = 0.0;
  double upper = 0.0;
  double lower_rate = 0.0;  ///< exponent of the lower envelope's power term
  double upper_rate = 0.0;  ///< exponent of the upper envelope
};
ValueBounds value_bounds(const MarketParams& p, const UtilityKernel& k, double x, double t, double h);

/// Terminal limits of the thresholds as t -> T.
Thresholds terminal_thresholds(const UtilityKernel& k, double h);

/// -V_t + (kappa^2/2) V_x^2 / V_xx - hat_U(V_x, h) - r x V_x + rho V by differences of V in x and t.
/// The t difference is a short forward step inside the current tau cell.
double hjb_residual(const PolicySurface& ps, double x, double t, double h);

/// Threshold table on every (tau node, habit slice) pair, tau nodes from 1.
struct ThresholdTable {
  std::vector<double> t, h, x_L, x_H, x_star;
};
ThresholdTable threshold_table(const PolicySurface& ps);

struct PrimalReport {
  double max_ordering_violation = 0.0;   ///< max of x_L - x_H and x_H - x_star (one-cell slack removed)
  double max_floor_violation = 0.0;      ///< max of floor - x_L
  double max_habit_decrease = 0.0;       ///< max decrease of any threshold from h to the next slice
  double max_round_trip = 0.0;           ///< max |v_y(I(x)) + x| / (1 + x)
  double max_marginal_mismatch = 0.0;    ///< max relative gap between a difference quotient of V and I
  double max_curvature_mismatch = 0.0;   ///< max relative gap between a difference quotient of I and -1/v_yy
  double max_hjb_residual = 0.0;         ///< max |HJB residual| / (1 + |V|)
  double max_bound_violation = 0.0;      ///< max of lower - V and V - upper
  double max_terminal_cells = 0.0;       ///< first-step distance to the terminal limits in z cells
  double min_pi = 0.0;
  double max_c_violation = 0.0;          ///< max distance of c* outside [b h, h]
  double max_concavity = 0.0;            ///< max of V second differences (must stay negative)
  double max_switching_slope = 0.0;      ///< max |V_h| in the switching region
  int probes = 0;
  int hjb_probes = 0;
};

/// Checks the primal reconstruction on a wealth ladder per (tau stride, habit slice with h <= h_hi).
/// HJB probes avoid a collar of `collar_cells` z cells around each threshold.
PrimalReport check_primal(const PolicySurface& ps, double h_hi, int tau_stride, int x_per_slice = 24,
                          int collar_cells = 3);

}  // namespace ratchet
