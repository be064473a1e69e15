#pragma once

#include <vector>

#include "ratchet/dual.hpp"
#include "ratchet/grid.hpp"
#include "ratchet/market.hpp"
#include "ratchet/primal.hpp"
#include "ratchet/utility.hpp"

namespace ratchet {

/// Finite-horizon Merton value without the drawdown constraint, for U(c) = c^{1-gamma}/(1-gamma) and
/// U_T equal to U. V(x, t) = f(tau) x^{1-gamma}/(1-gamma) with df/dtau = A f + gamma f^{1-1/gamma},
/// f(0) = 1, A = (1-gamma)(r + kappa^2/(2 gamma)) - rho.
struct MertonModel {
  MarketParams p;
  double gamma = 0.5;

  double rate() const;                       ///< A
  /// f(tau) from the linear equation satisfied by f^{1/gamma}.
  double factor(double tau) const;
  double value(double x, double tau) const;
  double consumption(double x, double tau) const;  ///< x f^{-1/gamma}
  double stock(double x) const;                    ///< kappa x / (sigma gamma)
};

/// f(tau) by classical Runge-Kutta with step halving until successive results agree to `tol` relative.
double merton_factor_ode(const MertonModel& m, double tau, double tol = 1e-10);

/// Builds the Merton model from a kernel. Throws PreconditionError unless U is CRRA with gamma != 1
/// and U_T is the same utility.
MertonModel make_merton(const MarketParams& p, const UtilityKernel& k);

struct MertonReport {
  double max_rel_error = 0.0;   ///< numerical unconstrained value against the closed form
  double max_factor_gap = 0.0;  ///< closed form against the ODE oracle, relative
  double max_constrained_excess = 0.0;  ///< max of (V - V_merton) / (1 + |V_merton|) over the constrained probes
  int probes = 0;
};

/// Dual surface of the unconstrained problem: one slice holding the solution without the cap.
DualSurface unconstrained_surface(const MarketParams& p, const UtilityKernel& k, const Grid1D& grid);

/// Compares the unconstrained pipeline value with the closed form at wealths xs and tau nodes with
/// stride; if `constrained` is given, also checks that its value stays below the closed form.
MertonReport merton_reference(const MarketParams& p, const UtilityKernel& k, const Grid1D& grid,
                              const std::vector<double>& xs, int tau_stride, const PolicySurface* constrained = nullptr,
                              double h_hi = 1.0);

}  // namespace ratchet
