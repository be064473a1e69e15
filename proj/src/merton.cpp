#include "ratchet/merton.hpp"

#include <algorithm>
#include <cmath>

#include "ratchet/errors.hpp"

namespace ratchet {

double MertonModel::rate() const {
  return (1.0 - gamma) * (p.r + p.kappa * p.kappa / (2.0 * gamma)) - p.rho;
}

double MertonModel::factor(double tau) const {
  const double a = rate() / gamma;
  // g = f^{1/gamma} solves dg/dtau = a g + 1, g(0) = 1.
  double g = std::abs(a) * tau < 1e-12 ? 1.0 + tau : std::exp(a * tau) + std::expm1(a * tau) / a;
  return std::pow(g, gamma);
}

double MertonModel::value(double x, double tau) const {
  return factor(tau) * std::pow(x, 1.0 - gamma) / (1.0 - gamma);
}

double MertonModel::consumption(double x, double tau) const { return x * std::pow(factor(tau), -1.0 / gamma); }

double MertonModel::stock(double x) const { return p.kappa * x / (p.sigma * gamma); }

double merton_factor_ode(const MertonModel& m, double tau, double tol) {
  const double A = m.rate(), ga = m.gamma;
  auto rhs = [&](double f) { return A * f + ga * std::pow(f, 1.0 - 1.0 / ga); };
  auto integrate = [&](int steps) {
    double f = 1.0, dt = tau / steps;
    for (int i = 0; i < steps; ++i) {
      double k1 = rhs(f), k2 = rhs(f + 0.5 * dt * k1), k3 = rhs(f + 0.5 * dt * k2), k4 = rhs(f + dt * k3);
      f += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return f;
  };
  if (tau == 0.0) return 1.0;
  int steps = 16;
  double prev = integrate(steps);
  for (int level = 0; level < 20; ++level) {
    steps *= 2;
    double next = integrate(steps);
    if (std::abs(next - prev) <= tol * std::abs(next)) return next;
    prev = next;
  }
  throw SchemeError("Merton factor integration did not reach the requested tolerance", 0.0);
}

MertonModel make_merton(const MarketParams& p, const UtilityKernel& k) {
  if (!k.U.is_crra() || !k.U_T.is_crra()) throw PreconditionError("the Merton reference needs CRRA utilities");
  double g = k.U.crra_gamma();
  if (g == 1.0 || k.U_T.crra_gamma() != g) throw PreconditionError("the Merton reference needs U_T = U with gamma != 1");
  return {p, g};
}

DualSurface unconstrained_surface(const MarketParams& p, const UtilityKernel& k, const Grid1D& grid) {
  std::vector<Eigen::MatrixXd> u{solve_unconstrained(p, k, grid)};
  return surface_from_values(k, grid, {1.0}, 1.0, std::move(u));
}

MertonReport merton_reference(const MarketParams& p, const UtilityKernel& k, const Grid1D& grid,
                              const std::vector<double>& xs, int tau_stride, const PolicySurface* constrained,
                              double h_hi) {
  MertonModel m = make_merton(p, k);
  MarketParams free = p;
  free.b = 0.0;
  const DualInterpolant d(unconstrained_surface(free, k, grid));
  MertonReport rep;
  const int stride = std::max(1, tau_stride);
  for (int n = stride; n <= grid.n_tau; n += stride) {
    const double tau = grid.tau(n), t = p.T - tau;
    double f = m.factor(tau);
    rep.max_factor_gap = std::max(rep.max_factor_gap, std::abs(merton_factor_ode(m, tau) - f) / f);
    for (double x : xs) {
      double exact = m.value(x, tau);
      double numeric = d.primal_value(free, x, t, 1.0);
      rep.max_rel_error = std::max(rep.max_rel_error, std::abs(numeric - exact) / std::abs(exact));
      ++rep.probes;
      if (!constrained) continue;
      for (double h : constrained->dual().h_grid) {
        if (h > h_hi || !(x > constrained->floor(t, h))) continue;
        double V = constrained->value(x, t, h);
        rep.max_constrained_excess = std::max(rep.max_constrained_excess, (V - exact) / (1.0 + std::abs(exact)));
      }
    }
  }
  return rep;
}

}  // namespace ratchet
