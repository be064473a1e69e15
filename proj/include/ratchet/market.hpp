#pragma once

namespace ratchet {

/// Market and preference constants of the consumption/investment problem.
struct MarketParams {
  double r = 0.05;      ///< riskless rate
  double mu = 0.1;      ///< stock drift
  double sigma = 0.3;   ///< stock volatility
  double rho = 0.1;     ///< subjective discount rate
  double b = 0.25;      ///< drawdown fraction: consumption never below b times the running maximum
  double T = 1.0;       ///< horizon
  double kappa = 0.0;   ///< market price of risk, (mu - r) / sigma

  /// Validated constructor. Throws ConfigError naming the offending field.
  static MarketParams make(double r, double mu, double sigma, double rho, double b, double T);

  /// Recomputes kappa and checks every invariant.
  void validate() const;

  double half_kappa_sq() const { return 0.5 * kappa * kappa; }

  /// Present value of a unit consumption stream over a horizon tau, (1 - e^{-r tau}) / r.
  double annuity(double tau) const;

  /// Wealth floor b h (1 - e^{-r tau}) / r needed to finance consumption b h until the horizon.
  double wealth_floor(double h, double tau) const { return b * h * annuity(tau); }
};

}  // namespace ratchet
