#include "ratchet/market.hpp"

#include <cmath>

#include "ratchet/errors.hpp"

namespace ratchet {

MarketParams MarketParams::make(double r, double mu, double sigma, double rho, double b, double T) {
  MarketParams p;
  p.r = r;
  p.mu = mu;
  p.sigma = sigma;
  p.rho = rho;
  p.b = b;
  p.T = T;
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("market.sigma", "must be positive");
  p.kappa = (mu - r) / sigma;
  p.validate();
  return p;
}

void MarketParams::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(r) || r < 0.0) throw ConfigError("market.r", "must be nonnegative and finite");
  if (!finite(mu)) throw ConfigError("market.mu", "must be finite");
  if (!finite(sigma) || !(sigma > 0.0)) throw ConfigError("market.sigma", "must be positive");
  if (!(mu > r)) throw ConfigError("market.mu", "must exceed market.r");
  if (!finite(rho) || !(rho > 0.0)) throw ConfigError("market.rho", "must be positive and finite");
  if (!finite(b) || b < 0.0 || b > 1.0) throw ConfigError("market.b", "must lie in [0, 1]");
  if (!finite(T) || !(T > 0.0)) throw ConfigError("market.T", "must be positive and finite");
  if (kappa != (mu - r) / sigma) throw ConfigError("market.kappa", "does not match (mu - r) / sigma");
}

double MarketParams::annuity(double tau) const {
  if (r == 0.0) return tau;
  return -std::expm1(-r * tau) / r;
}

}  // namespace ratchet
