#include "ratchet/grid.hpp"

#include <cmath>
#include <sstream>

#include "ratchet/errors.hpp"

namespace ratchet {

Grid1D Grid1D::make(double z_min, double z_max, int nz, int n_tau, double tau_max, double margin, double collar) {
  if (!std::isfinite(z_min) || !std::isfinite(z_max) || !(z_max > z_min))
    throw ConfigError("grid.z_max", "must exceed grid.z_min");
  if (nz < 3) throw ConfigError("grid.nz", "must be at least 3");
  if (n_tau < 1) throw ConfigError("grid.n_tau", "must be at least 1");
  if (!(tau_max > 0.0)) throw ConfigError("market.T", "must be positive");
  if (!(margin >= 0.0)) throw ConfigError("grid.margin", "must be nonnegative");
  if (!(collar >= 0.0) || collar >= z_max - z_min) throw ConfigError("grid.collar", "must lie in [0, z_max - z_min)");
  Grid1D g;
  g.z_min = z_min;
  g.z_max = z_max;
  g.nz = nz;
  g.dz = (z_max - z_min) / (nz - 1);
  g.n_tau = n_tau;
  g.tau_max = tau_max;
  g.d_tau = tau_max / n_tau;
  g.margin = margin;
  g.collar = collar;
  return g;
}

int Grid1D::j_report_max() const {
  return static_cast<int>(std::floor((z_report_max() - z_min) / dz + 1e-9));
}

Eigen::VectorXd Grid1D::z_nodes() const {
  Eigen::VectorXd z(nz);
  for (int j = 0; j < nz; ++j) z[j] = this->z(j);
  return z;
}

Eigen::VectorXd Grid1D::tau_nodes() const {
  Eigen::VectorXd t(n_tau + 1);
  for (int n = 0; n <= n_tau; ++n) t[n] = tau(n);
  return t;
}

void check_truncation(const Grid1D& grid, const UtilityKernel& k, double h_lo, double h_hi) {
  double left = std::log(k.U.marginal(h_hi));
  double y_right = k.b > 0.0 ? k.U.marginal(k.b * h_lo) : k.U.marginal_at_zero();
  double right = std::isfinite(y_right) ? std::log(y_right) : std::log(k.U.marginal(h_lo));
  std::ostringstream os;
  if (grid.z_min > left - grid.margin) {
    os << "grid too narrow: z_min = " << grid.z_min << " must lie below ln U'(h) - margin = " << left - grid.margin;
    throw PreconditionError(os.str());
  }
  if (grid.z_max < right + grid.margin) {
    os << "grid too narrow: z_max = " << grid.z_max << " must exceed ln U'(b h) + margin = " << right + grid.margin;
    throw PreconditionError(os.str());
  }
}

HabitSpacing parse_habit_spacing(const std::string& name) {
  if (name == "geometric") return HabitSpacing::geometric;
  if (name == "uniform") return HabitSpacing::uniform;
  throw ConfigError("grid.habit.spacing", "must be \"geometric\" or \"uniform\"");
}

std::string to_string(HabitSpacing s) { return s == HabitSpacing::geometric ? "geometric" : "uniform"; }

std::vector<double> make_habit_grid(double h_min, double h_max, int count, HabitSpacing spacing) {
  if (!(h_min > 0.0)) throw ConfigError("grid.habit.min", "must be positive");
  if (count < 1) throw ConfigError("grid.habit.count", "must be at least 1");
  if (count == 1) return {h_max};
  if (!(h_max > h_min)) throw ConfigError("grid.habit.max", "cap must exceed grid.habit.min");
  std::vector<double> h(count);
  for (int i = 0; i < count; ++i) {
    double s = static_cast<double>(i) / (count - 1);
    h[i] = spacing == HabitSpacing::geometric ? h_min * std::pow(h_max / h_min, s) : h_min + s * (h_max - h_min);
  }
  h.front() = h_min;
  h.back() = h_max;
  return h;
}

}  // namespace ratchet
