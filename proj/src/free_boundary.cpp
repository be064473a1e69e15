#include "ratchet/free_boundary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ratchet/errors.hpp"

namespace ratchet {

double default_zero_tol(const ObstacleSolution& sol) { return sol.noise_floor; }

BoundaryCurve extract_boundary(const ObstacleSolution& sol, const Grid1D& grid, double zero_tol, double mono_tol) {
  if (sol.w.rows() != grid.nz || sol.w.cols() != grid.n_tau + 1)
    throw PreconditionError("obstacle solution does not match the grid");
  BoundaryCurve c;
  c.h = sol.h;
  c.tau_nodes = grid.tau_nodes();
  c.z_star.resize(grid.n_tau + 1);
  c.flags.resize(grid.n_tau + 1);
  for (int n = 0; n <= grid.n_tau; ++n) {
    auto w = sol.w.col(n);
    int last = -1;
    for (int j = 0; j < grid.nz; ++j) {
      if (j + 1 < grid.nz && w[j + 1] - w[j] < -mono_tol) {
        std::ostringstream os;
        os << "w decreases in z at tau node " << n << ", z = " << grid.z(j) << " (h = " << sol.h << ")";
        throw DataError(os.str());
      }
      if (w[j] <= zero_tol) last = j;
    }
    if (last < 0) {
      c.z_star[n] = grid.z_min;
      c.flags[n] = BoundaryFlag::exited;
    } else if (last == grid.nz - 1) {
      c.z_star[n] = grid.z_max;
      c.flags[n] = BoundaryFlag::degenerate;
    } else {
      double rise = w[last + 1] - w[last];
      double frac = rise > 0.0 ? std::clamp((zero_tol - w[last]) / rise, 0.0, 1.0) : 0.0;
      c.z_star[n] = grid.z(last) + frac * grid.dz;
      c.flags[n] = BoundaryFlag::interior;
    }
  }
  return c;
}

double inverse_boundary_at(const std::vector<double>& h, const std::vector<double>& z_star, double z) {
  const std::size_t m = h.size();
  if (z >= z_star.front()) return 0.0;
  if (z < z_star.back()) return h.back();
  std::size_t k = m - 1;
  while (k > 0 && !(z_star[k] > z)) --k;
  // z_star[k] > z >= z_star[k + 1]
  double span = z_star[k] - z_star[k + 1];
  if (span <= 0.0) return h[k + 1];
  return h[k] + (h[k + 1] - h[k]) * (z_star[k] - z) / span;
}

InverseBoundary invert_boundary(const std::vector<BoundaryCurve>& curves, const Grid1D& grid) {
  if (curves.empty()) throw PreconditionError("no boundary curves to invert");
  std::vector<double> h(curves.size());
  for (std::size_t i = 0; i < curves.size(); ++i) {
    h[i] = curves[i].h;
    if (curves[i].z_star.size() != grid.n_tau + 1) throw PreconditionError("boundary curve does not match the grid");
    if (i > 0 && !(h[i] > h[i - 1])) throw PreconditionError("boundary curves must have increasing habit levels");
  }
  InverseBoundary inv;
  inv.z_nodes = grid.z_nodes();
  inv.tau_nodes = grid.tau_nodes();
  inv.h_star.resize(grid.nz, grid.n_tau + 1);
  std::vector<double> zs(curves.size());
  for (int n = 0; n <= grid.n_tau; ++n) {
    for (std::size_t i = 0; i < curves.size(); ++i) {
      zs[i] = curves[i].z_star[n];
      if (i > 0 && zs[i] > zs[i - 1] + grid.dz * (1.0 + 1e-9)) {
        std::ostringstream os;
        os << "boundary curves cross at tau node " << n << " between h = " << h[i - 1] << " and h = " << h[i];
        throw DataError(os.str());
      }
    }
    for (int j = 0; j < grid.nz; ++j) inv.h_star(j, n) = inverse_boundary_at(h, zs, grid.z(j));
  }
  return inv;
}

BoundaryReport check_boundaries(const std::vector<BoundaryCurve>& curves, const UtilityKernel& k) {
  BoundaryReport rep;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const BoundaryCurve& c = curves[i];
    double limit = std::log(k.U.marginal(c.h));
    const Eigen::Index n_nodes = c.z_star.size();
    for (Eigen::Index n = 1; n < n_nodes; ++n) {
      if (c.flags[n] != BoundaryFlag::interior) {
        ++rep.flagged_nodes;
        continue;
      }
      rep.max_above_limit = std::max(rep.max_above_limit, c.z_star[n] - limit);
      if (n + 1 < n_nodes && c.flags[n + 1] == BoundaryFlag::interior)
        rep.max_tau_increase = std::max(rep.max_tau_increase, c.z_star[n + 1] - c.z_star[n]);
      if (i > 0 && curves[i - 1].flags[n] == BoundaryFlag::interior)
        rep.max_habit_increase = std::max(rep.max_habit_increase, c.z_star[n] - curves[i - 1].z_star[n]);
    }
    if (n_nodes > 1 && c.flags[1] == BoundaryFlag::interior)
      rep.max_first_step_gap = std::max(rep.max_first_step_gap, std::abs(c.z_star[1] - limit));
  }
  return rep;
}

}  // namespace ratchet
