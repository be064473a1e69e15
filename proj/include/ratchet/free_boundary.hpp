#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ratchet/grid.hpp"
#include "ratchet/obstacle.hpp"

namespace ratchet {

enum class BoundaryFlag : std::uint8_t {
  interior,    ///< contact set and continuation set both present
  degenerate,  ///< w vanishes on the whole box; z* reported as z_max
  exited,      ///< w positive on the whole box; z* reported as z_min
};

/// z*(tau, h) per time node for one habit slice.
struct BoundaryCurve {
  double h = 0.0;
  Eigen::VectorXd tau_nodes;
  Eigen::VectorXd z_star;
  std::vector<BoundaryFlag> flags;
};

/// Contact threshold used when none is given: the level below which the scheme cannot tell a node
/// from contact (epsilon for the penalty scheme, zero for the complementarity scheme).
double default_zero_tol(const ObstacleSolution& sol);

/// Largest z with w <= zero_tol per time node, refined linearly against the next node.
/// Throws DataError when w decreases in z by more than mono_tol.
BoundaryCurve extract_boundary(const ObstacleSolution& sol, const Grid1D& grid, double zero_tol,
                               double mono_tol = 1e-7);

/// h*(z, tau) = sup{h : w(z, tau, h) = 0} on the (z, tau) grid; 0 where z >= z*(tau, h_min).
/// Saturates at the largest habit level for z < z*(tau, h_max).
struct InverseBoundary {
  Eigen::VectorXd z_nodes;
  Eigen::VectorXd tau_nodes;
  Eigen::MatrixXd h_star;  ///< rows z, columns tau
};

/// h*(z, tau_n) from boundary values ordered by increasing habit; piecewise linear in h.
double inverse_boundary_at(const std::vector<double>& h, const std::vector<double>& z_star, double z);

/// Throws DataError when consecutive curves cross by more than one cell.
InverseBoundary invert_boundary(const std::vector<BoundaryCurve>& curves, const Grid1D& grid);

/// Boundary diagnostics against the analytic bounds.
struct BoundaryReport {
  double max_above_limit = 0.0;     ///< max over interior nodes of z* - ln U'(h)
  double max_tau_increase = 0.0;    ///< max over interior nodes of z*(tau_{n+1}) - z*(tau_n)
  double max_habit_increase = 0.0;  ///< max over adjacent slices of z*(tau, h') - z*(tau, h)
  double max_first_step_gap = 0.0;  ///< max over slices of |z*(d_tau, h) - ln U'(h)|
  int flagged_nodes = 0;            ///< degenerate or exited nodes with tau > 0
};
BoundaryReport check_boundaries(const std::vector<BoundaryCurve>& curves, const UtilityKernel& k);

}  // namespace ratchet
