#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "ratchet/utility.hpp"

namespace ratchet {

/// Uniform grid in the log-marginal-utility coordinate z = ln y and in time-to-horizon tau.
struct Grid1D {
  double z_min = -8.0;
  double z_max = 6.0;
  int nz = 561;
  double dz = 0.025;
  int n_tau = 200;
  double d_tau = 0.005;
  double tau_max = 1.0;
  /// Required distance between the box edges and the analytic active band of every slice.
  double margin = 3.0;
  /// Width of the strip next to z_max excluded from reported quantities (Neumann layer).
  double collar = 1.5;

  static Grid1D make(double z_min, double z_max, int nz, int n_tau, double tau_max, double margin = 3.0,
                     double collar = 1.5);

  double z(int j) const { return z_min + j * dz; }
  double tau(int n) const { return n * d_tau; }
  /// Right end of the reporting window.
  double z_report_max() const { return z_max - collar; }
  /// Index of the last node inside the reporting window.
  int j_report_max() const;
  Eigen::VectorXd z_nodes() const;
  Eigen::VectorXd tau_nodes() const;
};

/// Throws PreconditionError unless [z_min, z_max] covers the band between ln U'(h_hi) and
/// ln U'(b h_lo) with `margin` to spare on each side.
void check_truncation(const Grid1D& grid, const UtilityKernel& k, double h_lo, double h_hi);

enum class HabitSpacing { geometric, uniform };

HabitSpacing parse_habit_spacing(const std::string& name);
std::string to_string(HabitSpacing s);

/// Strictly increasing habit levels from h_min to h_max inclusive.
std::vector<double> make_habit_grid(double h_min, double h_max, int count, HabitSpacing spacing);

}  // namespace ratchet
