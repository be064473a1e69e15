#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "ratchet/grid.hpp"
#include "ratchet/market.hpp"
#include "ratchet/utility.hpp"

namespace ratchet {

struct PenaltyParams {
  double epsilon = 1e-6;
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
};

struct ComplementarityParams {
  double tol = 1e-10;
  int max_iter = 100000;
  double omega = 0.0;  ///< relaxation factor; 0 selects the optimal factor of the constant-coefficient stencil
};

/// Smooth penalty beta(x) = -scale * q((eps - x) / eps) with q(s) = s^3 on [0, 1] and 0 for s <= 0.
/// Continued as a cubic below zero. C2, nonpositive, nondecreasing, concave, beta(0) = -scale.
struct PenaltyFunction {
  double scale;
  double epsilon;

  double value(double x) const {
    if (x >= epsilon) return 0.0;
    double s = (epsilon - x) / epsilon;
    return -scale * s * s * s;
  }
  double slope(double x) const {
    if (x >= epsilon) return 0.0;
    double s = (epsilon - x) / epsilon;
    return 3.0 * scale * s * s / epsilon;
  }
  double curvature(double x) const {
    if (x >= epsilon) return 0.0;
    double s = (epsilon - x) / epsilon;
    return -6.0 * scale * s / (epsilon * epsilon);
  }
};

enum class Scheme { penalty, complementarity };
std::string to_string(Scheme s);

/// Discrete w on one habit slice. Column n of `w` holds the slice at tau = n * d_tau.
struct ObstacleSolution {
  double h = 0.0;
  Eigen::MatrixXd w;
  Scheme scheme = Scheme::penalty;
  /// Size of values the scheme leaves on the contact set (epsilon for the penalty scheme).
  double noise_floor = 0.0;
  int max_iterations = 0;  ///< largest inner iteration count over all steps
};

/// Source f(z_j, h) sampled on the grid.
Eigen::VectorXd obstacle_source(const UtilityKernel& k, const Grid1D& grid, double h);

/// Penalized implicit scheme. Checks truncation and stencil monotonicity first.
ObstacleSolution solve_penalized(const MarketParams& p, const UtilityKernel& k, const Grid1D& grid, double h,
                                 const PenaltyParams& pen);
/// Same scheme with an explicit source and penalty scale; no truncation check.
ObstacleSolution solve_penalized(const MarketParams& p, const Grid1D& grid, double h, const Eigen::VectorXd& source,
                                 double penalty_scale, const PenaltyParams& pen);

/// Projected SOR on the discrete complementarity problem at every implicit step.
ObstacleSolution solve_complementarity(const MarketParams& p, const UtilityKernel& k, const Grid1D& grid, double h,
                                       const ComplementarityParams& cp = {});
ObstacleSolution solve_complementarity(const MarketParams& p, const Grid1D& grid, double h,
                                       const Eigen::VectorXd& source, const ComplementarityParams& cp = {});

/// Max-norm of min(A w_new - w_old + d_tau f, w_new) over all steps: the complementarity residual.
double complementarity_residual(const MarketParams& p, const Grid1D& grid, const ObstacleSolution& sol,
                                const Eigen::VectorXd& source);

struct SweepOptions {
  Scheme scheme = Scheme::penalty;
  PenaltyParams penalty;
  ComplementarityParams complementarity;
  int threads = 1;
};

/// Independent solves over an increasing habit grid, dispatched to `threads` workers.
std::vector<ObstacleSolution> sweep_habit_slices(const MarketParams& p, const UtilityKernel& k, const Grid1D& grid,
                                                 const std::vector<double>& h_grid, const SweepOptions& opt);

/// Largest violations of the single-slice estimates. Values are positive when violated.
struct SliceReport {
  double negativity = 0.0;      ///< max(-w)
  double growth_excess = 0.0;   ///< max(w - e^z / r - epsilon)
  double z_decrease = 0.0;      ///< max(-(w_{j+1} - w_j))
  double tau_decrease = 0.0;    ///< max(-(w^{n+1} - w^n))
};
SliceReport check_slice(const MarketParams& p, const Grid1D& grid, const ObstacleSolution& sol);

/// Largest violations of the adjacent-slice estimates.
struct HabitPairReport {
  double monotonicity = 0.0;  ///< max(w(h) - w(h'))
  double slope_excess = 0.0;  ///< max((w(h') - w(h)) / (h' - h) - bound)
  double bound = 0.0;
};
/// Upper bound on the habit derivative of w between h and h', evaluated at both endpoints.
double habit_slope_bound(const MarketParams& p, const UtilityKernel& k, double h, double h_next);
HabitPairReport check_habit_pair(const MarketParams& p, const UtilityKernel& k, const ObstacleSolution& lo,
                                 const ObstacleSolution& hi);

}  // namespace ratchet
