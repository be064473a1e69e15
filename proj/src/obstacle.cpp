#include "ratchet/obstacle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "ratchet/errors.hpp"
#include "ratchet/operator.hpp"

namespace ratchet {

std::string to_string(Scheme s) { return s == Scheme::penalty ? "penalty" : "complementarity"; }

namespace {

/// Tridiagonal matrix I - d_tau T on the unknown nodes 1..nz-1, with w_0 = 0 eliminated and the
/// Neumann ghost value w_nz = w_{nz-2} folded into the last row.
struct StepMatrix {
  Eigen::VectorXd lower, diag, upper;
};

StepMatrix step_matrix(const MarketParams& p, const Grid1D& grid) {
  OperatorCoefficients c = operator_coefficients(p);
  check_monotone_stencil(c, grid.dz);
  Stencil s = interior_stencil(c, grid.dz);
  const int m = grid.nz - 1;
  const double dt = grid.d_tau;
  StepMatrix a{Eigen::VectorXd::Constant(m, -dt * s.lower), Eigen::VectorXd::Constant(m, 1.0 - dt * s.centre),
               Eigen::VectorXd::Constant(m, -dt * s.upper)};
  a.lower[0] = 0.0;
  a.lower[m - 1] = -dt * (s.lower + s.upper);
  a.upper[m - 1] = 0.0;
  return a;
}

Eigen::VectorXd apply(const StepMatrix& a, const Eigen::VectorXd& x) {
  const Eigen::Index m = x.size();
  Eigen::VectorXd y = a.diag.cwiseProduct(x);
  for (Eigen::Index i = 1; i < m; ++i) y[i] += a.lower[i] * x[i - 1];
  for (Eigen::Index i = 0; i + 1 < m; ++i) y[i] += a.upper[i] * x[i + 1];
  return y;
}

void check_source(const Grid1D& grid, const Eigen::VectorXd& source) {
  if (source.size() != grid.nz) throw PreconditionError("source length does not match grid node count");
}

}  // namespace

Eigen::VectorXd obstacle_source(const UtilityKernel& k, const Grid1D& grid, double h) {
  Eigen::VectorXd f(grid.nz);
  for (int j = 0; j < grid.nz; ++j) f[j] = f_source(k, grid.z(j), h);
  return f;
}

ObstacleSolution solve_penalized(const MarketParams& p, const UtilityKernel& k, const Grid1D& grid, double h,
                                 const PenaltyParams& pen) {
  check_truncation(grid, k, h, h);
  return solve_penalized(p, grid, h, obstacle_source(k, grid, h), k.U.marginal(h), pen);
}

ObstacleSolution solve_penalized(const MarketParams& p, const Grid1D& grid, double h, const Eigen::VectorXd& source,
                                 double penalty_scale, const PenaltyParams& pen) {
  check_source(grid, source);
  if (!(pen.epsilon > 0.0)) throw ConfigError("penalty.epsilon", "must be positive");
  if (!(pen.newton_tol > 0.0)) throw ConfigError("penalty.newton_tol", "must be positive");
  if (pen.newton_max_iter < 1) throw ConfigError("penalty.newton_max_iter", "must be at least 1");
  const StepMatrix a = step_matrix(p, grid);
  const PenaltyFunction beta{penalty_scale, pen.epsilon};
  const int m = grid.nz - 1;
  const double dt = grid.d_tau;
  const Eigen::VectorXd f = source.tail(m);

  ObstacleSolution sol;
  sol.h = h;
  sol.scheme = Scheme::penalty;
  sol.noise_floor = pen.epsilon;
  sol.w = Eigen::MatrixXd::Zero(grid.nz, grid.n_tau + 1);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(m), rhs(m), residual(m), jac(m), pen_val(m);
  for (int n = 1; n <= grid.n_tau; ++n) {
    rhs = sol.w.col(n - 1).tail(m) - dt * f;
    int it = 0;
    double step = std::numeric_limits<double>::infinity();
    while (step > pen.newton_tol) {
      if (it == pen.newton_max_iter) {
        std::ostringstream os;
        os << "penalty Newton did not converge at tau step " << n << " for h = " << h;
        throw SchemeError(os.str(), residual.lpNorm<Eigen::Infinity>());
      }
      for (int i = 0; i < m; ++i) {
        pen_val[i] = beta.value(w[i]);
        jac[i] = a.diag[i] + dt * beta.slope(w[i]);
      }
      residual = apply(a, w) - rhs + dt * pen_val;
      Eigen::VectorXd delta = solve_tridiagonal<double>(a.lower, jac, a.upper, residual);
      w -= delta;
      step = delta.lpNorm<Eigen::Infinity>();
      ++it;
    }
    sol.max_iterations = std::max(sol.max_iterations, it);
    sol.w.col(n).tail(m) = w;
  }
  return sol;
}

ObstacleSolution solve_complementarity(const MarketParams& p, const UtilityKernel& k, const Grid1D& grid, double h,
                                       const ComplementarityParams& cp) {
  check_truncation(grid, k, h, h);
  return solve_complementarity(p, grid, h, obstacle_source(k, grid, h), cp);
}

ObstacleSolution solve_complementarity(const MarketParams& p, const Grid1D& grid, double h,
                                       const Eigen::VectorXd& source, const ComplementarityParams& cp) {
  check_source(grid, source);
  const StepMatrix a = step_matrix(p, grid);
  const int m = grid.nz - 1;
  const double dt = grid.d_tau;
  const Eigen::VectorXd f = source.tail(m);

  double omega = cp.omega;
  if (omega == 0.0) {
    double jacobi = (std::abs(a.lower[1]) + std::abs(a.upper[1])) / a.diag[1];
    omega = 2.0 / (1.0 + std::sqrt(std::max(0.0, 1.0 - jacobi * jacobi)));
  }
  if (!(omega > 0.0 && omega < 2.0)) throw ConfigError("complementarity.omega", "must lie in (0, 2)");

  ObstacleSolution sol;
  sol.h = h;
  sol.scheme = Scheme::complementarity;
  // The projection leaves exact zeros on the contact set.
  sol.noise_floor = 0.0;
  sol.w = Eigen::MatrixXd::Zero(grid.nz, grid.n_tau + 1);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  for (int n = 1; n <= grid.n_tau; ++n) {
    const Eigen::VectorXd rhs = sol.w.col(n - 1).tail(m) - dt * f;
    int it = 0;
    double change = std::numeric_limits<double>::infinity();
    while (change > cp.tol) {
      if (it == cp.max_iter) {
        std::ostringstream os;
        os << "projected SOR did not converge at tau step " << n << " for h = " << h;
        throw SchemeError(os.str(), change);
      }
      change = 0.0;
      // Sweep towards the contact set so continuation values reach it within one pass.
      for (int i = m - 1; i >= 0; --i) {
        double r = rhs[i];
        if (i > 0) r -= a.lower[i] * w[i - 1];
        if (i + 1 < m) r -= a.upper[i] * w[i + 1];
        double next = std::max(0.0, (1.0 - omega) * w[i] + omega * r / a.diag[i]);
        change = std::max(change, std::abs(next - w[i]));
        w[i] = next;
      }
      ++it;
    }
    sol.max_iterations = std::max(sol.max_iterations, it);
    sol.w.col(n).tail(m) = w;
  }
  return sol;
}

double complementarity_residual(const MarketParams& p, const Grid1D& grid, const ObstacleSolution& sol,
                                const Eigen::VectorXd& source) {
  check_source(grid, source);
  const StepMatrix a = step_matrix(p, grid);
  const int m = grid.nz - 1;
  double worst = 0.0;
  for (int n = 1; n <= grid.n_tau; ++n) {
    Eigen::VectorXd w = sol.w.col(n).tail(m);
    Eigen::VectorXd lhs = apply(a, w) - sol.w.col(n - 1).tail(m) + grid.d_tau * source.tail(m);
    worst = std::max(worst, lhs.cwiseMin(w).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

std::vector<ObstacleSolution> sweep_habit_slices(const MarketParams& p, const UtilityKernel& k, const Grid1D& grid,
                                                 const std::vector<double>& h_grid, const SweepOptions& opt) {
  if (h_grid.empty()) throw PreconditionError("habit grid is empty");
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    if (!(h_grid[i] > 0.0)) throw PreconditionError("habit levels must be positive");
    if (i > 0 && !(h_grid[i] > h_grid[i - 1])) throw PreconditionError("habit grid must be strictly increasing");
  }
  check_truncation(grid, k, h_grid.front(), h_grid.back());

  std::vector<ObstacleSolution> out(h_grid.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::size_t failed_index = h_grid.size();
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (std::size_t i = next++; i < h_grid.size(); i = next++) {
      try {
        out[i] = opt.scheme == Scheme::penalty ? solve_penalized(p, k, grid, h_grid[i], opt.penalty)
                                               : solve_complementarity(p, k, grid, h_grid[i], opt.complementarity);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  int threads = std::max(1, std::min<int>(opt.threads, static_cast<int>(h_grid.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) {
    std::ostringstream prefix;
    prefix << "habit slice " << failed_index << " (h = " << h_grid[failed_index] << "): ";
    try {
      std::rethrow_exception(failure);
    } catch (const SchemeError& e) {
      throw SchemeError(prefix.str() + e.what(), e.residual());
    } catch (const PreconditionError& e) {
      throw PreconditionError(prefix.str() + e.what());
    } catch (const std::exception& e) {
      throw Error(prefix.str() + e.what());
    }
  }
  return out;
}

SliceReport check_slice(const MarketParams& p, const Grid1D& grid, const ObstacleSolution& sol) {
  SliceReport rep;
  const Eigen::MatrixXd& w = sol.w;
  double eps = sol.scheme == Scheme::penalty ? sol.noise_floor : 0.0;
  for (int n = 0; n <= grid.n_tau; ++n) {
    for (int j = 0; j < grid.nz; ++j) {
      rep.negativity = std::max(rep.negativity, -w(j, n));
      if (p.r > 0.0) rep.growth_excess = std::max(rep.growth_excess, w(j, n) - std::exp(grid.z(j)) / p.r - eps);
      if (j + 1 < grid.nz) rep.z_decrease = std::max(rep.z_decrease, w(j, n) - w(j + 1, n));
      if (n > 0) rep.tau_decrease = std::max(rep.tau_decrease, w(j, n - 1) - w(j, n));
    }
  }
  return rep;
}

double habit_slope_bound(const MarketParams& p, const UtilityKernel& k, double h, double h_next) {
  auto at = [&](double s) {
    double a = -k.U.second_derivative(s);
    double b = k.b > 0.0 ? -k.b * k.b * k.U.second_derivative(k.b * s) : 0.0;
    return std::max(a, b);
  };
  return std::max(at(h), at(h_next)) / p.rho;
}

HabitPairReport check_habit_pair(const MarketParams& p, const UtilityKernel& k, const ObstacleSolution& lo,
                                 const ObstacleSolution& hi) {
  if (lo.w.rows() != hi.w.rows() || lo.w.cols() != hi.w.cols())
    throw PreconditionError("habit slices live on different grids");
  HabitPairReport rep;
  rep.bound = habit_slope_bound(p, k, lo.h, hi.h);
  Eigen::MatrixXd diff = hi.w - lo.w;
  rep.monotonicity = std::max(0.0, -diff.minCoeff());
  rep.slope_excess = std::max(0.0, diff.maxCoeff() / (hi.h - lo.h) - rep.bound);
  return rep;
}

}  // namespace ratchet
