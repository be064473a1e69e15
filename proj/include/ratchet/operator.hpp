#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "ratchet/errors.hpp"
#include "ratchet/grid.hpp"
#include "ratchet/market.hpp"

namespace ratchet {

/// Coefficients of T u = D u_zz + a u_z - rho u.
struct OperatorCoefficients {
  double diffusion;  ///< D = kappa^2 / 2
  double drift;      ///< a = rho - r - kappa^2 / 2
  double discount;   ///< rho
};

inline OperatorCoefficients operator_coefficients(const MarketParams& p) {
  return {p.half_kappa_sq(), p.rho - p.r - p.half_kappa_sq(), p.rho};
}

/// Three-point weights of the centred discretization at an interior node.
struct Stencil {
  double lower, centre, upper;
};

inline Stencil interior_stencil(const OperatorCoefficients& c, double dz) {
  double d = c.diffusion / (dz * dz), a = c.drift / (2.0 * dz);
  return {d - a, -2.0 * d - c.discount, d + a};
}

/// Throws unless the centred stencil has nonnegative off-diagonal weights.
inline void check_monotone_stencil(const OperatorCoefficients& c, double dz) {
  Stencil s = interior_stencil(c, dz);
  if (s.lower < 0.0 || s.upper < 0.0)
    throw PreconditionError("grid too coarse: cell Peclet number exceeds one, refine dz");
}

/// Applies T to a slice. Interior nodes use centred differences; the two end rows use
/// one-sided second-order first differences and the adjacent three-point second difference.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> discrete_T_operator(const Eigen::MatrixBase<Derived>& u,
                                                                                const MarketParams& p,
                                                                                const Grid1D& grid) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = u.size();
  if (n != grid.nz) throw PreconditionError("slice length does not match grid node count");
  const OperatorCoefficients c = operator_coefficients(p);
  const Scalar dz = grid.dz;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n);
  for (Eigen::Index j = 1; j + 1 < n; ++j) {
    Scalar uzz = (u[j + 1] - 2 * u[j] + u[j - 1]) / (dz * dz);
    Scalar uz = (u[j + 1] - u[j - 1]) / (2 * dz);
    out[j] = c.diffusion * uzz + c.drift * uz - c.discount * u[j];
  }
  Scalar uzz0 = (u[0] - 2 * u[1] + u[2]) / (dz * dz);
  Scalar uz0 = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * dz);
  out[0] = c.diffusion * uzz0 + c.drift * uz0 - c.discount * u[0];
  Eigen::Index m = n - 1;
  Scalar uzzm = (u[m] - 2 * u[m - 1] + u[m - 2]) / (dz * dz);
  Scalar uzm = (3 * u[m] - 4 * u[m - 1] + u[m - 2]) / (2 * dz);
  out[m] = c.diffusion * uzzm + c.drift * uzm - c.discount * u[m];
  return out;
}

/// Sparse matrix of discrete_T_operator.
Eigen::SparseMatrix<double> assemble_T_matrix(const MarketParams& p, const Grid1D& grid);

/// Thomas algorithm for a tridiagonal system. lower[0] and upper[n-1] are ignored.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> solve_tridiagonal(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& lower,
                                                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& diag,
                                                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& upper,
                                                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& rhs) {
  const Eigen::Index n = diag.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c(n), x(n);
  Scalar denom = diag[0];
  if (denom == Scalar(0)) throw SchemeError("singular tridiagonal pivot", 0.0);
  c[0] = upper[0] / denom;
  x[0] = rhs[0] / denom;
  for (Eigen::Index i = 1; i < n; ++i) {
    denom = diag[i] - lower[i] * c[i - 1];
    if (denom == Scalar(0)) throw SchemeError("singular tridiagonal pivot", 0.0);
    c[i] = i + 1 < n ? upper[i] / denom : Scalar(0);
    x[i] = (rhs[i] - lower[i] * x[i - 1]) / denom;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) x[i] -= c[i] * x[i + 1];
  return x;
}

}  // namespace ratchet
