#include "ratchet/operator.hpp"

#include <vector>

namespace ratchet {

Eigen::SparseMatrix<double> assemble_T_matrix(const MarketParams& p, const Grid1D& grid) {
  const OperatorCoefficients c = operator_coefficients(p);
  const Stencil s = interior_stencil(c, grid.dz);
  const int n = grid.nz;
  const double d = c.diffusion / (grid.dz * grid.dz), a = c.drift / (2.0 * grid.dz);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(3 * n + 2);
  t.emplace_back(0, 0, d - 3.0 * a - c.discount);
  t.emplace_back(0, 1, -2.0 * d + 4.0 * a);
  t.emplace_back(0, 2, d - a);
  for (int j = 1; j + 1 < n; ++j) {
    t.emplace_back(j, j - 1, s.lower);
    t.emplace_back(j, j, s.centre);
    t.emplace_back(j, j + 1, s.upper);
  }
  const int m = n - 1;
  t.emplace_back(m, m, d + 3.0 * a - c.discount);
  t.emplace_back(m, m - 1, -2.0 * d - 4.0 * a);
  t.emplace_back(m, m - 2, d + a);
  Eigen::SparseMatrix<double> T(n, n);
  T.setFromTriplets(t.begin(), t.end());
  return T;
}

}  // namespace ratchet
