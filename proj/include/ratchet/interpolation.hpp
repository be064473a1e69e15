#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace ratchet {

/// Cubic Hermite interpolant on [x0, x1] with end values f0, f1 and end slopes d0, d1.
template <typename Scalar>
Scalar hermite(Scalar x0, Scalar x1, Scalar f0, Scalar f1, Scalar d0, Scalar d1, Scalar x) {
  Scalar dx = x1 - x0;
  Scalar t = (x - x0) / dx;
  Scalar t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * dx * d0 + (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * dx * d1;
}

template <typename Scalar>
Scalar hermite_derivative(Scalar x0, Scalar x1, Scalar f0, Scalar f1, Scalar d0, Scalar d1, Scalar x) {
  Scalar dx = x1 - x0;
  Scalar t = (x - x0) / dx;
  Scalar t2 = t * t;
  return ((6 * t2 - 6 * t) * f0 + (-6 * t2 + 6 * t) * f1) / dx + (3 * t2 - 4 * t + 1) * d0 + (3 * t2 - 2 * t) * d1;
}

/// Fritsch-Carlson slope at node i of data (x, f). Monotone data give a monotone interpolant.
/// `at(k)` and `xs(k)` are accessors so the helper works on strided storage.
template <typename Scalar, typename XAt, typename FAt>
Scalar monotone_slope_at(std::size_t n, std::size_t i, XAt xs, FAt at) {
  auto secant = [&](std::size_t k) { return (at(k + 1) - at(k)) / (xs(k + 1) - xs(k)); };
  if (n < 2) return Scalar(0);
  if (n == 2) return secant(0);
  if (i == 0 || i == n - 1) {
    // One-sided three-point estimate, limited to keep monotonicity.
    std::size_t k = i == 0 ? 0 : n - 2;
    std::size_t kk = i == 0 ? 1 : n - 3;
    Scalar h0 = xs(k + 1) - xs(k), h1 = xs(kk + 1) - xs(kk);
    Scalar d0 = secant(k), d1 = secant(kk);
    Scalar d = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0) return Scalar(0);
    if (d0 * d1 <= 0 && std::abs(d) > std::abs(3 * d0)) return 3 * d0;
    return d;
  }
  Scalar dl = secant(i - 1), dr = secant(i);
  if (dl * dr <= 0) return Scalar(0);
  Scalar hl = xs(i) - xs(i - 1), hr = xs(i + 1) - xs(i);
  Scalar w1 = 2 * hr + hl, w2 = hr + 2 * hl;
  return (w1 + w2) / (w1 / dl + w2 / dr);
}

/// Central three-point slope at node i, limited to three times the smaller adjacent secant
/// (Hyman filter). Second order where the data are smooth and monotone, and still monotone
/// preserving; end nodes as in monotone_slope_at.
template <typename Scalar, typename XAt, typename FAt>
Scalar limited_central_slope_at(std::size_t n, std::size_t i, XAt xs, FAt at) {
  if (n < 3 || i == 0 || i == n - 1) return monotone_slope_at<Scalar>(n, i, xs, at);
  Scalar hl = xs(i) - xs(i - 1), hr = xs(i + 1) - xs(i);
  Scalar dl = (at(i) - at(i - 1)) / hl, dr = (at(i + 1) - at(i)) / hr;
  if (dl * dr <= 0) return Scalar(0);
  Scalar d = (hr * dl + hl * dr) / (hl + hr);
  Scalar cap = 3 * std::min(std::abs(dl), std::abs(dr));
  return std::abs(d) > cap ? std::copysign(cap, d) : d;
}

template <typename Scalar>
std::vector<Scalar> monotone_slopes(const std::vector<Scalar>& x, const std::vector<Scalar>& f) {
  std::vector<Scalar> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    d[i] = monotone_slope_at<Scalar>(x.size(), i, [&](std::size_t k) { return x[k]; },
                                     [&](std::size_t k) { return f[k]; });
  return d;
}

/// Locate the cell [x_i, x_{i+1}] of an increasing grid that contains x, clamped to the grid.
template <typename Vec, typename Scalar>
std::size_t locate_cell(const Vec& grid, Scalar x) {
  std::size_t n = static_cast<std::size_t>(grid.size());
  if (n < 2 || x <= grid[0]) return 0;
  if (x >= grid[n - 1]) return n - 2;
  std::size_t lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (grid[mid] <= x) lo = mid; else hi = mid;
  }
  return lo;
}

}  // namespace ratchet
