#include "ratchet/primal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ratchet/errors.hpp"
#include "ratchet/interpolation.hpp"

namespace ratchet {

namespace {

/// Linear weights of a coordinate on a uniform or tabulated axis.
struct Bracket {
  int lo = 0;
  double frac = 0.0;
};

Bracket tau_bracket(const Grid1D& g, double tau) {
  if (!(tau >= -1e-12 * g.tau_max) || !(tau <= g.tau_max * (1.0 + 1e-12)))
    throw PreconditionError("time lies outside the horizon");
  double q = std::clamp(tau / g.d_tau, 0.0, static_cast<double>(g.n_tau));
  int lo = std::min(static_cast<int>(q), g.n_tau - 1);
  return {lo, q - lo};
}

Bracket habit_bracket(const std::vector<double>& hg, double h) {
  if (hg.size() == 1) return {0, 0.0};
  const double lo_edge = hg.front() * (1.0 - 1e-12), hi_edge = hg.back() * (1.0 + 1e-12);
  if (!(h >= lo_edge && h <= hi_edge)) {
    std::ostringstream os;
    os << "habit " << h << " lies outside the surface range [" << hg.front() << ", " << hg.back() << "]";
    throw PreconditionError(os.str());
  }
  int k = static_cast<int>(locate_cell(hg, h));
  double frac = std::clamp((h - hg[k]) / (hg[k + 1] - hg[k]), 0.0, 1.0);
  return {k, frac};
}

/// Node columns (slice, tau node) and weights of the bilinear blend in tau and h.
struct Stencil {
  int k[4] = {}, n[4] = {};
  double w[4] = {};
  int size = 0;
};

Stencil make_stencil(const DualSurface& s, double tau, double h) {
  const Bracket kb = habit_bracket(s.h_grid, h), nb = tau_bracket(s.grid, tau);
  Stencil st;
  for (int a = 0; a < 2; ++a) {
    double wk = a == 0 ? 1.0 - kb.frac : kb.frac;
    if (wk == 0.0 || kb.lo + a >= s.slices()) continue;
    for (int c = 0; c < 2; ++c) {
      double wn = c == 0 ? 1.0 - nb.frac : nb.frac;
      if (wn == 0.0) continue;
      st.k[st.size] = kb.lo + a;
      st.n[st.size] = nb.lo + c;
      st.w[st.size] = wk * wn;
      ++st.size;
    }
  }
  return st;
}

/// Cubic a0 + a1 e + a2 e^2 + a3 e^3 in the offset e from the left node of a z cell.
struct CellCubic {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;

  double at(double e) const { return a0 + e * (a1 + e * (a2 + e * a3)); }
  double slope(double e) const { return a1 + e * (2.0 * a2 + 3.0 * e * a3); }
  /// Integral of e^{z0 + s} times the cubic over s in [0, e], in closed form.
  double exp_integral(double z0, double e) const {
    const double q0 = a0 - a1 + 2.0 * a2 - 6.0 * a3, q1 = a1 - 2.0 * a2 + 6.0 * a3, q2 = a2 - 3.0 * a3;
    return std::exp(z0) * (std::exp(e) * (q0 + e * (q1 + e * (q2 + e * a3))) - q0);
  }
};

/// Hermite cubic on a cell of width dz from end values f and end slopes d.
CellCubic hermite(double f0, double f1, double d0, double d1, double dz) {
  const double S = (f1 - f0) / dz;
  return {f0, d0, (3.0 * S - 2.0 * d0 - d1) / dz, (d0 + d1 - 2.0 * S) / (dz * dz)};
}

CellCubic cell_of(const Eigen::MatrixXd& f, const Eigen::MatrixXd& d, int n, int j, double dz) {
  return hermite(f(j, n), f(j + 1, n), d(j, n), d(j + 1, n), dz);
}

int z_cell(const Grid1D& g, double z) {
  double q = std::clamp((z - g.z_min) / g.dz, 0.0, static_cast<double>(g.nz - 1));
  return std::min(static_cast<int>(q), g.nz - 2);
}

}  // namespace

DualInterpolant::DualInterpolant(DualSurface s) : s_(std::move(s)) {
  const Grid1D& g = s_.grid;
  const int m = s_.slices();
  if (m == 0 || g.nz < 2) throw PreconditionError("dual surface is empty");
  G_.assign(m, Eigen::MatrixXd(g.nz, g.n_tau + 1));
  dG_.assign(m, Eigen::MatrixXd(g.nz, g.n_tau + 1));
  v_.assign(m, Eigen::MatrixXd(g.nz, g.n_tau + 1));
  const Eigen::ArrayXd decay = (-g.z_nodes().array()).exp();
  const std::size_t nz = static_cast<std::size_t>(g.nz);
  const int last = g.j_report_max();
  auto xs = [&](std::size_t j) { return g.z(static_cast<int>(j)); };
  for (int k = 0; k < m; ++k) {
    G_[k] = (s_.u_z[k].array().colwise() * decay).matrix();
    for (int n = 0; n <= g.n_tau; ++n) {
      auto col = G_[k].col(n);
      // Fourth-order slopes of u away from the edges, so the integral of e^z v_y tracks u closely.
      const auto u = s_.u[k].col(n);
      for (int j = 2; j + 2 < g.nz; ++j)
        col[j] = decay[j] * (u[j - 2] - 8.0 * u[j - 1] + 8.0 * u[j + 1] - u[j + 2]) / (12.0 * g.dz);
      auto at = [&](std::size_t j) { return col[static_cast<Eigen::Index>(j)]; };
      for (std::size_t j = 0; j < nz; ++j) dG_[k](static_cast<Eigen::Index>(j), n) = limited_central_slope_at<double>(nz, j, xs, at);
      // Integral of the slope from the left edge, then the weighted least-squares shift onto u over
      // the reporting window, in relative terms.
      auto v = v_[k].col(n);
      v[0] = 0.0;
      for (int j = 0; j + 1 < g.nz; ++j) v[j + 1] = v[j] + cell_of(G_[k], dG_[k], n, j, g.dz).exp_integral(g.z(j), g.dz);
      double num = 0.0, den = 0.0;
      for (int j = 0; j <= last; ++j) {
        double wt = 1.0 / ((1.0 + std::abs(u[j])) * (1.0 + std::abs(u[j])));
        num += wt * (u[j] - v[j]);
        den += wt;
      }
      v.array() += num / den;
    }
  }
}

DualSlope DualInterpolant::slope(double z, double tau, double h) const {
  const Stencil st = make_stencil(s_, tau, h);
  const int j = z_cell(s_.grid, z);
  const double e = z - s_.grid.z(j);
  DualSlope out;
  double dG = 0.0;
  for (int i = 0; i < st.size; ++i) {
    CellCubic c = cell_of(G_[st.k[i]], dG_[st.k[i]], st.n[i], j, s_.grid.dz);
    out.v_y += st.w[i] * c.at(e);
    dG += st.w[i] * c.slope(e);
  }
  out.v_yy = std::exp(-z) * dG;
  return out;
}

double DualInterpolant::value(double z, double tau, double h) const {
  const Stencil st = make_stencil(s_, tau, h);
  const int j = z_cell(s_.grid, z);
  const double z0 = s_.grid.z(j), e = z - z0;
  double acc = 0.0;
  for (int i = 0; i < st.size; ++i)
    acc += st.w[i] * (v_[st.k[i]](j, st.n[i]) + cell_of(G_[st.k[i]], dG_[st.k[i]], st.n[i], j, s_.grid.dz).exp_integral(z0, e));
  return acc;
}

double DualInterpolant::invert_log(const MarketParams& p, double x, double t, double h) const {
  const Grid1D& g = s_.grid;
  const double tau = p.T - t;
  const double fl = p.wealth_floor(h, tau);
  if (!(x > fl)) {
    std::ostringstream os;
    os << "wealth " << x << " is not above the floor " << fl;
    throw DomainError(os.str());
  }
  const Stencil st = make_stencil(s_, tau, h);
  auto node = [&](int j) {
    double acc = 0.0;
    for (int i = 0; i < st.size; ++i) acc += st.w[i] * G_[st.k[i]](j, st.n[i]);
    return acc;
  };
  // The blended node values increase in z; locate the cell holding -x.
  int lo = 0, hi = g.j_report_max();
  const double target = -x;
  if (node(lo) > target || node(hi) < target) {
    std::ostringstream os;
    os << "wealth " << x << " at t = " << t << ", h = " << h << " maps outside the dual box (represented range ["
       << -node(hi) << ", " << -node(lo) << "])";
    throw TruncationError(os.str());
  }
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    if (node(mid) <= target) lo = mid; else hi = mid;
  }
  CellCubic c;
  for (int i = 0; i < st.size; ++i) {
    CellCubic ci = cell_of(G_[st.k[i]], dG_[st.k[i]], st.n[i], lo, g.dz);
    c.a0 += st.w[i] * ci.a0;
    c.a1 += st.w[i] * ci.a1;
    c.a2 += st.w[i] * ci.a2;
    c.a3 += st.w[i] * ci.a3;
  }
  // Safeguarded Newton on the cell cubic, which is monotone on [0, dz].
  const double tol = 1e-11 * (1.0 + x);
  double a = 0.0, b = g.dz;
  double rb = c.at(b) - target;
  double e = rb > 0.0 ? g.dz * (target - c.a0) / (c.at(b) - c.a0) : b;
  for (int it = 0; it < 100; ++it) {
    double r = c.at(e) - target;
    if (std::abs(r) <= tol) break;
    if (r > 0.0) b = e; else a = e;
    if (b - a <= 1e-15 * (1.0 + std::abs(g.z(lo)))) break;
    double d = c.slope(e);
    double en = d > 0.0 ? e - r / d : -1.0;
    e = (en > a && en < b) ? en : 0.5 * (a + b);
  }
  return g.z(lo) + e;
}

double DualInterpolant::invert(const MarketParams& p, double x, double t, double h) const {
  return std::exp(invert_log(p, x, t, h));
}

double DualInterpolant::primal_value(const MarketParams& p, double x, double t, double h) const {
  double z = invert_log(p, x, t, h);
  return value(z, p.T - t, h) + x * std::exp(z);
}

std::string to_string(Region r) {
  switch (r) {
    case Region::low: return "LC";
    case Region::medium: return "MC";
    case Region::high: return "HC";
    case Region::switching: return "S";
  }
  return "?";
}

PolicySurface::PolicySurface(MarketParams p, UtilityKernel k, DualSurface s, const std::vector<BoundaryCurve>& curves)
    : p_(p), k_(std::move(k)), d_(std::move(s)) {
  const DualSurface& ds = d_.surface();
  const int m = ds.slices();
  if (static_cast<int>(curves.size()) != m) throw PreconditionError("one boundary curve per habit slice required");
  z_star_.resize(ds.grid.n_tau + 1, m);
  for (int i = 0; i < m; ++i) {
    if (curves[i].h != ds.h_grid[i]) throw PreconditionError("boundary curve habit does not match the surface");
    if (curves[i].z_star.size() != ds.grid.n_tau + 1) throw PreconditionError("boundary curve does not match the grid");
    z_star_.col(i) = curves[i].z_star;
    z_star_(0, i) = std::log(k_.U.marginal(ds.h_grid[i]));
  }
}

std::vector<double> PolicySurface::t_grid() const {
  const Grid1D& g = d_.surface().grid;
  std::vector<double> t(g.n_tau + 1);
  for (int n = 0; n <= g.n_tau; ++n) t[n] = p_.T - g.tau(n);
  return t;
}

double PolicySurface::z_star(double tau, double h) const {
  const Stencil st = make_stencil(d_.surface(), tau, h);
  double acc = 0.0;
  for (int i = 0; i < st.size; ++i) acc += st.w[i] * z_star_(st.n[i], st.k[i]);
  return acc;
}

namespace {

struct ThresholdDetail {
  Thresholds x;
  double cell_L = 0.0, cell_H = 0.0;  ///< wealth change across one z cell at each threshold
  double z_L = 0.0, z_H = 0.0, z_star = 0.0;
};

ThresholdDetail threshold_detail(const PolicySurface& ps, double t, double h) {
  const DualSurface& s = ps.dual();
  const Grid1D& g = s.grid;
  const double tau = ps.params().T - t;
  ThresholdDetail d;
  auto at = [&](double z, double& cell) {
    DualSlope ds = ps.interp().slope(std::min(z, g.z_max), tau, h);
    cell = ds.v_yy * std::exp(std::min(z, g.z_max)) * g.dz;
    return -ds.v_y;
  };
  d.z_H = std::log(ps.kernel().U.marginal(h));
  double low_c = ps.kernel().b * h;
  d.z_L = low_c > 0.0 ? std::log(ps.kernel().U.marginal(low_c)) : std::numeric_limits<double>::infinity();
  d.z_star = ps.z_star(tau, h);
  double unused = 0.0;
  d.x.x_H = at(d.z_H, d.cell_H);
  d.x.x_L = d.z_L >= g.z_max ? ps.floor(t, h) : at(d.z_L, d.cell_L);
  d.x.x_star = at(d.z_star, unused);
  return d;
}

}  // namespace

Thresholds PolicySurface::thresholds(double t, double h) const {
  ThresholdDetail d = threshold_detail(*this, t, h);
  if (d.x.x_L > d.x.x_H + d.cell_L || d.x.x_H > d.x.x_star + d.cell_H) {
    std::ostringstream os;
    os << "threshold ordering fails at t = " << t << ", h = " << h << ": x_L = " << d.x.x_L << ", x_H = " << d.x.x_H
       << ", x_star = " << d.x.x_star;
    throw DataError(os.str());
  }
  return d.x;
}

double PolicySurface::updated_habit(double x, double t, double h) const {
  const double tau = p_.T - t;
  const double z_cap = d_.surface().grid.z_max;
  auto gap = [&](double hh) { return -d_.slope(std::min(z_star(tau, hh), z_cap), tau, hh).v_y - x; };
  double g_lo = gap(h);
  if (g_lo > 0.0) return h;
  if (gap(h_max()) <= 0.0) return h_max();
  // Bracket on the slices, then Illinois regula falsi inside the bracket.
  const std::vector<double>& hg = dual().h_grid;
  double lo = h, hi = h_max(), g_hi = 0.0;
  auto it = std::upper_bound(hg.begin(), hg.end(), h);
  for (; it != hg.end(); ++it) {
    double gk = gap(*it);
    if (gk > 0.0) {
      hi = *it;
      g_hi = gk;
      break;
    }
    lo = *it;
    g_lo = gk;
  }
  int side = 0;
  for (int iter = 0; iter < 100 && hi - lo > 1e-13 * hi; ++iter) {
    double mid = hi - g_hi * (hi - lo) / (g_hi - g_lo);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    double gm = gap(mid);
    if (gm == 0.0) return mid;
    if (gm < 0.0) {
      lo = mid;
      g_lo = gm;
      if (side == -1) g_hi *= 0.5;
      side = -1;
    } else {
      hi = mid;
      g_hi = gm;
      if (side == 1) g_lo *= 0.5;
      side = 1;
    }
    if (std::abs(gm) <= 1e-12 * (1.0 + x)) return gm < 0.0 ? lo : hi;
  }
  return lo;
}

Feedback PolicySurface::feedback(double x, double t, double h) const {
  const double tau = p_.T - t;
  Feedback f;
  f.habit = h;
  ThresholdDetail d = threshold_detail(*this, t, h);
  if (x >= d.x.x_star) {
    f.region = Region::switching;
    f.habit = updated_habit(x, t, h);
  }
  double z = d_.invert_log(p_, x, t, f.habit);
  double y = std::exp(z);
  f.pi = p_.kappa / p_.sigma * y * d_.slope(z, tau, f.habit).v_yy;
  const double bh = k_.b * h;
  if (f.region == Region::switching) {
    f.c = f.habit;
  } else if (x >= d.x.x_H) {
    f.region = Region::high;
    f.c = h;
  } else if (x <= d.x.x_L) {
    f.region = Region::low;
    f.c = bh;
  } else {
    f.region = Region::medium;
    f.c = std::clamp(k_.U.marginal_inverse(y), bh, h);
  }
  return f;
}

ValueBounds value_bounds(const MarketParams& p, const UtilityKernel& k, double x, double t, double h) {
  const double tau = p.T - t;
  const double K = k.growth.K, th = k.growth.theta, ga = k.growth.gamma;
  const double hk = p.half_kappa_sq();
  ValueBounds vb;
  // Lower: inf over y of the explicit subsolution plus x y.
  vb.lower_rate = -hk * (th - 1.0) / (th * th) + (p.rho - p.r) * (th - 1.0) / th - p.rho;
  double X = x - p.wealth_floor(h, tau);
  double low_c = k.b * h;
  double floor_utility = low_c > 0.0 ? k.U.value(low_c) : k.U.value_at_zero();
  vb.lower = K / (1.0 - th) * std::exp(vb.lower_rate * th * tau) * std::pow(X, 1.0 - th) +
             floor_utility / p.rho * (-std::expm1(-p.rho * tau)) - K * std::exp(-p.rho * tau);
  // Upper: e^{lambda tau} K [1 + gamma/(1-gamma) (y/K)^q] is a supersolution of the unconstrained
  // dual problem once lambda + rho >= 1 and lambda - m >= 1, m the operator's rate on y^q.
  double q = -(1.0 - ga) / ga;
  double m = hk * q * (q - 1.0) + (p.rho - p.r) * q - p.rho;
  vb.upper_rate = std::max({0.0, 1.0 - p.rho, 1.0 + m});
  double E = std::exp(vb.upper_rate * tau);
  vb.upper = K * E + K * std::pow(E, ga) * std::pow(x, 1.0 - ga) / (1.0 - ga);
  return vb;
}

Thresholds terminal_thresholds(const UtilityKernel& k, double h) {
  auto limit = [&](double c) {
    if (k.U_T.is_zero()) return 0.0;
    double y = c > 0.0 ? k.U.marginal(c) : std::numeric_limits<double>::infinity();
    return y < k.U_T.marginal_at_zero() ? k.U_T.marginal_inverse(y) : 0.0;
  };
  Thresholds out;
  out.x_L = limit(k.b * h);
  out.x_H = limit(h);
  out.x_star = out.x_H;
  return out;
}

double hjb_residual(const PolicySurface& ps, double x, double t, double h) {
  const MarketParams& p = ps.params();
  // v is linear in tau between nodes, so short steps inside the cell reproduce the scheme's tau difference.
  // Where v_yy is small the one-sided quotient carries a large first-order term; two steps cancel it.
  // Near the floor V bends sharply in t at fixed x, because the floor itself moves, so the step shrinks
  // with the distance to it.
  const double gap = (x - ps.floor(t, h)) / (1.0 + x);
  const double dt = std::clamp(0.05 * gap, 1e-6, 1e-3) * ps.dual().grid.d_tau;
  if (!(p.T - t >= 2.0 * dt)) throw PreconditionError("residual needs a time step before the horizon");
  double V = ps.value(x, t, h);
  double V_t = (4.0 * ps.value(x, t + dt, h) - ps.value(x, t + 2.0 * dt, h) - 3.0 * V) / (2.0 * dt);
  double I = ps.marginal(x, t, h);
  double dx = 1e-3 * (x - ps.floor(t, h));
  double V_xx = (ps.marginal(x + dx, t, h) - ps.marginal(x - dx, t, h)) / (2.0 * dx);
  return -V_t + p.half_kappa_sq() * I * I / V_xx - hat_U(ps.kernel(), I, h) - p.r * x * I + p.rho * V;
}

ThresholdTable threshold_table(const PolicySurface& ps) {
  ThresholdTable tab;
  const Grid1D& g = ps.dual().grid;
  for (int n = 1; n <= g.n_tau; ++n) {
    double t = ps.params().T - g.tau(n);
    for (double h : ps.dual().h_grid) {
      Thresholds th = threshold_detail(ps, t, h).x;
      tab.t.push_back(t);
      tab.h.push_back(h);
      tab.x_L.push_back(th.x_L);
      tab.x_H.push_back(th.x_H);
      tab.x_star.push_back(th.x_star);
    }
  }
  return tab;
}

PrimalReport check_primal(const PolicySurface& ps, double h_hi, int tau_stride, int x_per_slice, int collar_cells) {
  const DualSurface& s = ps.dual();
  const Grid1D& g = s.grid;
  const MarketParams& p = ps.params();
  const UtilityKernel& k = ps.kernel();
  PrimalReport rep;
  rep.max_ordering_violation = rep.max_floor_violation = rep.max_habit_decrease = -std::numeric_limits<double>::infinity();
  rep.max_concavity = rep.max_bound_violation = -std::numeric_limits<double>::infinity();
  rep.min_pi = std::numeric_limits<double>::infinity();
  const int stride = std::max(1, tau_stride);
  const double z_lo = g.z_min + 1.0, z_hi = g.z(g.j_report_max()) - 0.5;
  const double collar = collar_cells * g.dz;

  for (int i = 0; i < s.slices(); ++i) {
    const double h = s.h_grid[i];
    if (h > h_hi) continue;
    // Terminal limits on the first step.
    Thresholds lim = terminal_thresholds(k, h);
    ThresholdDetail first = threshold_detail(ps, p.T - g.d_tau, h);
    auto cells = [&](double a, double b, double cell) { return cell > 0.0 ? std::abs(a - b) / cell : 0.0; };
    rep.max_terminal_cells = std::max({rep.max_terminal_cells, cells(first.x.x_H, lim.x_H, first.cell_H),
                                       cells(first.x.x_star, lim.x_star, first.cell_H)});
    if (std::isfinite(first.z_L) && first.z_L < g.z_max)
      rep.max_terminal_cells = std::max(rep.max_terminal_cells, cells(first.x.x_L, lim.x_L, first.cell_L));

    for (int n = stride; n <= g.n_tau; n += stride) {
      const double tau = g.tau(n), t = p.T - tau;
      ThresholdDetail d = threshold_detail(ps, t, h);
      rep.max_ordering_violation = std::max({rep.max_ordering_violation, d.x.x_L - d.x.x_H, d.x.x_H - d.x.x_star});
      rep.max_floor_violation = std::max(rep.max_floor_violation, ps.floor(t, h) - d.x.x_L);
      if (i > 0) {
        Thresholds prev = threshold_detail(ps, t, s.h_grid[i - 1]).x;
        rep.max_habit_decrease = std::max({rep.max_habit_decrease, prev.x_L - d.x.x_L, prev.x_H - d.x.x_H,
                                           prev.x_star - d.x.x_star});
      }
      for (int q = 0; q < x_per_slice; ++q) {
        double z = z_lo + (z_hi - z_lo) * (q + 0.5) / x_per_slice;
        double x = -ps.interp().slope(z, tau, h).v_y;
        // On wide boxes the right end of the window can sit within rounding of the floor.
        if (x - ps.floor(t, h) <= 1e-6 * (1.0 + x)) continue;
        ++rep.probes;
        double I = ps.marginal(x, t, h);
        rep.max_round_trip = std::max(rep.max_round_trip, std::abs(ps.interp().slope(std::log(I), tau, h).v_y + x) / (1.0 + x));
        double V = ps.value(x, t, h);
        double dx = 1e-4 * (x - ps.floor(t, h));
        double Vp = ps.value(x + dx, t, h), Vm = ps.value(x - dx, t, h);
        rep.max_marginal_mismatch = std::max(rep.max_marginal_mismatch, std::abs((Vp - Vm) / (2.0 * dx) - I) / I);
        double Ip = ps.marginal(x + dx, t, h), Im = ps.marginal(x - dx, t, h);
        double I_x = (Ip - Im) / (2.0 * dx);
        double v_yy = ps.interp().slope(std::log(I), tau, h).v_yy;
        rep.max_curvature_mismatch = std::max(rep.max_curvature_mismatch, std::abs(I_x + 1.0 / v_yy) * v_yy);
        rep.max_concavity = std::max(rep.max_concavity, I_x);
        ValueBounds vb = value_bounds(p, k, x, t, h);
        rep.max_bound_violation = std::max({rep.max_bound_violation, vb.lower - V, V - vb.upper});
        Feedback f = ps.feedback(x, t, h);
        rep.min_pi = std::min(rep.min_pi, f.pi);
        if (f.region != Region::switching)
          rep.max_c_violation = std::max({rep.max_c_violation, k.b * h - f.c, f.c - h});
        double zi = std::log(I);
        if (f.region == Region::switching) {
          if (i > 0 && zi < d.z_star - collar) {
            double dh = 1e-3 * h;
            double V_h = (V - ps.value(x, t, h - dh)) / dh;
            rep.max_switching_slope = std::max(rep.max_switching_slope, std::abs(V_h));
          }
          continue;
        }
        bool near = std::abs(zi - d.z_star) < collar || std::abs(zi - d.z_H) < collar ||
                    (std::isfinite(d.z_L) && std::abs(zi - d.z_L) < collar);
        if (near) continue;
        ++rep.hjb_probes;
        rep.max_hjb_residual = std::max(rep.max_hjb_residual, std::abs(hjb_residual(ps, x, t, h)) / (1.0 + std::abs(V)));
      }
    }
  }
  if (rep.probes == 0) {
    rep.max_ordering_violation = rep.max_floor_violation = rep.max_concavity = rep.max_bound_violation = 0.0;
    rep.min_pi = 0.0;
  }
  if (!std::isfinite(rep.max_habit_decrease)) rep.max_habit_decrease = 0.0;
  return rep;
}

}  // namespace ratchet
