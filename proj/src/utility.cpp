#include "ratchet/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ratchet/errors.hpp"
#include "ratchet/interpolation.hpp"

namespace ratchet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t table_segment(const TableUtility& t, double c) {
  if (c < t.c.front() || c > t.c.back()) {
    std::ostringstream os;
    os << "consumption " << c << " outside table range [" << t.c.front() << ", " << t.c.back() << "]";
    throw DomainError(os.str());
  }
  auto it = std::upper_bound(t.c.begin(), t.c.end(), c);
  std::size_t i = static_cast<std::size_t>(it - t.c.begin());
  return std::min(i == 0 ? 0 : i - 1, t.c.size() - 2);
}

double table_marginal(const TableUtility& t, double c) {
  std::size_t i = table_segment(t, c);
  return hermite(t.c[i], t.c[i + 1], t.marginal[i], t.marginal[i + 1], t.slope[i], t.slope[i + 1], c);
}

double table_second(const TableUtility& t, double c) {
  std::size_t i = table_segment(t, c);
  return hermite_derivative(t.c[i], t.c[i + 1], t.marginal[i], t.marginal[i + 1], t.slope[i], t.slope[i + 1], c);
}

double table_value(const TableUtility& t, double c) {
  std::size_t i = table_segment(t, c);
  double dx = t.c[i + 1] - t.c[i];
  double s = (c - t.c[i]) / dx;
  double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
  double i00 = s4 / 2 - s3 + s;
  double i10 = s4 / 4 - 2 * s3 / 3 + s2 / 2;
  double i01 = -s4 / 2 + s3;
  double i11 = s4 / 4 - s3 / 3;
  return t.cumulative[i] + dx * (i00 * t.marginal[i] + i10 * dx * t.slope[i] + i01 * t.marginal[i + 1] +
                                 i11 * dx * t.slope[i + 1]);
}

double table_inverse(const TableUtility& t, double y) {
  if (y > t.marginal.front() || y < t.marginal.back()) {
    std::ostringstream os;
    os << "marginal utility " << y << " outside table range [" << t.marginal.back() << ", "
       << t.marginal.front() << "]";
    throw DomainError(os.str());
  }
  double lo = t.c.front(), hi = t.c.back();
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    if (table_marginal(t, mid) > y) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TableUtility make_table_utility(std::vector<double> c, std::vector<double> marginal, double value0) {
  if (c.size() < 2 || c.size() != marginal.size())
    throw ConfigError("utility.table", "needs at least two knots and matching marginal values");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(c[i] > 0.0) || !(marginal[i] > 0.0))
      throw ConfigError("utility.table", "knots and marginal values must be positive");
    if (i > 0 && !(c[i] > c[i - 1])) throw ConfigError("utility.table.c", "knots must be strictly increasing");
    if (i > 0 && !(marginal[i] < marginal[i - 1]))
      throw ConfigError("utility.table.marginal", "marginal utility must be strictly decreasing");
  }
  TableUtility t;
  t.c = std::move(c);
  t.marginal = std::move(marginal);
  t.value0 = value0;
  t.slope = monotone_slopes(t.c, t.marginal);
  t.cumulative.resize(t.c.size());
  t.cumulative[0] = value0;
  for (std::size_t i = 0; i + 1 < t.c.size(); ++i) {
    double dx = t.c[i + 1] - t.c[i];
    t.cumulative[i + 1] =
        t.cumulative[i] + dx * (0.5 * (t.marginal[i] + t.marginal[i + 1]) + dx * (t.slope[i] - t.slope[i + 1]) / 12.0);
  }
  return t;
}

Utility::Utility(Rep rep) : rep_(std::move(rep)) {
  std::visit(Overloaded{
                 [](const Crra& u) {
                   if (!(u.gamma > 0.0) || u.gamma == 1.0 || !std::isfinite(u.gamma))
                     throw ConfigError("utility.gamma", "CRRA gamma must be positive and different from 1");
                 },
                 [](const Cara& u) {
                   if (!(u.alpha > 0.0) || !std::isfinite(u.alpha))
                     throw ConfigError("utility.alpha", "CARA alpha must be positive");
                 },
                 [](const TableUtility& u) {
                   if (u.slope.size() != u.c.size() || u.cumulative.size() != u.c.size())
                     throw ConfigError("utility.table", "build tables with make_table_utility");
                 },
                 [](const auto&) {},
             },
             rep_);
}

double Utility::value(double c) const {
  return std::visit(Overloaded{
                        [c](const Crra& u) { return std::pow(c, 1.0 - u.gamma) / (1.0 - u.gamma); },
                        [c](const LogUtility&) { return std::log(c); },
                        [c](const Cara& u) { return -std::exp(-u.alpha * c) / u.alpha; },
                        [](const ZeroUtility&) { return 0.0; },
                        [c](const TableUtility& u) { return table_value(u, c); },
                    },
                    rep_);
}

double Utility::marginal(double c) const {
  return std::visit(Overloaded{
                        [c](const Crra& u) { return std::pow(c, -u.gamma); },
                        [c](const LogUtility&) { return 1.0 / c; },
                        [c](const Cara& u) { return std::exp(-u.alpha * c); },
                        [](const ZeroUtility&) { return 0.0; },
                        [c](const TableUtility& u) { return table_marginal(u, c); },
                    },
                    rep_);
}

double Utility::marginal_inverse(double y) const {
  if (!(y > 0.0)) throw DomainError("marginal_inverse requires y > 0");
  return std::visit(Overloaded{
                        [y](const Crra& u) { return std::pow(y, -1.0 / u.gamma); },
                        [y](const LogUtility&) { return 1.0 / y; },
                        [y](const Cara& u) {
                          if (y >= 1.0) throw DomainError("CARA marginal inverse requires y < U'(0) = 1");
                          return -std::log(y) / u.alpha;
                        },
                        [](const ZeroUtility&) -> double {
                          throw DomainError("zero utility has no marginal inverse");
                        },
                        [y](const TableUtility& u) { return table_inverse(u, y); },
                    },
                    rep_);
}

double Utility::second_derivative(double c) const {
  return std::visit(Overloaded{
                        [c](const Crra& u) { return -u.gamma * std::pow(c, -u.gamma - 1.0); },
                        [c](const LogUtility&) { return -1.0 / (c * c); },
                        [c](const Cara& u) { return -u.alpha * std::exp(-u.alpha * c); },
                        [](const ZeroUtility&) { return 0.0; },
                        [c](const TableUtility& u) { return table_second(u, c); },
                    },
                    rep_);
}

double Utility::marginal_at_zero() const {
  return std::visit(Overloaded{
                        [](const Cara&) { return 1.0; },
                        [](const ZeroUtility&) { return 0.0; },
                        [](const auto&) { return kInf; },
                    },
                    rep_);
}

double Utility::value_at_zero() const {
  return std::visit(Overloaded{
                        [](const Crra& u) { return u.gamma < 1.0 ? 0.0 : -kInf; },
                        [](const Cara& u) { return -1.0 / u.alpha; },
                        [](const ZeroUtility&) { return 0.0; },
                        [](const auto&) { return -kInf; },
                    },
                    rep_);
}

double Utility::crra_gamma() const {
  if (auto* u = std::get_if<Crra>(&rep_)) return u->gamma;
  if (std::holds_alternative<LogUtility>(rep_)) return 1.0;
  throw DomainError("utility is not of constant relative risk aversion");
}

std::string Utility::kind() const {
  return std::visit(Overloaded{
                        [](const Crra&) { return std::string("crra"); },
                        [](const LogUtility&) { return std::string("log"); },
                        [](const Cara&) { return std::string("cara"); },
                        [](const ZeroUtility&) { return std::string("zero"); },
                        [](const TableUtility&) { return std::string("table"); },
                    },
                    rep_);
}

UtilityKernel make_kernel(Utility U, Utility U_T, GrowthConstants growth, double b) {
  if (U.is_zero()) throw ConfigError("utility.U.kind", "running utility must not be identically zero");
  if (!(growth.gamma > 0.0 && growth.gamma < 1.0))
    throw ConfigError("utility.growth.gamma", "must lie in (0, 1)");
  if (!(growth.theta > 1.0)) throw ConfigError("utility.growth.theta", "must exceed 1");
  if (!(growth.K > 0.0)) throw ConfigError("utility.growth.K", "must be positive");
  if (b < 0.0 || b > 1.0) throw ConfigError("market.b", "must lie in [0, 1]");
  return UtilityKernel{std::move(U), std::move(U_T), growth, b};
}

namespace {

void check_positive(double y, double h) {
  if (!(y > 0.0)) throw DomainError("marginal-utility argument must be positive");
  if (!(h > 0.0)) throw DomainError("habit level must be positive");
}

}  // namespace

double capped_consumption(const UtilityKernel& k, double y, double h) {
  check_positive(y, h);
  if (y <= k.U.marginal(h)) return h;
  double bh = k.b * h;
  if (bh > 0.0 ? y >= k.U.marginal(bh) : y >= k.U.marginal_at_zero()) return bh;
  return k.U.marginal_inverse(y);
}

double hat_U(const UtilityKernel& k, double y, double h) {
  double c = capped_consumption(k, y, h);
  return k.U.value(c) - c * y;
}

double hat_U_y(const UtilityKernel& k, double y, double h) { return -capped_consumption(k, y, h); }

double f_source(const UtilityKernel& k, double z, double h) {
  if (!(h > 0.0)) throw DomainError("habit level must be positive");
  double y = std::exp(z);
  double yh = k.U.marginal(h);
  if (y <= yh) return yh - y;
  double bh = k.b * h;
  double yl = bh > 0.0 ? k.U.marginal(bh) : k.U.marginal_at_zero();
  if (y >= yl) return k.b * (yl - y);
  return 0.0;
}

double tilde_U(const UtilityKernel& k, double y) {
  if (!(y > 0.0)) throw DomainError("tilde_U requires y > 0");
  if (y >= k.U.marginal_at_zero()) return k.U.value_at_zero();
  if (auto* t = std::get_if<TableUtility>(&k.U.rep()); t && y < t->marginal.back())
    throw UnboundedTransformError("maximizer lies beyond the last utility table knot");
  double c = k.U.marginal_inverse(y);
  return k.U.value(c) - c * y;
}

double tilde_U_T(const UtilityKernel& k, double y) {
  if (!(y > 0.0)) throw DomainError("tilde_U_T requires y > 0");
  if (k.U_T.is_zero()) return 0.0;
  if (y >= k.U_T.marginal_at_zero()) return k.U_T.value_at_zero();
  if (auto* t = std::get_if<TableUtility>(&k.U_T.rep()); t && y < t->marginal.back())
    throw UnboundedTransformError("maximizer lies beyond the last terminal-utility table knot");
  double x = k.U_T.marginal_inverse(y);
  return k.U_T.value(x) - x * y;
}

double tilde_U_T_y(const UtilityKernel& k, double y) {
  if (!(y > 0.0)) throw DomainError("tilde_U_T requires y > 0");
  if (k.U_T.is_zero() || y >= k.U_T.marginal_at_zero()) return 0.0;
  return -k.U_T.marginal_inverse(y);
}

double tilde_U_T_yy(const UtilityKernel& k, double y) {
  if (!(y > 0.0)) throw DomainError("tilde_U_T requires y > 0");
  if (k.U_T.is_zero() || y >= k.U_T.marginal_at_zero()) return 0.0;
  return -1.0 / k.U_T.second_derivative(k.U_T.marginal_inverse(y));
}

std::vector<std::string> check_kernel(const UtilityKernel& k, const std::vector<double>& c_samples) {
  std::vector<std::string> failures;
  auto check_one = [&](const Utility& u, const std::string& name, bool terminal) {
    double prev = kInf;
    for (double c : c_samples) {
      double m = u.marginal(c);
      if (!(m > 0.0)) failures.push_back(name + ": marginal utility not positive at c=" + std::to_string(c));
      if (!(m < prev)) failures.push_back(name + ": marginal utility not decreasing at c=" + std::to_string(c));
      prev = m;
      double back = u.marginal_inverse(m);
      if (std::abs(back - c) > 1e-10 * c)
        failures.push_back(name + ": marginal inverse round trip off at c=" + std::to_string(c));
      const auto& g = k.growth;
      if (u.value(c) > g.K * (std::pow(c, 1.0 - g.gamma) / (1.0 - g.gamma) + 1.0))
        failures.push_back(name + ": upper growth bound violated at c=" + std::to_string(c));
      if (terminal && u.value(c) < g.K * (std::pow(c, 1.0 - g.theta) / (1.0 - g.theta) - 1.0))
        failures.push_back(name + ": lower growth bound violated at x=" + std::to_string(c));
    }
  };
  check_one(k.U, "U", false);
  if (!k.U_T.is_zero()) check_one(k.U_T, "U_T", true);
  return failures;
}

}  // namespace ratchet
