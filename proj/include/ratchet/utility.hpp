#pragma once

#include <string>
#include <variant>
#include <vector>

namespace ratchet {

/// U(c) = c^{1-gamma} / (1-gamma), or ln c when gamma = 1 is requested through LogUtility.
struct Crra {
  double gamma;
};

/// U(c) = ln c.
struct LogUtility {};

/// U(c) = -e^{-alpha c} / alpha. Finite marginal utility at zero.
struct Cara {
  double alpha;
};

/// Identically zero utility. Only admissible as a terminal utility.
struct ZeroUtility {};

/// Marginal utility tabulated on increasing knots and joined by a monotone cubic.
/// The utility is the exact integral of that cubic, anchored at value0 on the first knot.
struct TableUtility {
  std::vector<double> c;         ///< strictly increasing, positive
  std::vector<double> marginal;  ///< strictly decreasing, positive
  double value0 = 0.0;           ///< U(c.front())
  std::vector<double> slope;     ///< Fritsch-Carlson slopes of the marginal, filled by make_table_utility
  std::vector<double> cumulative;  ///< U at each knot, filled by make_table_utility
};

TableUtility make_table_utility(std::vector<double> c, std::vector<double> marginal, double value0);

/// A concave increasing utility drawn from a closed set of built-ins plus one tabulated form.
class Utility {
 public:
  using Rep = std::variant<Crra, LogUtility, Cara, ZeroUtility, TableUtility>;

  Utility() : rep_(ZeroUtility{}) {}
  Utility(Rep rep);  // NOLINT(google-explicit-constructor)

  double value(double c) const;
  double marginal(double c) const;
  /// (U')^{-1}(y). Throws DomainError outside (U'(+inf), U'(0+)).
  double marginal_inverse(double y) const;
  double second_derivative(double c) const;
  /// U'(0+); +inf for CRRA and log.
  double marginal_at_zero() const;
  /// U(0+); -inf when unbounded below.
  double value_at_zero() const;

  bool is_zero() const { return std::holds_alternative<ZeroUtility>(rep_); }
  bool is_crra() const { return std::holds_alternative<Crra>(rep_); }
  /// Relative risk aversion of a CRRA or log utility; throws otherwise.
  double crra_gamma() const;
  std::string kind() const;
  const Rep& rep() const { return rep_; }

 private:
  Rep rep_;
};

/// Growth constants of the standing utility assumptions: U(c) <= K (c^{1-gamma}/(1-gamma) + 1)
/// and the terminal lower bound U_T(x) >= K (x^{1-theta}/(1-theta) - 1).
struct GrowthConstants {
  double gamma = 0.5;
  double theta = 2.0;
  double K = 1.0;
};

/// Running and terminal utilities plus the drawdown fraction they are paired with.
struct UtilityKernel {
  Utility U;
  Utility U_T;
  GrowthConstants growth;
  double b = 0.25;
};

UtilityKernel make_kernel(Utility U, Utility U_T, GrowthConstants growth, double b);

/// max over c in [bh, h] of U(c) - c y.
double hat_U(const UtilityKernel& k, double y, double h);
/// d/dy of hat_U: minus the maximizing consumption.
double hat_U_y(const UtilityKernel& k, double y, double h);
/// Maximizer of hat_U: consumption clamped to [bh, h].
double capped_consumption(const UtilityKernel& k, double y, double h);
/// d/dh of hat_U(e^z, h); the source of the obstacle problem.
double f_source(const UtilityKernel& k, double z, double h);
/// sup over c > 0 of U(c) - c y.
double tilde_U(const UtilityKernel& k, double y);
/// sup over x >= 0 of U_T(x) - x y.
double tilde_U_T(const UtilityKernel& k, double y);
/// d/dy and d2/dy2 of tilde_U_T.
double tilde_U_T_y(const UtilityKernel& k, double y);
double tilde_U_T_yy(const UtilityKernel& k, double y);

/// Sampled checks of the standing utility assumptions. Empty result means all hold.
std::vector<std::string> check_kernel(const UtilityKernel& k, const std::vector<double>& c_samples);

}  // namespace ratchet
