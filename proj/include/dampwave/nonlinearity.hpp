#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dampwave/basis.hpp"

namespace dampwave {

enum class Family { Arctan, Rational, KernelConst, CustomTable };
std::string to_string(Family f);
Family family_from_string(const std::string& s);

/// Bounded, Lipschitz, T-periodic scalar nonlinearity f(t, x, s).
///
///   Arctan       a*atan(b*s) + e*cos(2 pi t / T)
///   Rational     a*s / (1 + s^2)
///   KernelConst  y0(x) = sum_i c_i phi_i(x), independent of (t, s)
///   CustomTable  piecewise linear in s through (s_j, f_j), constant beyond the ends
///
/// f == 0 is Arctan with a = e = 0.
struct NonlinearitySpec {
  Family family = Family::Arctan;
  double a = 1.0;
  double b = 1.0;
  double e = 0.0;
  double period = 1.0;

  CoeffVec y0;          // KernelConst: eigen-coefficients of y0
  double length = 0.0;  // KernelConst: domain length the coefficients refer to

  std::vector<double> table_s;  // CustomTable knots, strictly increasing
  std::vector<double> table_f;

  static NonlinearitySpec arctan(double a, double b, double e, double period);
  static NonlinearitySpec rational(double a, double period);
  static NonlinearitySpec kernel_const(CoeffVec y0, double length, double period);
  static NonlinearitySpec custom_table(std::vector<double> s, std::vector<double> f, double period);
  static NonlinearitySpec zero(double period);

  void validate() const;

  double eval(double t, double x, double s) const;

  /// sup |f|.
  double bound() const;
  /// Lipschitz constant in s.
  double lipschitz() const;

  /// f_+(t, x) = lim_{s -> +inf} f, f_-(t, x) = lim_{s -> -inf} f.
  bool has_pm_limits() const { return true; }
  double f_plus(double t, double x) const;
  double f_minus(double t, double x) const;

  /// f_inf(t, x) = lim_{|s| -> inf} f(t, x, s) s, when the limit is finite.
  bool has_infty_limit() const;
  double f_infty(double t, double x) const;

  /// True when f does not depend on s; the Nemitskii operator is then a fixed element of X.
  bool state_independent() const { return family == Family::KernelConst; }

 private:
  double time_term(double t) const;
  double table_eval(double s) const;
};

}  // namespace dampwave
