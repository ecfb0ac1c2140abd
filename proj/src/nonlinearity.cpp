#include "dampwave/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dampwave {

std::string to_string(Family f) {
  switch (f) {
    case Family::Arctan: return "ARCTAN";
    case Family::Rational: return "RATIONAL";
    case Family::KernelConst: return "KERNEL_CONST";
    case Family::CustomTable: return "CUSTOM_TABLE";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "ARCTAN") return Family::Arctan;
  if (s == "RATIONAL") return Family::Rational;
  if (s == "KERNEL_CONST") return Family::KernelConst;
  if (s == "CUSTOM_TABLE") return Family::CustomTable;
  throw std::invalid_argument("unknown nonlinearity family '" + s + "'");
}

NonlinearitySpec NonlinearitySpec::arctan(double a, double b, double e, double period) {
  NonlinearitySpec f;
  f.family = Family::Arctan;
  f.a = a;
  f.b = b;
  f.e = e;
  f.period = period;
  f.validate();
  return f;
}

NonlinearitySpec NonlinearitySpec::rational(double a, double period) {
  NonlinearitySpec f;
  f.family = Family::Rational;
  f.a = a;
  f.b = 0.0;
  f.period = period;
  f.validate();
  return f;
}

NonlinearitySpec NonlinearitySpec::kernel_const(CoeffVec y0, double length, double period) {
  NonlinearitySpec f;
  f.family = Family::KernelConst;
  f.y0 = std::move(y0);
  f.length = length;
  f.period = period;
  f.validate();
  return f;
}

NonlinearitySpec NonlinearitySpec::custom_table(std::vector<double> s, std::vector<double> v, double period) {
  NonlinearitySpec f;
  f.family = Family::CustomTable;
  f.table_s = std::move(s);
  f.table_f = std::move(v);
  f.period = period;
  f.validate();
  return f;
}

NonlinearitySpec NonlinearitySpec::zero(double period) { return arctan(0.0, 1.0, 0.0, period); }

void NonlinearitySpec::validate() const {
  if (!(period > 0.0) || !std::isfinite(period)) throw std::invalid_argument("period T must be positive");
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(e)) {
    throw std::invalid_argument("nonlinearity parameters must be finite");
  }
  if (family == Family::KernelConst) {
    if (y0.size() == 0) throw std::invalid_argument("KERNEL_CONST needs y0 coefficients");
    if (!(length > 0.0)) throw std::invalid_argument("KERNEL_CONST needs the domain length");
    if (!y0.allFinite()) throw std::invalid_argument("y0 coefficients must be finite");
  }
  if (family == Family::CustomTable) {
    if (table_s.size() < 2 || table_s.size() != table_f.size()) {
      throw std::invalid_argument("CUSTOM_TABLE needs at least two (s, f) pairs of equal length");
    }
    for (std::size_t j = 1; j < table_s.size(); ++j) {
      if (!(table_s[j] > table_s[j - 1])) throw std::invalid_argument("CUSTOM_TABLE knots must increase");
    }
    for (double v : table_f) {
      if (!std::isfinite(v)) throw std::invalid_argument("CUSTOM_TABLE values must be finite");
    }
  }
}

double NonlinearitySpec::time_term(double t) const {
  if (e == 0.0) return 0.0;
  // Reduce t to [0, T) first so f(t + T) = f(t) holds exactly.
  double r = std::fmod(t, period);
  if (r < 0.0) r += period;
  return e * std::cos(2.0 * std::numbers::pi * r / period);
}

double NonlinearitySpec::table_eval(double s) const {
  if (s <= table_s.front()) return table_f.front();
  if (s >= table_s.back()) return table_f.back();
  const auto it = std::upper_bound(table_s.begin(), table_s.end(), s);
  const std::size_t j = static_cast<std::size_t>(it - table_s.begin());
  const double w = (s - table_s[j - 1]) / (table_s[j] - table_s[j - 1]);
  return (1.0 - w) * table_f[j - 1] + w * table_f[j];
}

double NonlinearitySpec::eval(double t, double x, double s) const {
  switch (family) {
    case Family::Arctan: return a * std::atan(b * s) + time_term(t);
    case Family::Rational: return a * s / (1.0 + s * s);
    case Family::KernelConst: {
      double acc = 0.0;
      const double amp = std::sqrt(2.0 / length);
      for (Eigen::Index i = 0; i < y0.size(); ++i) {
        acc += y0(i) * amp * std::sin(static_cast<double>(i + 1) * std::numbers::pi * x / length);
      }
      return acc;
    }
    case Family::CustomTable: return table_eval(s);
  }
  return 0.0;
}

double NonlinearitySpec::bound() const {
  switch (family) {
    case Family::Arctan: return std::abs(a) * std::numbers::pi / 2.0 + std::abs(e);
    case Family::Rational: return std::abs(a) / 2.0;
    case Family::KernelConst: return y0.cwiseAbs().sum() * std::sqrt(2.0 / length);
    case Family::CustomTable: {
      double m = 0.0;
      for (double v : table_f) m = std::max(m, std::abs(v));
      return m;
    }
  }
  return 0.0;
}

double NonlinearitySpec::lipschitz() const {
  switch (family) {
    case Family::Arctan: return std::abs(a * b);
    case Family::Rational: return std::abs(a);  // |d/ds s/(1+s^2)| <= 1, attained at s = 0
    case Family::KernelConst: return 0.0;
    case Family::CustomTable: {
      double l = 0.0;
      for (std::size_t j = 1; j < table_s.size(); ++j) {
        l = std::max(l, std::abs(table_f[j] - table_f[j - 1]) / (table_s[j] - table_s[j - 1]));
      }
      return l;
    }
  }
  return 0.0;
}

double NonlinearitySpec::f_plus(double t, double x) const {
  switch (family) {
    case Family::Arctan: {
      const double sb = (b > 0.0) ? 1.0 : (b < 0.0 ? -1.0 : 0.0);
      return a * sb * std::numbers::pi / 2.0 + time_term(t);
    }
    case Family::Rational: return 0.0;
    case Family::KernelConst: return eval(t, x, 0.0);
    case Family::CustomTable: return table_f.back();
  }
  return 0.0;
}

double NonlinearitySpec::f_minus(double t, double x) const {
  switch (family) {
    case Family::Arctan: {
      const double sb = (b > 0.0) ? 1.0 : (b < 0.0 ? -1.0 : 0.0);
      return -a * sb * std::numbers::pi / 2.0 + time_term(t);
    }
    case Family::Rational: return 0.0;
    case Family::KernelConst: return eval(t, x, 0.0);
    case Family::CustomTable: return table_f.front();
  }
  return 0.0;
}

bool NonlinearitySpec::has_infty_limit() const {
  switch (family) {
    case Family::Arctan: return a == 0.0 && e == 0.0;
    case Family::Rational: return true;
    case Family::KernelConst: return y0.isZero(0.0);
    case Family::CustomTable: return table_f.front() == 0.0 && table_f.back() == 0.0;
  }
  return false;
}

double NonlinearitySpec::f_infty(double /*t*/, double /*x*/) const {
  if (!has_infty_limit()) {
    throw std::invalid_argument("f_infty is undefined for this " + to_string(family) + " nonlinearity");
  }
  return family == Family::Rational ? a : 0.0;
}

}  // namespace dampwave
