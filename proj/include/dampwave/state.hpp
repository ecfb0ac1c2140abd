#pragma once

#include <stdexcept>

#include "dampwave/basis.hpp"

namespace dampwave {

/// Point (u, u_t) of the phase space E = X^alpha x X in eigen-coordinates:
/// mode i carries the pair (a_i, b_i).
struct StateE {
  CoeffVec a;
  CoeffVec b;

  static StateE zeros(Eigen::Index n) { return {CoeffVec::Zero(n), CoeffVec::Zero(n)}; }

  Eigen::Index size() const { return a.size(); }

  void check_shape(Eigen::Index n) const {
    if (a.size() != n || b.size() != n) throw std::invalid_argument("state shape does not match basis");
  }

  /// Flattened (a_1..a_N, b_1..b_N), the coordinate order used by the Newton solvers and CSV files.
  Eigen::VectorXd stacked() const {
    Eigen::VectorXd out(a.size() + b.size());
    out << a, b;
    return out;
  }
  static StateE unstack(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size() / 2;
    return {v.head(n), v.tail(n)};
  }

  StateE operator+(const StateE& o) const { return {a + o.a, b + o.b}; }
  StateE operator-(const StateE& o) const { return {a - o.a, b - o.b}; }
  StateE operator*(double s) const { return {a * s, b * s}; }
};

}  // namespace dampwave
