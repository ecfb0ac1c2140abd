#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "dampwave/errors.hpp"
#include "dampwave/evolution.hpp"

using namespace dampwave;

namespace {

Decomposition resonant(int n, double c, int k) {
  return decompose(DampedConfig::resonant(build_dirichlet_laplacian(std::numbers::pi, n, std::max(64, 4 * n)), c, k));
}

StateE random_state(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  StateE w = StateE::zeros(n);
  for (int i = 0; i < n; ++i) {
    w.a(i) = g(rng);
    w.b(i) = g(rng);
  }
  return w;
}

IntegratorSettings fixed_step(Scheme s, double h) {
  IntegratorSettings st;
  st.scheme = s;
  st.h = h;
  st.error_control = false;
  return st;
}

// int_0^T e^{-sM} ds g from the exponential of the augmented 3x3 matrix.
Eigen::Vector2d integral_oracle(const Eigen::Matrix2d& M, const Eigen::Vector2d& g, double T) {
  Eigen::Matrix3d aug = Eigen::Matrix3d::Zero();
  aug.topLeftCorner<2, 2>() = -M;
  aug.topRightCorner<2, 1>() = g;
  const Eigen::Matrix3d E = (T * aug).exp();
  return E.topRightCorner<2, 1>();
}

}  // namespace

TEST_CASE("Nemitskii operator") {
  auto basis = build_dirichlet_laplacian(std::numbers::pi, 8, 64);
  std::mt19937_64 rng(1);
  const CoeffVec u = random_state(8, rng).a;
  CHECK(nemitskii(NonlinearitySpec::zero(1.0), 0.3, u, *basis).norm() == 0.0);

  const NonlinearitySpec k2 = NonlinearitySpec::kernel_const(CoeffVec::Unit(8, 1), std::numbers::pi, 1.0);
  CHECK((nemitskii(k2, 0.3, u, *basis) - CoeffVec::Unit(8, 1)).norm() < 1e-12);

  const NonlinearitySpec at = NonlinearitySpec::arctan(1.0, 1.0, 0.1, 1.0);
  for (int j = 0; j < 20; ++j) {
    const CoeffVec v = random_state(8, rng, 10.0).a;
    CHECK(h_norm(nemitskii(at, 0.1 * j, v, *basis)) <= at.bound() * std::sqrt(std::numbers::pi) + 1e-10);
  }

  // Large amplitude: atan(A phi_1) -> (pi/2) sign(phi_1). Oracle: the same quadrature applied to the limit profile.
  const NonlinearitySpec at0 = NonlinearitySpec::arctan(1.0, 1.0, 0.0, 1.0);
  CoeffVec limit = CoeffVec::Zero(8);
  for (int i = 1; i <= 8; ++i) {
    for (int j = 0; j < basis->grid_size(); ++j) {
      const double x = basis->nodes()(j);
      const double sign = std::sin(x) > 0.0 ? 1.0 : -1.0;
      limit(i - 1) += basis->weights()(j) * (std::numbers::pi / 2.0) * sign *
                      std::sqrt(2.0 / std::numbers::pi) * std::sin(i * x);
    }
  }
  const double err2 = (nemitskii(at0, 0.0, 1e2 * CoeffVec::Unit(8, 0), *basis) - limit).norm();
  const double err5 = (nemitskii(at0, 0.0, 1e5 * CoeffVec::Unit(8, 0), *basis) - limit).norm();
  CHECK(err5 < 1e-4);
  // The gap near the zeros of phi_1 closes like 1 / amplitude.
  CHECK(err2 / err5 == doctest::Approx(1e3).epsilon(0.02));
}

TEST_CASE("settings validation") {
  IntegratorSettings st;
  st.h = 0.2;
  CHECK_THROWS_AS(st.validate(1.0), std::invalid_argument);
  st.h = 0.125;
  CHECK_NOTHROW(st.validate(1.0));
  st.tol = 0.0;
  CHECK_THROWS_AS(st.validate(1.0), std::invalid_argument);
  for (Scheme s : {Scheme::ExpEuler, Scheme::ExpMidpoint, Scheme::Rk4Ref}) CHECK(scheme_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(scheme_from_string("EULER"), std::invalid_argument);
}

TEST_CASE("homogeneous steps are the semigroup") {
  const Decomposition dec = resonant(8, 0.5, 2);
  std::mt19937_64 rng(2);
  const StateE w = random_state(8, rng);
  const NonlinearitySpec f0 = NonlinearitySpec::zero(1.0);
  for (Scheme s : {Scheme::ExpEuler, Scheme::ExpMidpoint}) {
    const StateE got = mild_step(w, 0.0, 1.0 / 64.0, f0, dec, fixed_step(s, 1.0 / 64.0));
    CHECK((got - semigroup(dec, w, 1.0 / 64.0)).stacked().norm() < 1e-12);
  }
  const StateE phi = poincare(w, f0, dec, IntegratorSettings{});
  CHECK((phi - semigroup(dec, w, 1.0)).stacked().norm() < 1e-10);
}

TEST_CASE("constant forcing on the kernel mode matches the scalar closed form") {
  const Decomposition dec = resonant(4, 0.5, 1);
  const double a = 0.5 * 1.0;  // c lambda
  const NonlinearitySpec f = NonlinearitySpec::kernel_const(CoeffVec::Unit(4, 0), std::numbers::pi, 1.0);
  StateE w = StateE::zeros(4);
  w.a(0) = 0.3;
  w.b(0) = -0.7;
  const double h = 0.1;
  const double E = std::exp(-a * h);
  const double v = w.b(0) * E + (1.0 - E) / a;
  const double u = w.a(0) + w.b(0) * (1.0 - E) / a + h / a - (1.0 - E) / (a * a);
  for (Scheme s : {Scheme::ExpEuler, Scheme::ExpMidpoint}) {
    const StateE got = mild_step(w, 0.0, h, f, dec, fixed_step(s, h));
    CHECK(std::abs(got.a(0) - u) < 1e-10);
    CHECK(std::abs(got.b(0) - v) < 1e-10);
  }
}

TEST_CASE("time-independent forcing matches variation of constants") {
  const Decomposition dec = resonant(6, 0.5, 2);
  CoeffVec y0(6);
  y0 << 0.4, -1.0, 0.3, 0.0, 0.2, -0.1;
  const NonlinearitySpec f = NonlinearitySpec::kernel_const(y0, std::numbers::pi, 1.0);
  std::mt19937_64 rng(3);
  const StateE w0 = random_state(6, rng);
  const Trajectory tr = integrate(w0, 1.0, f, dec, fixed_step(Scheme::ExpEuler, 1.0 / 16.0));
  for (int i = 0; i < 6; ++i) {
    const Eigen::Matrix2d& M = dec.block(i).matrix();
    const Eigen::Vector2d expect =
        (-M).exp() * Eigen::Vector2d(w0.a(i), w0.b(i)) + integral_oracle(M, Eigen::Vector2d(0.0, y0(i)), 1.0);
    CHECK(std::abs(tr.final_state().a(i) - expect(0)) < 1e-9);
    CHECK(std::abs(tr.final_state().b(i) - expect(1)) < 1e-9);
  }
}

TEST_CASE("exponential Euler local error is second order") {
  const Decomposition dec = resonant(8, 0.5, 1);
  const NonlinearitySpec f = NonlinearitySpec::arctan(1.0, 1.0, 0.1, 1.0);
  std::mt19937_64 rng(4);
  const StateE w = random_state(8, rng);
  auto gap = [&](double h) {
    const IntegratorSettings st = fixed_step(Scheme::ExpEuler, h);
    const StateE one = mild_step(w, 0.2, h, f, dec, st);
    const StateE two = mild_step(mild_step(w, 0.2, h / 2, f, dec, st), 0.2 + h / 2, h / 2, f, dec, st);
    return e_norm(one - two, dec);
  };
  const double r = gap(1.0 / 32.0) / gap(1.0 / 64.0);
  CHECK(r == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("E_+ decay without forcing") {
  const Decomposition dec = resonant(8, 0.5, 1);
  std::mt19937_64 rng(5);
  const StateE z = project(random_state(8, rng), Projection::Qplus, dec);
  const Trajectory tr = integrate(z, 3.0, NonlinearitySpec::zero(1.0), dec, IntegratorSettings{});
  const double n0 = e_norm(z, dec);
  for (std::size_t j = 0; j < tr.times.size(); j += 37) {
    CHECK(e_norm(tr.states[j], dec) <= dec.M_const() * std::exp(-dec.delta() * tr.times[j]) * n0 * (1.0 + 1e-9));
  }
  // Contraction of the Q_+ part of the linear Poincare map.
  const StateE w1 = random_state(8, rng);
  const StateE w2 = w1 + z;
  const NonlinearitySpec f0 = NonlinearitySpec::zero(1.0);
  const StateE d = project(poincare(w2, f0, dec, {}) - poincare(w1, f0, dec, {}), Projection::Qplus, dec);
  CHECK(e_norm(d, dec) <= dec.M_const() * std::exp(-dec.delta()) * n0 * (1.0 + 1e-9));
}

TEST_CASE("exponential Euler agrees with the RK4 reference") {
  const Decomposition dec = resonant(8, 0.5, 1);
  const NonlinearitySpec f = NonlinearitySpec::arctan(1.0, 1.0, 0.1, 1.0);
  const StateE w0 = StateE::zeros(8);
  const StateE e = integrate(w0, 1.0, f, dec, fixed_step(Scheme::ExpEuler, std::ldexp(1.0, -17))).final_state();
  const StateE r = integrate(w0, 1.0, f, dec, fixed_step(Scheme::Rk4Ref, 1.0 / 4096.0)).final_state();
  CHECK(e_norm(e - r, dec) < 1e-6);
}

TEST_CASE("flow composition and determinism") {
  const Decomposition dec = resonant(8, 0.5, 1);
  const NonlinearitySpec f = NonlinearitySpec::arctan(1.0, 1.0, 0.1, 1.0);
  std::mt19937_64 rng(7);
  const StateE w0 = random_state(8, rng);
  const IntegratorSettings st = fixed_step(Scheme::ExpMidpoint, 1.0 / 256.0);
  const StateE mid = integrate(w0, 1.0, f, dec, st).final_state();
  const StateE split = integrate(mid, 2.0, f, dec, st, 1.0).final_state();
  const StateE whole = integrate(w0, 2.0, f, dec, st).final_state();
  CHECK(e_norm(split - whole, dec) < 1e-9);

  const Trajectory a = integrate(w0, 1.0, f, dec, IntegratorSettings{});
  const Trajectory b = integrate(w0, 1.0, f, dec, IntegratorSettings{});
  REQUIRE(a.times.size() == b.times.size());
  bool identical = true;
  for (std::size_t j = 0; j < a.times.size(); ++j) {
    identical = identical && a.times[j] == b.times[j] && a.states[j].a == b.states[j].a && a.states[j].b == b.states[j].b;
  }
  CHECK(identical);
  CHECK(a.times.front() == 0.0);
  CHECK(a.error_estimate <= 1e-8);
}

TEST_CASE("failures are reported") {
  const Decomposition dec = resonant(4, 0.5, 1);
  const NonlinearitySpec f = NonlinearitySpec::arctan(1.0, 1.0, 0.1, 1.0);
  StateE huge = StateE::zeros(4);
  huge.b(0) = 1e200;
  try {
    integrate(huge, 1.0, f, dec, IntegratorSettings{});
    FAIL("expected overflow");
  } catch (const NumericalFailure& e) {
    CHECK(e.code() == "OVERFLOW");
  }
  IntegratorSettings tight;
  tight.h = 1.0 / 8.0;
  tight.tol = 1e-15;
  tight.max_halvings = 1;
  std::mt19937_64 rng(8);
  try {
    integrate(random_state(4, rng), 1.0, f, dec, tight);
    FAIL("expected tolerance failure");
  } catch (const NumericalFailure& e) {
    CHECK(e.code() == "TOL_NOT_MET");
  }
}

TEST_CASE("homotopy end points and the kernel flow") {
  const Decomposition dec = resonant(8, 0.5, 1);
  const NonlinearitySpec f = NonlinearitySpec::arctan(1.0, 1.0, 0.1, 1.0);
  std::mt19937_64 rng(9);
  const StateE w0 = random_state(8, rng);
  const IntegratorSettings st = fixed_step(Scheme::ExpMidpoint, 1.0 / 256.0);

  CHECK(e_norm(poincare_homotopy(1.0, w0, f, dec, st) - poincare(w0, f, dec, st), dec) < 1e-12);
  CHECK_THROWS_AS(poincare_homotopy(1.5, w0, f, dec, st), std::invalid_argument);

  const StateE psi0 = poincare_homotopy(0.0, w0, f, dec, st);
  const StateE lin = semigroup(dec, w0, 1.0);
  CHECK(e_norm(project(psi0, Projection::Qplus, dec) - project(lin, Projection::Qplus, dec), dec) < 1e-10);

  Eigen::VectorXd k0(2);
  k0 << w0.a(0), w0.b(0);
  const Eigen::VectorXd theta = kernel_flow(1.0, k0, f, dec, st);
  CHECK(std::abs(theta(0) - psi0.a(0)) < 1e-9);
  CHECK(std::abs(theta(1) - psi0.b(0)) < 1e-9);

  // No forcing, mu = 1: the kernel block exponential.
  const Eigen::VectorXd free = kernel_flow(1.0, k0, NonlinearitySpec::zero(1.0), dec, st);
  Eigen::Matrix2d A0;
  A0 << 0.0, -1.0, 0.0, 0.5;
  CHECK((free - (-A0).exp() * k0).norm() < 1e-12);

  // Theta^mu - id = O(mu).
  const double d1 = (kernel_flow(1e-2, k0, f, dec, st) - k0).norm();
  const double d2 = (kernel_flow(5e-3, k0, f, dec, st) - k0).norm();
  CHECK(d1 / d2 == doctest::Approx(2.0).epsilon(0.02));
  CHECK_THROWS_AS(kernel_flow(0.0, k0, f, dec, st), std::invalid_argument);
}

TEST_CASE("drift of a kernel forcing grows at rate ||y0||^2") {
  const Decomposition dec = resonant(8, 0.5, 1);
  const IntegratorSettings st{};
  for (double amp : {1.0, 0.6}) {
    const NonlinearitySpec f = NonlinearitySpec::kernel_const(amp * CoeffVec::Unit(8, 0), std::numbers::pi, 1.0);
    const Trajectory tr = integrate(StateE::zeros(8), 10.0, f, dec, st);
    const double slope = fitted_slope(tr.times, drift_functional(tr, f.y0, dec));
    CHECK(std::abs(slope - amp * amp) < 1e-6);
  }
  const Trajectory rest = integrate(StateE::zeros(8), 2.0, NonlinearitySpec::zero(1.0), dec, st);
  for (double d : drift_functional(rest, CoeffVec::Unit(8, 0), dec)) CHECK(d == 0.0);
  CHECK_THROWS_AS(drift_functional(rest, CoeffVec::Unit(8, 1), dec), std::invalid_argument);
}
