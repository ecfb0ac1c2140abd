#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "dampwave/degree.hpp"
#include "dampwave/errors.hpp"

using namespace dampwave;
using Vec = Eigen::VectorXd;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

// Complex polynomial as a planar field.
VectorField complex_field(std::function<std::complex<double>(std::complex<double>)> p) {
  return [p](const Vec& x) {
    const std::complex<double> w = p({x(0), x(1)});
    return v2(w.real(), w.imag());
  };
}

Box box_of(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  Box b{Vec(static_cast<Eigen::Index>(lo.size())), Vec(static_cast<Eigen::Index>(hi.size()))};
  int i = 0;
  for (double v : lo) b.lo(i++) = v;
  i = 0;
  for (double v : hi) b.hi(i++) = v;
  return b;
}

Decomposition resonant(int n, double c, int k) {
  return decompose(DampedConfig::resonant(build_dirichlet_laplacian(std::numbers::pi, n, std::max(64, 4 * n)), c, k));
}

DegreeSetup arctan_setup(double a) {
  DegreeSetup s;
  s.c = 0.5;
  s.k = 1;
  s.f = NonlinearitySpec::arctan(a, 1.0, 0.1, 1.0);
  s.integrator.h = 1.0 / 256.0;
  s.seed = 7;
  return s;
}

}  // namespace

TEST_CASE("normalization and orientation") {
  VectorField id = [](const Vec& x) { return x; };
  VectorField neg = [](const Vec& x) { return Vec(-x); };
  for (int d = 1; d <= 3; ++d) {
    const DegreeResult r = brouwer_degree(id, Box::cube(d, 1.0));
    CHECK(r.value == 1);
    CHECK(brouwer_degree(neg, Box::cube(d, 1.0)).value == (d % 2 ? -1 : 1));
  }
  CHECK(brouwer_degree(id, Box::cube(1, 1.0)).method == DegreeMethod::Sign1D);
  CHECK(brouwer_degree(id, Box::cube(2, 1.0)).method == DegreeMethod::Winding2D);
  const DegreeResult r3 = brouwer_degree(id, Box::cube(3, 1.0));
  CHECK(r3.method == DegreeMethod::RegularSum);
  CHECK(r3.rigor == Rigor::Heuristic);
  // 0 outside the box: no zeros, degree 0.
  CHECK(brouwer_degree(id, box_of({0.5, 0.5}, {1.0, 1.0})).value == 0);
}

TEST_CASE("winding of z^2 and z^3") {
  const DegreeResult sq = brouwer_degree(complex_field([](auto z) { return z * z; }), Box::cube(2, 1.0));
  CHECK(sq.value == 2);
  CHECK(std::abs(sq.total_winding - 2.0) < 1e-6);
  CHECK(brouwer_degree(complex_field([](auto z) { return z * z * z; }), Box::cube(2, 1.0)).value == 3);
  CHECK(brouwer_degree(complex_field([](auto z) { return std::conj(z); }), Box::cube(2, 1.0)).value == -1);
}

TEST_CASE("additivity over sub-boxes") {
  VectorField q1 = [](const Vec& x) { return Vec::Constant(1, x(0) * x(0) - 0.25); };
  CHECK(brouwer_degree(q1, box_of({-1.0}, {1.0})).value == 0);
  CHECK(brouwer_degree(q1, box_of({-1.0}, {0.0})).value == -1);
  CHECK(brouwer_degree(q1, box_of({0.0}, {1.0})).value == 1);

  VectorField q2 = complex_field([](auto z) { return z * z - 0.25; });
  const int whole = brouwer_degree(q2, Box::cube(2, 1.0)).value;
  const int left = brouwer_degree(q2, box_of({-1.0, -1.0}, {0.0, 1.0})).value;
  const int right = brouwer_degree(q2, box_of({0.0, -1.0}, {1.0, 1.0})).value;
  CHECK(whole == 2);
  CHECK(left == 1);
  CHECK(right == 1);
}

TEST_CASE("homotopy invariance") {
  for (int j = 0; j <= 8; ++j) {
    const double s = j / 8.0;
    VectorField h = complex_field([s](auto z) { return z * z + 0.3 * s; });
    CHECK(brouwer_degree(h, Box::cube(2, 1.0)).value == 2);
  }
}

TEST_CASE("product maps") {
  // x^3 - x/4 has degree 1 on [-1, 1] with three regular zeros.
  auto cubic = [](double x) { return x * x * x - 0.25 * x; };
  VectorField c1 = [&](const Vec& x) { return Vec::Constant(1, cubic(x(0))); };
  CHECK(brouwer_degree(c1, Box::cube(1, 1.0)).value == 1);

  VectorField c_neg = [&](const Vec& x) { return v2(cubic(x(0)), -x(1)); };
  CHECK(brouwer_degree(c_neg, Box::cube(2, 1.0)).value == -1);

  VectorField neg_rot = [](const Vec& x) { return (Vec(3) << -x(0), x(1) - x(2), x(1) + x(2)).finished(); };
  CHECK(brouwer_degree(neg_rot, Box::cube(3, 1.0)).value == -1);

  VectorField c_sq = [&](const Vec& x) {
    return (Vec(3) << cubic(x(0)), x(1) * x(1) - x(2) * x(2) - 0.25, 2.0 * x(1) * x(2)).finished();
  };
  CHECK(brouwer_degree(c_sq, Box::cube(3, 1.0)).value == 2);
}

TEST_CASE("sign sum equals winding in the plane") {
  VectorField q = complex_field([](auto z) { return (z - 0.3) * (z + std::complex<double>(0.2, 0.4)) * std::conj(z - std::complex<double>(0.0, -0.5)); });
  const DegreeResult w = brouwer_degree(q, Box::cube(2, 1.0));
  NewtonOptions opts;
  opts.starts = 200;
  const std::vector<ZeroRecord> zs = multistart_newton(q, Box::cube(2, 1.0), opts);
  int sum = 0;
  for (const ZeroRecord& z : zs) {
    if (Box::cube(2, 1.0).contains(z.point)) sum += z.jacobian_sign;
    CHECK(z.residual < 1e-9);
  }
  CHECK(zs.size() == 3);
  CHECK(w.value == 1);
  CHECK(sum == w.value);
}

TEST_CASE("boundary zeros are reported") {
  VectorField edge1 = [](const Vec& x) { return Vec::Constant(1, x(0) - 1.0); };
  VectorField edge2 = [](const Vec& x) { return v2(x(0) - 1.0, x(1)); };
  auto code_of = [](const VectorField& f, const Box& b) {
    try {
      brouwer_degree(f, b);
    } catch (const NumericalFailure& e) {
      return e.code();
    }
    return std::string("none");
  };
  CHECK(code_of(edge1, Box::cube(1, 1.0)) == "BOUNDARY_ZERO");
  CHECK(code_of(edge2, Box::cube(2, 1.0)) == "BOUNDARY_ZERO");
}

TEST_CASE("averaged degree") {
  const Decomposition dec = resonant(8, 0.5, 1);
  const AveragedDegree pos = averaged_degree(NonlinearitySpec::arctan(1.0, 1.0, 0.1, 1.0), dec, 10.0);
  CHECK(pos.kernel_degree.value == 1);
  CHECK(pos.assembled == -1);
  const AveragedDegree neg = averaged_degree(NonlinearitySpec::arctan(-1.0, 1.0, 0.1, 1.0), dec, 10.0);
  CHECK(neg.kernel_degree.value == -1);
  CHECK(neg.assembled == 1);
  CHECK_THROWS_AS(averaged_degree(NonlinearitySpec::zero(1.0), dec, 10.0), NumericalFailure);
}

TEST_CASE("predicted degree") {
  const Decomposition k1 = resonant(4, 0.5, 1);
  CHECK(predicted_degree(k1, "G1") == -1);
  CHECK(predicted_degree(k1, "G2") == 1);
  const Decomposition k2 = resonant(4, 0.5, 2);
  CHECK(predicted_degree(k2, "G1") == 1);
  CHECK(predicted_degree(k2, "G2") == -1);
  CHECK_THROWS_AS(predicted_degree(k1, "LL1"), std::invalid_argument);
}

TEST_CASE("linear non-resonant degree is sign det(I - S(T))") {
  DegreeSetup s;
  s.c = 0.5;
  s.lambda = 2.5;
  s.f = NonlinearitySpec::zero(1.0);
  const int N = 4;
  const LadderEntry e = poincare_degree_at(s, N);

  // Oracle: matrix exponential of each mode block.
  double det = 1.0;
  for (int i = 1; i <= N; ++i) {
    const double li = i * i;
    Eigen::Matrix2d M;
    M << 0.0, -1.0, li - s.lambda, s.c * li;
    det *= (Eigen::Matrix2d::Identity() - (Eigen::Matrix2d(-1.0 * M)).exp()).determinant();
  }
  REQUIRE(e.fixed_points.size() == 1);
  CHECK(e.fixed_points[0].point.norm() < 1e-9);
  CHECK(e.degree == (det > 0 ? 1 : -1));
}

TEST_CASE("Poincare degree does not depend on alpha") {
  for (double a : {1.0, -1.0}) {
    DegreeSetup s = arctan_setup(a);
    s.g_samples = 200;
    std::vector<int> degrees;
    for (double alpha : {0.25, 0.5, 0.75}) {
      s.alpha = alpha;
      degrees.push_back(poincare_degree_at(s, 4).degree);
    }
    CHECK(degrees[0] == (a > 0 ? -1 : 1));
    CHECK(degrees[1] == degrees[0]);
    CHECK(degrees[2] == degrees[0]);
  }
}

TEST_CASE("averaging on planar fields") {
  CHECK_THROWS_AS(named_planar_field("SADDLE", 1.0), std::invalid_argument);
  const Box U = Box::cube(2, 2.0);
  const std::vector<std::pair<std::string, int>> expected{{"LINEAR_SINK", 1}, {"ROTATION_SINK", 1}, {"SQUARE", 2}};
  for (const auto& [name, deg] : expected) {
    const AveragingReport r = verify_kras_averaging(named_planar_field(name, 1.0), 1.0, U, default_mu_ladder());
    CHECK(r.averaged_degree == deg);
    CHECK(r.mu_star > 0.0);
    CHECK(r.agrees_below_mu_star);
    for (const AveragingEntry& e : r.entries) {
      if (!e.skipped && e.mu <= r.mu_star) CHECK(e.degree == deg);
    }
  }
}
