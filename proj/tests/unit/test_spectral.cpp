#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "dampwave/spectral.hpp"

using namespace dampwave;
using cd = std::complex<double>;

namespace {

BasisPtr pi_basis(int n) { return build_dirichlet_laplacian(std::numbers::pi, n, std::max(64, 4 * n)); }

StateE random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  StateE w = StateE::zeros(n);
  for (int i = 0; i < n; ++i) {
    w.a(i) = g(rng);
    w.b(i) = g(rng);
  }
  return w;
}

// Companion-matrix roots of mu^2 - c l_i mu + (l_i - l), sorted by real then imaginary part.
std::pair<cd, cd> oracle_roots(double li, double c, double lam) {
  Eigen::Matrix2d comp;
  comp << 0.0, -(li - lam), 1.0, c * li;
  Eigen::EigenSolver<Eigen::Matrix2d> es(comp);
  cd r0 = es.eigenvalues()(0), r1 = es.eigenvalues()(1);
  auto less = [](cd x, cd y) { return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag()); };
  if (less(r1, r0)) std::swap(r0, r1);
  return {r0, r1};
}

}  // namespace

TEST_CASE("mode roots") {
  auto b = pi_basis(4);
  SUBCASE("kernel mode") {
    const ModeBlock m = mode_block(1.0, 1, DampedConfig::resonant(b, 0.5, 1));
    CHECK(m.mu_minus() == cd(0.0, 0.0));
    CHECK(std::abs(m.mu_plus() - cd(0.5, 0.0)) < 1e-15);
    CHECK(m.cls == ModeClass::Kernel);
  }
  SUBCASE("complex pair") {
    const ModeBlock m = mode_block(4.0, 2, DampedConfig::resonant(b, 0.5, 1));
    const auto [o0, o1] = oracle_roots(4.0, 0.5, 1.0);
    CHECK(std::abs(o0 - cd(1.0, -std::sqrt(2.0))) < 1e-12);
    const cd lo = m.mu_minus().imag() < m.mu_plus().imag() ? m.mu_minus() : m.mu_plus();
    const cd hi = m.mu_minus().imag() < m.mu_plus().imag() ? m.mu_plus() : m.mu_minus();
    CHECK(std::abs(lo - o0) < 1e-12);
    CHECK(std::abs(hi - o1) < 1e-12);
  }
  SUBCASE("two positive real roots") {
    const ModeBlock m = mode_block(1.0, 1, DampedConfig::nonresonant(b, 3.0, 0.5));
    // lambda = 0 is below lambda_1; use the block directly for the (c = 3, lambda = 0) example.
    Block2 blk = Block2::from_matrix((Eigen::Matrix2d() << 0.0, -1.0, 1.0, 3.0).finished());
    const auto [o0, o1] = oracle_roots(1.0, 3.0, 0.0);
    CHECK(std::abs(blk.mu_minus - cd((3.0 - std::sqrt(5.0)) / 2.0, 0.0)) < 1e-14);
    CHECK(std::abs(blk.mu_plus - cd((3.0 + std::sqrt(5.0)) / 2.0, 0.0)) < 1e-14);
    CHECK(std::abs(blk.mu_minus - o0) < 1e-12);
    CHECK(std::abs(blk.mu_plus - o1) < 1e-12);
    CHECK(m.cls == ModeClass::Positive);
  }
  SUBCASE("double root flagged") {
    // c l_i = 2 sqrt(l_i - l): l_i = 4, l = 0, c = 1.
    const Block2 blk = Block2::from_matrix((Eigen::Matrix2d() << 0.0, -1.0, 4.0, 4.0).finished());
    CHECK(blk.double_root());
    CHECK(blk.mu_minus == cd(2.0, 0.0));
    CHECK(blk.mu_plus == cd(2.0, 0.0));
  }
}

TEST_CASE("Vieta relations, eigenvector law and kernel action") {
  for (double c : {0.1, 0.5, 2.0}) {
    for (int k : {1, 2, 3}) {
      auto b = pi_basis(16);
      const Decomposition dec = decompose(DampedConfig::resonant(b, c, k));
      const double lam = dec.config().lambda;
      for (const ModeBlock& m : dec.blocks()) {
        const double li = m.lambda_i;
        const double scale = std::max(1.0, c * li * std::abs(m.mu_plus()) + std::abs(li - lam));
        CHECK(std::abs(m.mu_minus() + m.mu_plus() - c * li) / scale < 1e-12);
        CHECK(std::abs(m.mu_minus() * m.mu_plus() - (li - lam)) / scale < 1e-12);
        for (cd mu : {m.mu_minus(), m.mu_plus()}) {
          const Eigen::Vector2cd v(1.0, -mu);
          const Eigen::Vector2cd r = m.matrix().cast<cd>() * v - mu * v;
          CHECK(r.norm() / scale < 1e-12);
        }
        if (m.cls == ModeClass::Kernel) {
          // A_0(x, y) = (-y, c lambda y).
          const Eigen::Vector2d xy(0.3, -1.7);
          const Eigen::Vector2d expect(-xy(1), c * lam * xy(1));
          CHECK((m.matrix() * xy - expect).norm() == 0.0);
        }
      }
    }
  }
}

TEST_CASE("classification") {
  auto b = pi_basis(4);
  const Decomposition d1 = decompose(DampedConfig::resonant(b, 0.5, 1));
  CHECK(d1.idx_minus().empty());
  CHECK(d1.idx_kernel() == std::vector<int>{0});
  CHECK(d1.idx_plus() == std::vector<int>{1, 2, 3});

  const Decomposition d2 = decompose(DampedConfig::resonant(b, 0.5, 2));
  CHECK(d2.idx_minus() == std::vector<int>{0});
  CHECK(d2.idx_kernel() == std::vector<int>{1});
  CHECK(d2.idx_plus() == std::vector<int>{2, 3});

  const Eigen::Matrix2d& Pm = d2.projector(Projection::Qminus, 0);
  const Eigen::Matrix2d& Pp = d2.projector(Projection::Qplus, 0);
  CHECK((Pm * Pm - Pm).norm() < 1e-12);
  CHECK((Pp * Pp - Pp).norm() < 1e-12);
  CHECK((Pm + Pp - Eigen::Matrix2d::Identity()).norm() < 1e-12);
  // E_- is spanned by (1, -mu_1^-).
  const Eigen::Vector2d e(1.0, -d2.block(0).mu_minus().real());
  CHECK((Pm * e - e).norm() < 1e-12);

  const Decomposition dn = decompose(DampedConfig::nonresonant(b, 0.5, 2.5));
  CHECK(dn.kernel_dim() == 0);
  CHECK(dn.idx_minus() == std::vector<int>{0});

  CHECK_THROWS_AS(DampedConfig::resonant(b, 0.5, 5), std::invalid_argument);
  CHECK_THROWS_AS(DampedConfig::resonant(b, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(DampedConfig::nonresonant(b, 0.5, 4.0), std::invalid_argument);
}

TEST_CASE("closed-form exponential against a Pade oracle") {
  auto b = pi_basis(8);
  for (int k : {1, 2}) {
    for (double c : {0.1, 0.5, 2.0}) {
      const Decomposition dec = decompose(DampedConfig::resonant(b, c, k));
      for (const ModeBlock& m : dec.blocks()) {
        for (double t : {0.0, 1e-5, 0.1, 0.7, 1.3}) {
          const Eigen::Matrix2d oracle = (-t * m.matrix()).exp();
          const Eigen::Matrix2d got = semigroup_block(m, t);
          CHECK((got - oracle).norm() <= 1e-12 * std::max(1.0, oracle.norm()));
        }
      }
    }
  }
  // Jordan branch.
  const Block2 blk = Block2::from_matrix((Eigen::Matrix2d() << 0.0, -1.0, 4.0, 4.0).finished());
  for (double t : {0.0, 0.3, 2.0}) {
    const Eigen::Matrix2d expect = std::exp(-2.0 * t) * (Eigen::Matrix2d::Identity() + t * (2.0 * Eigen::Matrix2d::Identity() - blk.matrix));
    CHECK((block_exp(blk, t) - expect).norm() < 1e-14);
  }
}

TEST_CASE("exponential integral against quadrature") {
  for (const Eigen::Matrix2d& M : {(Eigen::Matrix2d() << 0.0, -1.0, 0.0, 0.5).finished(),
                                   (Eigen::Matrix2d() << 0.0, -1.0, 3.0, 2.0).finished(),
                                   (Eigen::Matrix2d() << 0.0, -1.0, 4.0, 4.0).finished(),
                                   (Eigen::Matrix2d() << 0.0, -1.0, 1.0, 3.0).finished(),
                                   (Eigen::Matrix2d() << 0.0, -1.0, -3.0, 1.0).finished()}) {
    const Block2 blk = Block2::from_matrix(M);
    for (double h : {1e-6, 1.0 / 256.0, 0.5}) {
      // Composite Simpson on the oracle exponential.
      const int n = 2000;
      Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
      for (int j = 0; j <= n; ++j) {
        const double w = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        acc += w * (-(h * j / n) * M).exp();
      }
      acc *= h / n / 3.0;
      CHECK((block_exp_integral(blk, h) - acc).norm() < 1e-12 * std::max(1.0, acc.norm()));
    }
  }
}

TEST_CASE("semigroup laws and projections") {
  auto b = pi_basis(8);
  std::mt19937_64 rng(11);
  const Decomposition dec = decompose(DampedConfig::resonant(b, 0.5, 2));
  for (int r = 0; r < 20; ++r) {
    const StateE z = random_state(8, rng);
    CHECK((semigroup(dec, z, 0.0) - z).stacked().norm() == 0.0);
    for (double t : {0.1, 0.7}) {
      for (double s : {0.7, 1.3}) {
        const StateE lhs = semigroup(dec, z, t + s);
        const StateE rhs = semigroup(dec, semigroup(dec, z, s), t);
        CHECK((lhs - rhs).stacked().norm() < 1e-12 * std::max(1.0, lhs.stacked().norm()));
      }
      for (Projection p : {Projection::P, Projection::Qminus, Projection::Qplus}) {
        const StateE a = semigroup(dec, project(z, p, dec), t);
        const StateE c = project(semigroup(dec, z, t), p, dec);
        CHECK((a - c).stacked().norm() < 1e-12 * std::max(1.0, a.stacked().norm()));
      }
    }
    const StateE sum = project(z, Projection::P, dec) + project(z, Projection::Qminus, dec) +
                       project(z, Projection::Qplus, dec);
    CHECK((sum - z).stacked().norm() < 1e-12 * z.stacked().norm());
  }
  StateE ek = StateE::zeros(8);
  ek.a(1) = 1.0;
  ek.b(1) = -0.4;
  CHECK((project(ek, Projection::P, dec) - ek).stacked().norm() == 0.0);
  CHECK(project(ek, Projection::Qplus, dec).stacked().norm() == 0.0);
}

TEST_CASE("negative times only on E_-") {
  auto b = pi_basis(4);
  const Decomposition dec = decompose(DampedConfig::resonant(b, 0.5, 2));
  const ModeBlock& neg = dec.block(0);
  REQUIRE(neg.cls == ModeClass::Negative);
  for (double t : {0.1, 0.7, 1.3}) {
    CHECK((semigroup_block(neg, -t) * semigroup_block(neg, t) - Eigen::Matrix2d::Identity()).norm() < 1e-10);
  }
  CHECK_THROWS_AS(semigroup_block(dec.block(1), -0.1), std::invalid_argument);
  CHECK_THROWS_AS(semigroup_block(dec.block(2), -0.1), std::invalid_argument);

  StateE zm = StateE::zeros(4);
  zm.a(0) = 1.0;
  zm.b(0) = -neg.mu_minus().real();
  CHECK((semigroup(dec, semigroup(dec, zm, 0.5), -0.5) - zm).stacked().norm() < 1e-10);
  StateE zp = StateE::zeros(4);
  zp.a(2) = 1.0;
  CHECK_THROWS_AS(semigroup(dec, zp, -0.5), std::invalid_argument);
}

TEST_CASE("kernel block eigenvalues of exp(-tM) are 1 and exp(-c lambda t)") {
  auto b = pi_basis(4);
  const Decomposition dec = decompose(DampedConfig::resonant(b, 0.5, 1));
  const Eigen::Matrix2d S = semigroup_block(dec.block(0), 0.8);
  Eigen::EigenSolver<Eigen::Matrix2d> es(S);
  std::vector<double> ev{es.eigenvalues()(0).real(), es.eigenvalues()(1).real()};
  std::sort(ev.begin(), ev.end());
  CHECK(std::abs(ev[0] - std::exp(-0.5 * 0.8)) < 1e-14);
  CHECK(std::abs(ev[1] - 1.0) < 1e-14);
}

TEST_CASE("decay constants and custom norm") {
  std::mt19937_64 rng(5);
  for (double c : {0.1, 0.5, 2.0}) {
    for (int k : {1, 2}) {
      auto b = pi_basis(8);
      const Decomposition dec = decompose(DampedConfig::resonant(b, c, k));
      double min_re = 1e300;
      for (int i : dec.idx_plus()) min_re = std::min({min_re, dec.block(i).mu_minus().real(), dec.block(i).mu_plus().real()});
      CHECK(dec.delta() < min_re);
      CHECK(dec.delta() == doctest::Approx(0.99 * min_re));
      CHECK(dec.M_const() >= 1.0);

      const std::vector<double> grid = default_norm_grid(dec);
      CHECK(grid.back() >= 5.0 / dec.delta());
      for (int r = 0; r < 10; ++r) {
        const StateE z = random_state(8, rng);
        const StateE zp = project(z, Projection::Qplus, dec);
        const double n0 = e_norm(zp, dec);
        const double cz = custom_norm(z, dec, grid);
        CHECK(custom_norm(zp, dec, grid) <= cz + 1e-12 * cz);
        const double cp = custom_norm(zp, dec, grid);
        for (double t : {0.1, 0.7, 1.3, 3.0}) {
          const StateE st = semigroup(dec, zp, t);
          CHECK(e_norm(st, dec) <= dec.M_const() * std::exp(-dec.delta() * t) * n0 * (1.0 + 1e-12));
          CHECK(custom_norm(st, dec, grid) <= std::exp(-dec.delta() * t) * cp * (1.0 + 1e-12));
        }
        const StateE zpk = z - zp;
        CHECK(std::abs(custom_norm(zpk, dec, grid) - e_norm(zpk, dec)) < 1e-12 * e_norm(zpk, dec));
      }
    }
  }
  auto b = pi_basis(4);
  const Decomposition dec = decompose(DampedConfig::resonant(b, 0.5, 1));
  CHECK_THROWS_AS(custom_norm(StateE::zeros(4), dec, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("1/c is reported only when hit") {
  auto b = pi_basis(8);
  // mu = 1/c solves 1/c^2 - lambda_i + lambda_i - lambda = 0 iff lambda = 1/c^2; take lambda_2 = 4, c = 0.5.
  const Decomposition hit = decompose(DampedConfig::resonant(b, 0.5, 2));
  CHECK(!hit.one_over_c_modes().empty());
  const Decomposition miss = decompose(DampedConfig::resonant(b, 0.5, 1));
  CHECK(miss.one_over_c_modes().empty());
}
