#include "dampwave/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "dampwave/evolution.hpp"

namespace dampwave {

namespace {

// Kernel coordinates <-> full coefficient vectors.
CoeffVec embed_kernel(const CoeffVec& x, const Decomposition& dec) {
  CoeffVec out = CoeffVec::Zero(dec.size());
  const auto& k = dec.idx_kernel();
  for (std::size_t j = 0; j < k.size(); ++j) out(k[j]) = x(static_cast<Eigen::Index>(j));
  return out;
}

CoeffVec restrict_kernel(const CoeffVec& full, const Decomposition& dec) {
  const auto& k = dec.idx_kernel();
  CoeffVec out(static_cast<Eigen::Index>(k.size()));
  for (std::size_t j = 0; j < k.size(); ++j) out(static_cast<Eigen::Index>(j)) = full(k[j]);
  return out;
}

double element_value(const EigenBasis& basis, const CoeffVec& c, double x) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (c(i) != 0.0) acc += c(i) * basis.eigenfunction(static_cast<int>(i + 1), x);
  }
  return acc;
}

// Unit vector drawn uniformly on the sphere of dimension d.
Eigen::VectorXd random_direction(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(d);
  do {
    for (int i = 0; i < d; ++i) v(i) = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

ConditionReport pick(std::pair<ConditionReport, ConditionReport> both) {
  if (both.first.holds) return std::move(both.first);
  if (both.second.holds) return std::move(both.second);
  return std::move(both.first);
}

}  // namespace

CoeffVec averaged_map(const NonlinearitySpec& f, const CoeffVec& x, const Decomposition& dec, int panels,
                      double offset) {
  if (panels < 1) throw std::invalid_argument("averaged_map needs at least one panel");
  if (x.size() != dec.kernel_dim()) throw std::invalid_argument("averaged_map: x must hold kernel coordinates");
  const CoeffVec u = embed_kernel(x, dec);
  const int n = 2 * panels;
  const double h = f.period / n;
  CoeffVec acc = CoeffVec::Zero(dec.kernel_dim());
  for (int j = 0; j <= n; ++j) {
    const double w = (j == 0 || j == n) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    acc += w * restrict_kernel(nemitskii(f, offset + j * h, u, dec.basis()), dec);
  }
  return acc * (h / 3.0);
}

double landesman_lazer_integral(const NonlinearitySpec& f, const EigenBasis& basis, const CoeffVec& element,
                                double t) {
  if (element.size() != basis.size()) throw std::invalid_argument("LL integral: element shape mismatch");
  const double len = basis.length();
  int top = 1;
  for (Eigen::Index i = 0; i < element.size(); ++i) {
    if (element(i) != 0.0) top = static_cast<int>(i + 1);
  }
  auto g = [&](double x) { return element_value(basis, element, x); };

  // Roots of the element: sign changes on a fine sampling, refined by bisection.
  const int samples = 64 * top + 1;
  std::vector<double> cuts{0.0};
  double xprev = 0.0;
  double gprev = g(len * 1e-9);
  for (int j = 1; j < samples; ++j) {
    const double xj = (j + 1 == samples) ? len * (1.0 - 1e-9) : len * j / (samples - 1);
    const double gj = g(xj);
    if ((gprev < 0.0 && gj > 0.0) || (gprev > 0.0 && gj < 0.0)) {
      double lo = xprev, hi = xj, glo = gprev;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * len; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm < 0.0) == (glo < 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      cuts.push_back(0.5 * (lo + hi));
    }
    xprev = xj;
    gprev = gj;
  }
  cuts.push_back(len);

  using Gauss = boost::math::quadrature::gauss<double, 30>;
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double a = cuts[p], b = cuts[p + 1];
    const bool positive = g(0.5 * (a + b)) > 0.0;
    auto integrand = [&](double x) {
      const double v = g(x);
      return (positive ? f.f_plus(t, x) : f.f_minus(t, x)) * v;
    };
    const int sub = 4;
    for (int q = 0; q < sub; ++q) {
      total += Gauss::integrate(integrand, a + (b - a) * q / sub, a + (b - a) * (q + 1) / sub);
    }
  }
  return total;
}

std::pair<ConditionReport, ConditionReport> check_LL_both(const NonlinearitySpec& f, const EigenBasis& basis,
                                                          int k, int sample_count, std::uint64_t seed) {
  if (k < 1 || k > basis.size()) throw std::invalid_argument("LL check: resonance index out of range");
  if (sample_count < 2) throw std::invalid_argument("LL check needs at least two samples");
  if (!f.has_pm_limits()) throw std::invalid_argument("LL check needs the limits f_+ and f_-");

  // The kernel is span{phi_k}; its unit elements are +phi_k and -phi_k.
  ConditionReport ll1, ll2;
  ll1.condition_id = "LL1";
  ll2.condition_id = "LL2";
  ll1.margin = ll2.margin = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n_t = std::max(1, sample_count / 2);
  long evals = 0;
  for (int j = 0; j < n_t; ++j) {
    const double t = (j == 0) ? 0.0 : f.period * unif(rng);
    for (double sign : {1.0, -1.0}) {
      CoeffVec el = CoeffVec::Zero(basis.size());
      el(k - 1) = sign;
      const double v = landesman_lazer_integral(f, basis, el, t);
      ++evals;
      if (v < ll1.margin) {
        ll1.margin = v;
        ll1.witness = Witness{t, NAN, NAN, {}, {}, el, v};
      }
      if (-v < ll2.margin) {
        ll2.margin = -v;
        ll2.witness = Witness{t, NAN, NAN, {}, {}, el, v};
      }
    }
  }
  for (ConditionReport* r : {&ll1, &ll2}) {
    r->holds = r->margin > 0.0;
    if (r->holds) r->witness.reset();
    r->evaluations = evals;
    r->sample_spec.sample_count = sample_count;
    r->sample_spec.seed = seed;
  }
  return {ll1, ll2};
}

ConditionReport check_LL(const NonlinearitySpec& f, const EigenBasis& basis, int k, int sample_count,
                         std::uint64_t seed) {
  return pick(check_LL_both(f, basis, k, sample_count, seed));
}

std::pair<ConditionReport, ConditionReport> check_SR_both(const NonlinearitySpec& f, const EigenBasis& basis,
                                                          int sample_count) {
  if (!f.has_infty_limit()) {
    throw std::invalid_argument("SR check needs f_inf, which is undefined for " + to_string(f.family));
  }
  if (sample_count < 1) throw std::invalid_argument("SR check needs a positive sample count");

  // s lattice: 0 and +-10^p for p in [-3, 6], eight points per decade.
  std::vector<double> s_inner{0.0};
  std::vector<double> s_outer;
  for (int q = 0; q <= 9 * 8; ++q) {
    const double p = -3.0 + q / 8.0;
    const double s = std::pow(10.0, p);
    auto& dst = (p > 5.0) ? s_outer : s_inner;
    dst.push_back(s);
    dst.push_back(-s);
  }
  const Eigen::VectorXd& xs = basis.nodes();
  const int n_t = std::clamp(sample_count / 100, 4, 64);

  ConditionReport sr1, sr2;
  sr1.condition_id = "SR1";
  sr2.condition_id = "SR2";
  sr1.margin = sr2.margin = std::numeric_limits<double>::infinity();
  long evals = 0;
  using Gauss = boost::math::quadrature::gauss<double, 30>;
  for (int j = 0; j < n_t; ++j) {
    const double t = f.period * j / n_t;
    for (Eigen::Index ix = 0; ix < xs.size(); ++ix) {
      const double x = xs(ix);
      double lo_in = std::numeric_limits<double>::infinity(), hi_in = -lo_in;
      for (double s : s_inner) {
        const double v = f.eval(t, x, s) * s;
        lo_in = std::min(lo_in, v);
        hi_in = std::max(hi_in, v);
      }
      // The envelope counts as bounded unless the outermost decade still moves it.
      for (double s : s_outer) {
        const double v = f.eval(t, x, s) * s;
        evals += 1;
        if (v < lo_in - 1e-6 * (1.0 + std::abs(lo_in))) {
          sr1.witness = Witness{t, s, x, {}, {}, {}, v};
          sr1.margin = -std::numeric_limits<double>::infinity();
        }
        if (v > hi_in + 1e-6 * (1.0 + std::abs(hi_in))) {
          sr2.witness = Witness{t, s, x, {}, {}, {}, v};
          sr2.margin = -std::numeric_limits<double>::infinity();
        }
      }
      evals += static_cast<long>(s_inner.size());
    }
    auto finf = [&](double x) { return f.f_infty(t, x); };
    const double integral = Gauss::integrate(finf, 0.0, basis.length());
    if (integral < sr1.margin) {
      sr1.margin = integral;
      if (integral <= 0.0) sr1.witness = Witness{t, NAN, NAN, {}, {}, {}, integral};
    }
    if (-integral < sr2.margin) {
      sr2.margin = -integral;
      if (integral >= 0.0) sr2.witness = Witness{t, NAN, NAN, {}, {}, {}, integral};
    }
  }
  for (ConditionReport* r : {&sr1, &sr2}) {
    r->holds = r->margin > 0.0;
    if (r->holds) r->witness.reset();
    r->evaluations = evals;
    r->sample_spec.sample_count = sample_count;
  }
  return {sr1, sr2};
}

ConditionReport check_SR(const NonlinearitySpec& f, const EigenBasis& basis, int sample_count) {
  return pick(check_SR_both(f, basis, sample_count));
}

std::vector<double> default_R_ladder() { return {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000}; }

double g_condition_value(const NonlinearitySpec& f, const Decomposition& dec, double t, const CoeffVec& x,
                         const CoeffVec& y, const CoeffVec& z) {
  const CoeffVec F = nemitskii(f, t, x + y, dec.basis());
  return h_inner(F, x) + h_inner(F, z);
}

std::pair<ConditionReport, ConditionReport> check_G_both(const NonlinearitySpec& f, const Decomposition& dec,
                                                         double B1, double B2, const std::vector<double>& R_ladder,
                                                         int sample_count, std::uint64_t seed) {
  if (!(B1 > 0.0) || !(B2 > 0.0)) throw std::invalid_argument("G check needs positive ball radii");
  if (R_ladder.empty()) throw std::invalid_argument("G check needs a non-empty R ladder");
  for (std::size_t j = 1; j < R_ladder.size(); ++j) {
    if (!(R_ladder[j] > R_ladder[j - 1])) throw std::invalid_argument("R ladder must increase");
  }
  if (!(R_ladder.front() > 0.0)) throw std::invalid_argument("R ladder must be positive");
  if (sample_count < 1) throw std::invalid_argument("G check needs a positive sample count");
  const int d0 = dec.kernel_dim();
  if (d0 == 0) throw std::invalid_argument("G check needs a resonant configuration");

  const int n = dec.size();
  const double alpha = dec.config().alpha;
  std::vector<int> free_modes;  // X^alpha_+ (+) X^alpha_-: every non-kernel mode
  for (int i = 0; i < n; ++i) {
    if (dec.block(i).cls != ModeClass::Kernel) free_modes.push_back(i);
  }
  const int df = static_cast<int>(free_modes.size());

  SampleSpec spec{B1, B2, R_ladder, sample_count, seed};
  ConditionReport g1, g2;
  g1.condition_id = "G1";
  g2.condition_id = "G2";
  g1.margin = g2.margin = std::numeric_limits<double>::infinity();

  std::vector<char> ok1(R_ladder.size(), 1), ok2(R_ladder.size(), 1);
  std::vector<std::optional<Witness>> w1(R_ladder.size()), w2(R_ladder.size());
  std::vector<double> m1(R_ladder.size(), std::numeric_limits<double>::infinity()), m2 = m1;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  long evals = 0;

  for (std::size_t r = 0; r < R_ladder.size(); ++r) {
    const double R = R_ladder[r];
    for (int s = 0; s < sample_count; ++s) {
      const double t = f.period * unif(rng);
      CoeffVec dir_k = random_direction(rng, d0);
      if (d0 == 1) dir_k(0) = (s % 2 == 0) ? 1.0 : -1.0;
      CoeffVec y = CoeffVec::Zero(n);
      if (df > 0 && s > 1) {
        const Eigen::VectorXd g = random_direction(rng, df);
        const double rad = B1 * std::pow(unif(rng), 1.0 / df);
        for (int j = 0; j < df; ++j) {
          const int i = free_modes[static_cast<std::size_t>(j)];
          y(i) = rad * g(j) / std::pow(dec.block(i).lambda_i, alpha);
        }
      }
      const CoeffVec x = embed_kernel(R * dir_k, dec);
      const CoeffVec F = nemitskii(f, t, x + y, dec.basis());
      ++evals;
      const CoeffVec PF = embed_kernel(restrict_kernel(F, dec), dec);
      const double fx = h_inner(F, x);
      const double pf = PF.norm();
      const CoeffVec unit = (pf > 0.0) ? CoeffVec(PF / pf) : CoeffVec(CoeffVec::Zero(n));
      // G1 needs <F,x> + <F,z> > 0 for every z in the ball; the worst z is -B2 PF/|PF|.
      const double s1 = fx - B2 * pf;
      // G2 needs <F,x> + <F,z> < 0; the worst z is +B2 PF/|PF|.
      const double s2 = -(fx + B2 * pf);
      if (s1 < m1[r]) m1[r] = s1;
      if (s2 < m2[r]) m2[r] = s2;
      if (!(s1 > 0.0) && ok1[r]) {
        ok1[r] = 0;
        w1[r] = Witness{t, NAN, NAN, y, CoeffVec(-B2 * unit), x, fx - B2 * pf};
      }
      if (!(s2 > 0.0) && ok2[r]) {
        ok2[r] = 0;
        w2[r] = Witness{t, NAN, NAN, y, CoeffVec(B2 * unit), x, fx + B2 * pf};
      }
    }
  }

  auto finish = [&](ConditionReport& rep, const std::vector<char>& ok, std::vector<std::optional<Witness>>& w,
                    const std::vector<double>& m) {
    rep.sample_spec = spec;
    rep.evaluations = evals;
    const std::size_t last = R_ladder.size() - 1;
    rep.holds = ok[last] != 0;
    if (rep.holds) {
      std::size_t j = last;
      while (j > 0 && ok[j - 1]) --j;
      rep.threshold_R = R_ladder[j];
      double mm = std::numeric_limits<double>::infinity();
      for (std::size_t q = j; q <= last; ++q) mm = std::min(mm, m[q]);
      rep.margin = mm;
    } else {
      rep.witness = w[last];
      rep.margin = m[last];
    }
  };
  finish(g1, ok1, w1, m1);
  finish(g2, ok2, w2, m2);
  return {g1, g2};
}

ConditionReport check_G(const NonlinearitySpec& f, const Decomposition& dec, double B1, double B2,
                        const std::vector<double>& R_ladder, int sample_count, std::uint64_t seed) {
  return pick(check_G_both(f, dec, B1, B2, R_ladder, sample_count, seed));
}

AprioriConstants apriori_constants(const NonlinearitySpec& f, const Decomposition& dec, double R3) {
  const double m = f.bound();
  if (!std::isfinite(m)) throw std::invalid_argument("a priori constants need a bounded nonlinearity");
  AprioriConstants k;
  k.m = m;
  // ||F(t,u)||_H <= sup|f| * |Omega|^{1/2}; the Galerkin projection does not increase it.
  k.m0 = m * std::sqrt(dec.basis().length());
  k.m1 = k.m0;
  k.R1 = k.m0 * dec.M_const() * dec.q_plus_norm() / dec.delta();
  k.R2 = k.m0 * dec.M_const() * dec.q_minus_norm() / dec.delta();
  k.R3 = R3;
  k.B1 = k.R1 + k.R2;
  if (dec.kernel_dim() > 0) {
    const double cl = dec.config().c * dec.config().lambda;
    k.kernel_velocity_bound = k.m1 / cl + 1.0;
    k.B2 = k.kernel_velocity_bound / cl;
  }
  return k;
}

}  // namespace dampwave
