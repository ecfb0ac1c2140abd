#include "dampwave/degree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "dampwave/errors.hpp"

namespace dampwave {

Box Box::cube(int dim, double half_width) {
  if (dim < 1 || !(half_width > 0.0)) throw std::invalid_argument("cube needs dim >= 1 and positive width");
  return {Eigen::VectorXd::Constant(dim, -half_width), Eigen::VectorXd::Constant(dim, half_width)};
}

bool Box::contains(const Eigen::VectorXd& x) const {
  return x.size() == lo.size() && (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
}

std::string to_string(DegreeMethod m) {
  switch (m) {
    case DegreeMethod::Sign1D: return "SIGN_1D";
    case DegreeMethod::Winding2D: return "WINDING_2D";
    case DegreeMethod::RegularSum: return "REGULAR_SUM";
  }
  return "?";
}

std::string to_string(Rigor r) { return r == Rigor::Certified ? "CERTIFIED" : "HEURISTIC"; }

namespace {

[[noreturn]] void boundary_failure(const std::string& where, double margin) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "field too close to zero on the boundary (%s, margin %.3g < 10)", where.c_str(),
                margin);
  throw NumericalFailure("BOUNDARY_ZERO", buf);
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

double radical_inverse(long i, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

std::vector<int> first_primes(int count) {
  std::vector<int> p;
  for (int c = 2; static_cast<int>(p.size()) < count; ++c) {
    bool prime = true;
    for (int q : p) {
      if (q * q > c) break;
      if (c % q == 0) {
        prime = false;
        break;
      }
    }
    if (prime) p.push_back(c);
  }
  return p;
}

ZeroRecord classify_zero(const VectorField& F, const Eigen::VectorXd& x, const Eigen::VectorXd& fx,
                         const NewtonOptions& opts, long* evals) {
  ZeroRecord z;
  z.point = x;
  z.residual = fx.norm();
  const Eigen::MatrixXd J = fd_jacobian(F, x, fx, opts.fd_rel_step, evals);
  z.determinant = J.fullPivLu().determinant();
  z.jacobian_sign = sign_of(z.determinant);
  const Eigen::VectorXd sv = J.jacobiSvd().singularValues();
  z.min_singular_ratio = sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
  return z;
}

}  // namespace

Eigen::MatrixXd fd_jacobian(const VectorField& F, const Eigen::VectorXd& x, const Eigen::VectorXd& fx,
                            double fd_rel, long* evals) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd J(fx.size(), n);
  Eigen::VectorXd xp = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = fd_rel * std::max(1.0, std::abs(x(j)));
    xp(j) = x(j) + h;
    J.col(j) = (F(xp) - fx) / (xp(j) - x(j));
    xp(j) = x(j);
  }
  if (evals) *evals += n;
  return J;
}

std::vector<ZeroRecord> multistart_newton(const VectorField& F, const Box& box, const NewtonOptions& opts,
                                          NewtonStats* stats) {
  const int d = box.dim();
  if (d < 1) throw std::invalid_argument("multistart_newton needs a non-empty box");
  NewtonStats local;
  NewtonStats& st = stats ? *stats : local;
  const std::vector<int> primes = first_primes(d);
  const Eigen::VectorXd width = box.hi - box.lo;
  const Eigen::VectorXd c = box.center();

  std::vector<Eigen::VectorXd> starts{c};
  for (int i = 1; i <= opts.starts; ++i) {
    Eigen::VectorXd p(d);
    for (int j = 0; j < d; ++j) p(j) = box.lo(j) + width(j) * radical_inverse(i, primes[static_cast<std::size_t>(j)]);
    starts.push_back(p);
  }

  std::vector<ZeroRecord> zeros;
  auto near_known = [&](const Eigen::VectorXd& x, double radius) {
    for (const ZeroRecord& z : zeros) {
      if ((z.point - x).norm() < radius) return true;
    }
    return false;
  };
  auto far_outside = [&](const Eigen::VectorXd& x) {
    return (((x - c).cwiseAbs() - width).array() > 0.0).any();  // beyond twice the box
  };

  for (const Eigen::VectorXd& s : starts) {
    ++st.starts_run;
    Eigen::VectorXd x = s;
    Eigen::VectorXd fx = F(x);
    ++st.field_evals;
    bool done = false;
    for (int it = 0; it < opts.max_iter && !done; ++it) {
      const double nf = fx.norm();
      if (!std::isfinite(nf)) break;
      if (nf < opts.tol) {
        ++st.converged;
        if (!near_known(x, opts.dedup_radius)) zeros.push_back(classify_zero(F, x, fx, opts, &st.field_evals));
        done = true;
        break;
      }
      if (it > 0 && near_known(x, 100.0 * opts.dedup_radius)) {
        ++st.abandoned;
        done = true;
        break;
      }
      const Eigen::MatrixXd J = fd_jacobian(F, x, fx, opts.fd_rel_step, &st.field_evals);
      const Eigen::VectorXd dx = J.fullPivLu().solve(-fx);
      if (!dx.allFinite()) break;
      double lam = 1.0;
      bool accepted = false;
      for (int b = 0; b < 30; ++b) {
        const Eigen::VectorXd xn = x + lam * dx;
        Eigen::VectorXd fn;
        try {
          fn = F(xn);
        } catch (const NumericalFailure&) {
          lam *= 0.5;
          continue;
        }
        ++st.field_evals;
        if (fn.allFinite() && fn.norm() < (1.0 - 1e-4 * lam) * nf) {
          x = xn;
          fx = fn;
          accepted = true;
          break;
        }
        lam *= 0.5;
      }
      if (!accepted || far_outside(x)) break;
    }
    if (!done && fx.allFinite() && fx.norm() < opts.tol) {
      ++st.converged;
      if (!near_known(x, opts.dedup_radius)) zeros.push_back(classify_zero(F, x, fx, opts, &st.field_evals));
    }
  }
  return zeros;
}

namespace {

DegreeResult degree_1d(const VectorField& F, const Box& box) {
  const double a = box.lo(0), b = box.hi(0);
  const double r = 1e-3 * (b - a);
  auto val = [&](double x) { return F(Eigen::VectorXd::Constant(1, x))(0); };
  const double fa = val(a), fb = val(b);
  const double La = std::abs(val(a + r) - fa) / r;
  const double Lb = std::abs(val(b - r) - fb) / r;
  const double ma = std::abs(fa) / std::max(La * r, 1e-300);
  const double mb = std::abs(fb) / std::max(Lb * r, 1e-300);
  DegreeResult res;
  res.method = DegreeMethod::Sign1D;
  res.boundary_margin = std::min(ma, mb);
  if (fa == 0.0 || fb == 0.0 || res.boundary_margin <= 10.0) boundary_failure("interval end", res.boundary_margin);
  res.value = (sign_of(fb) - sign_of(fa)) / 2;
  res.boundary_values = {Eigen::VectorXd::Constant(1, fa), Eigen::VectorXd::Constant(1, fb)};
  return res;
}

DegreeResult degree_2d(const VectorField& F, const Box& box) {
  const Eigen::Vector2d lo = box.lo, hi = box.hi;
  const std::vector<Eigen::Vector2d> corners{{lo(0), lo(1)}, {hi(0), lo(1)}, {hi(0), hi(1)}, {lo(0), hi(1)}};
  const double scale = (hi - lo).norm();
  const int per_edge = 64;
  DegreeResult res;
  res.method = DegreeMethod::Winding2D;
  res.boundary_margin = std::numeric_limits<double>::infinity();
  double angle = 0.0;

  auto eval = [&](const Eigen::Vector2d& p) -> Eigen::Vector2d {
    const Eigen::VectorXd v = F(Eigen::VectorXd(p));
    return {v(0), v(1)};
  };
  struct Seg {
    Eigen::Vector2d p, q, fp, fq;
    int depth;
  };
  for (int e = 0; e < 4; ++e) {
    const Eigen::Vector2d A = corners[static_cast<std::size_t>(e)];
    const Eigen::Vector2d B = corners[static_cast<std::size_t>((e + 1) % 4)];
    Eigen::Vector2d prev = A, fprev = eval(A);
    for (int j = 1; j <= per_edge; ++j) {
      const Eigen::Vector2d next = A + (B - A) * (static_cast<double>(j) / per_edge);
      std::vector<Seg> stack{{prev, next, fprev, eval(next), 0}};
      // Depth-first with the left half on top keeps the polygon in boundary order.
      while (!stack.empty()) {
        Seg s = stack.back();
        stack.pop_back();
        const double jump = (s.fq - s.fp).norm();
        const double low = std::min(s.fp.norm(), s.fq.norm());
        // |f| > 10 L r with L r estimated by the secant jump over the segment.
        const double margin = low / std::max(jump, 1e-300);
        if (margin <= 10.0) {
          if (s.depth >= 40 || (s.q - s.p).norm() < 1e-13 * scale) boundary_failure("box edge", margin);
          const Eigen::Vector2d m = 0.5 * (s.p + s.q);
          const Eigen::Vector2d fm = eval(m);
          stack.push_back({m, s.q, fm, s.fq, s.depth + 1});
          stack.push_back({s.p, m, s.fp, fm, s.depth + 1});
          continue;
        }
        res.boundary_margin = std::min(res.boundary_margin, margin);
        const double cross = s.fp(0) * s.fq(1) - s.fp(1) * s.fq(0);
        const double dot = s.fp.dot(s.fq);
        angle += std::atan2(cross, dot);
        res.boundary_values.push_back(Eigen::VectorXd(s.fp));
      }
      prev = next;
      fprev = eval(next);
    }
  }
  res.total_winding = angle / (2.0 * std::numbers::pi);
  res.value = static_cast<int>(std::lround(res.total_winding));
  if (std::abs(res.total_winding - res.value) > 1e-6) {
    throw NumericalFailure("WINDING_NOT_INTEGER", "boundary winding is not an integer");
  }
  return res;
}

DegreeResult degree_regular_sum(const VectorField& F, const Box& box, const NewtonOptions& opts) {
  const int d = box.dim();
  const Eigen::VectorXd width = box.hi - box.lo;
  // Boundary check on every face: |f| > 10 L r on a face lattice, refined until it passes or n = 256.
  auto lattice_margin = [&](int n) {
    double margin = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < d; ++axis) {
      for (int side = 0; side < 2; ++side) {
        std::vector<int> free_axes;
        for (int j = 0; j < d; ++j) {
          if (j != axis) free_axes.push_back(j);
        }
        std::vector<Eigen::VectorXd> vals((n + 1) * (n + 1));
        for (int i = 0; i <= n; ++i) {
          for (int j = 0; j <= n; ++j) {
            Eigen::VectorXd p = box.lo;
            p(axis) = side ? box.hi(axis) : box.lo(axis);
            p(free_axes[0]) += width(free_axes[0]) * i / n;
            if (free_axes.size() > 1) p(free_axes[1]) += width(free_axes[1]) * j / n;
            vals[static_cast<std::size_t>(i * (n + 1) + j)] = F(p);
          }
        }
        for (int i = 0; i <= n; ++i) {
          for (int j = 0; j <= n; ++j) {
            const auto& v = vals[static_cast<std::size_t>(i * (n + 1) + j)];
            double jump = 0.0;
            if (i < n) jump = std::max(jump, (vals[static_cast<std::size_t>((i + 1) * (n + 1) + j)] - v).norm());
            if (j < n) jump = std::max(jump, (vals[static_cast<std::size_t>(i * (n + 1) + j + 1)] - v).norm());
            margin = std::min(margin, v.norm() / std::max(jump, 1e-300));
          }
        }
      }
    }
    return margin;
  };
  double margin = lattice_margin(16);
  for (int n = 32; margin <= 10.0 && n <= 256; n *= 2) margin = lattice_margin(n);
  DegreeResult res;
  res.method = DegreeMethod::RegularSum;
  res.rigor = Rigor::Heuristic;
  res.boundary_margin = margin;
  if (margin <= 10.0) boundary_failure("box face", margin);
  const std::vector<ZeroRecord> zeros = multistart_newton(F, box, opts);
  for (const ZeroRecord& z : zeros) {
    if (!box.contains(z.point)) continue;
    res.zeros.push_back(z);
    res.value += z.jacobian_sign;
  }
  return res;
}

}  // namespace

DegreeResult brouwer_degree(const VectorField& F, const Box& box, const NewtonOptions& opts) {
  const int d = box.dim();
  if (d < 1 || d > 3) throw std::invalid_argument("brouwer_degree supports dimensions 1 to 3");
  if (box.hi.size() != d || !((box.hi - box.lo).array() > 0.0).all()) {
    throw std::invalid_argument("brouwer_degree needs a box with positive side lengths");
  }
  if (d == 1) return degree_1d(F, box);
  if (d == 2) return degree_2d(F, box);
  return degree_regular_sum(F, box, opts);
}

AveragedDegree averaged_degree(const NonlinearitySpec& f, const Decomposition& dec, double R) {
  const int d = dec.kernel_dim();
  if (d < 1 || d > 3) throw std::invalid_argument("averaged_degree needs 1 <= dim X_0 <= 3");
  if (!(R > 0.0)) throw std::invalid_argument("averaged_degree needs R > 0");
  VectorField Fhat = [&](const Eigen::VectorXd& x) { return Eigen::VectorXd(averaged_map(f, x, dec)); };
  AveragedDegree out;
  out.kernel_degree = brouwer_degree(Fhat, Box::cube(d, R));
  out.assembled = ((d % 2) ? -1 : 1) * out.kernel_degree.value;
  return out;
}

void TruncationLadder::require_stable() const {
  if (stable) return;
  std::string msg = "degree differs across the truncation ladder:";
  for (std::size_t i = 0; i < N_values.size(); ++i) {
    msg += " N=" + std::to_string(N_values[i]) + "->" + std::to_string(degrees[i]);
  }
  throw NumericalFailure("UNSTABLE", msg);
}

Decomposition decomposition_for(const DegreeSetup& setup, int N) {
  BasisPtr basis = build_dirichlet_laplacian(setup.length, N, std::max(setup.grid, 4 * N));
  if (setup.k) return decompose(DampedConfig::resonant(basis, setup.c, *setup.k, setup.alpha));
  return decompose(DampedConfig::nonresonant(basis, setup.c, setup.lambda, setup.alpha));
}

LadderEntry poincare_degree_at(const DegreeSetup& setup, int N) {
  const Decomposition dec = decomposition_for(setup, N);
  const NonlinearitySpec& f = setup.f;
  LadderEntry entry;
  entry.N = N;
  entry.rigor = Rigor::Heuristic;

  AprioriConstants k = apriori_constants(f, dec);
  if (dec.kernel_dim() > 0) {
    const ConditionReport g =
        check_G(f, dec, std::max(k.B1, 1e-12), std::max(k.B2, 1e-12), setup.R_ladder, setup.g_samples, setup.seed);
    if (!g.holds) {
      throw NumericalFailure("NO_A_PRIORI_BOUND", "neither G1 nor G2 holds on samples; W cannot be sized");
    }
    k = apriori_constants(f, dec, *g.threshold_R);
  }
  entry.constants = k;
  entry.kernel_radius = k.R3 + 1.0;
  entry.q_radius = k.R1 + k.R2 + 1.0;

  const int n = dec.size();
  const double alpha = dec.config().alpha;
  Box box{Eigen::VectorXd(2 * n), Eigen::VectorXd(2 * n)};
  for (int i = 0; i < n; ++i) {
    const double r = (dec.block(i).cls == ModeClass::Kernel) ? entry.kernel_radius : entry.q_radius;
    const double wa = std::pow(dec.block(i).lambda_i, alpha);
    box.lo(i) = -r / wa;
    box.hi(i) = r / wa;
    box.lo(n + i) = -r;
    box.hi(n + i) = r;
  }

  IntegratorSettings fixed = setup.integrator;
  fixed.error_control = false;
  VectorField G = [&](const Eigen::VectorXd& v) {
    const StateE w = StateE::unstack(v);
    return Eigen::VectorXd(v - poincare(w, f, dec, fixed).stacked());
  };
  const std::vector<ZeroRecord> zeros = multistart_newton(G, box, setup.newton, &entry.stats);
  for (const ZeroRecord& z : zeros) {
    const StateE w = StateE::unstack(z.point);
    const StateE pw = project(w, Projection::P, dec);
    const double p_norm = e_norm(pw, dec);
    const double q_norm = e_norm(w - pw, dec);
    const double gap = std::min(entry.kernel_radius - p_norm, entry.q_radius - q_norm);
    if (std::abs(gap) < 1e-6 * (1.0 + entry.q_radius)) {
      throw NumericalFailure("BOUNDARY_FIXED_POINT", "fixed point on the boundary of W at N=" + std::to_string(N));
    }
    if (gap < 0.0) continue;
    entry.fixed_points.push_back(z);
    entry.degree += z.jacobian_sign;
  }
  return entry;
}

TruncationLadder poincare_degree(const DegreeSetup& setup, const std::vector<int>& N_ladder) {
  if (N_ladder.empty()) throw std::invalid_argument("poincare_degree needs a non-empty N ladder");
  TruncationLadder ladder;
  for (int N : N_ladder) {
    LadderEntry e = poincare_degree_at(setup, N);
    ladder.N_values.push_back(N);
    ladder.degrees.push_back(e.degree);
    ladder.entries.push_back(std::move(e));
  }
  for (int d : ladder.degrees) ladder.stable = ladder.stable && d == ladder.degrees.front();
  return ladder;
}

int predicted_degree(const Decomposition& dec, const std::string& condition) {
  const auto& k = dec.config().resonance_index;
  if (!k) throw std::invalid_argument("predicted_degree needs a resonance index");
  // d_l = sum_{i<=l} dim ker(lambda_i I - A); every Dirichlet eigenvalue on an interval is simple.
  int d_k = 0;
  for (int i = 0; i < *k; ++i) d_k += 1;
  const int d_km1 = d_k - 1;
  if (condition == "G1") return (d_k % 2) ? -1 : 1;
  if (condition == "G2") return (d_km1 % 2) ? -1 : 1;
  throw std::invalid_argument("predicted_degree: condition must be G1 or G2");
}

PeriodicCheck check_periodic_solution(const StateE& w, const NonlinearitySpec& f, const Decomposition& dec,
                                      const IntegratorSettings& settings, const AprioriConstants& k) {
  IntegratorSettings fixed = settings;
  fixed.error_control = false;
  IntegratorSettings accurate = settings;
  accurate.scheme = Scheme::Rk4Ref;
  accurate.error_control = true;
  accurate.tol = 1e-12;
  accurate.max_halvings = 10;

  // Chord iteration: residual from the reference integrator, Jacobian from the fixed-step map.
  VectorField G_fixed = [&](const Eigen::VectorXd& v) {
    return Eigen::VectorXd(v - poincare(StateE::unstack(v), f, dec, fixed).stacked());
  };
  Eigen::VectorXd v = w.stacked();
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(fd_jacobian(G_fixed, v, G_fixed(v), 1e-6));
  PeriodicCheck out;
  for (int it = 0; it < 8; ++it) {
    const Eigen::VectorXd r = v - poincare(StateE::unstack(v), f, dec, accurate).stacked();
    if (r.norm() < 1e-13) break;
    const Eigen::VectorXd dv = lu.solve(r);
    v -= dv;
    out.polish_correction += dv.norm();
  }

  const StateE w0 = StateE::unstack(v);
  const Trajectory tr = integrate(w0, 2.0 * f.period, f, dec, accurate);
  out.point = v;
  out.periodicity_error = e_norm(tr.final_state() - w0, dec);
  for (std::size_t j = 0; j < tr.times.size(); ++j) {
    if (tr.times[j] > f.period * (1.0 + 1e-12)) break;
    const StateE& z = tr.states[j];
    const StateE pz = project(z, Projection::P, dec);
    out.max_q_norm = std::max(out.max_q_norm, e_norm(z - pz, dec));
    out.max_kernel_velocity = std::max(out.max_kernel_velocity, pz.b.norm());
  }
  out.within_q_bound = out.max_q_norm <= k.R1 + k.R2;
  out.within_velocity_bound = dec.kernel_dim() == 0 || out.max_kernel_velocity <= k.kernel_velocity_bound;
  return out;
}

NonexistenceReport nonexistence_demo(const NonlinearitySpec& f, const Decomposition& dec,
                                     const IntegratorSettings& settings, int periods, double search_radius,
                                     const NewtonOptions& newton) {
  if (!f.state_independent()) throw std::invalid_argument("nonexistence demo needs a state-independent forcing");
  if (periods < 1 || !(search_radius > 0.0)) throw std::invalid_argument("nonexistence demo needs periods >= 1, radius > 0");
  const int n = dec.size();
  NonexistenceReport rep;
  rep.search_radius = search_radius;

  CoeffVec y0 = CoeffVec::Zero(n);
  const Eigen::Index m = std::min<Eigen::Index>(n, f.y0.size());
  y0.head(m) = f.y0.head(m);
  rep.expected_slope = h_inner(y0, y0);

  const Trajectory tr = integrate(StateE::zeros(n), periods * f.period, f, dec, settings);
  rep.times = tr.times;
  rep.drift = drift_functional(tr, y0, dec);
  rep.fitted_slope = fitted_slope(rep.times, rep.drift);

  Box box{Eigen::VectorXd(2 * n), Eigen::VectorXd(2 * n)};
  for (int i = 0; i < n; ++i) {
    const double wa = std::pow(dec.block(i).lambda_i, dec.config().alpha);
    box.lo(i) = -search_radius / wa;
    box.hi(i) = search_radius / wa;
    box.lo(n + i) = -search_radius;
    box.hi(n + i) = search_radius;
  }
  IntegratorSettings fixed = settings;
  fixed.error_control = false;
  VectorField G = [&](const Eigen::VectorXd& v) {
    return Eigen::VectorXd(v - poincare(StateE::unstack(v), f, dec, fixed).stacked());
  };
  rep.zeros = multistart_newton(G, box, newton, &rep.stats);
  return rep;
}

PlanarField named_planar_field(const std::string& name, double T) {
  const double w = 2.0 * std::numbers::pi / T;
  if (name == "LINEAR_SINK") {
    return [](double, const Eigen::Vector2d& u) -> Eigen::Vector2d { return -u; };
  }
  if (name == "ROTATION_SINK") {
    return [w](double t, const Eigen::Vector2d& u) -> Eigen::Vector2d {
      return {-u(0) - u(1) + 0.5 * std::cos(w * t), u(0) - u(1) + 0.5 * std::sin(w * t)};
    };
  }
  if (name == "SQUARE") {
    return [w](double t, const Eigen::Vector2d& u) -> Eigen::Vector2d {
      return {-(u(0) * u(0) - u(1) * u(1)) + 0.3 * std::cos(w * t), -2.0 * u(0) * u(1) + 0.3 * std::sin(w * t)};
    };
  }
  throw std::invalid_argument("unknown planar field '" + name + "'");
}

std::vector<double> default_mu_ladder() { return {1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625}; }

namespace {

struct BlowUp {};

Eigen::Vector2d planar_flow(const PlanarField& f, double mu, double T, const Eigen::Vector2d& u0, int steps) {
  const double h = T / steps;
  Eigen::Vector2d u = u0;
  for (int j = 0; j < steps; ++j) {
    const double t = j * h;
    const Eigen::Vector2d k1 = mu * f(t, u);
    const Eigen::Vector2d k2 = mu * f(t + 0.5 * h, u + 0.5 * h * k1);
    const Eigen::Vector2d k3 = mu * f(t + 0.5 * h, u + 0.5 * h * k2);
    const Eigen::Vector2d k4 = mu * f(t + h, u + h * k3);
    u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!u.allFinite() || u.norm() > 1e8) throw BlowUp{};
  }
  return u;
}

}  // namespace

AveragingReport verify_kras_averaging(const PlanarField& f, double T, const Box& U,
                                      const std::vector<double>& mu_ladder, int rk4_steps) {
  if (U.dim() != 2) throw std::invalid_argument("averaging check works on planar boxes");
  if (!(T > 0.0) || rk4_steps < 1) throw std::invalid_argument("averaging check needs T > 0 and steps >= 1");
  AveragingReport rep;

  VectorField minus_fhat = [&](const Eigen::VectorXd& x) {
    const Eigen::Vector2d u = x;
    const int n = 128;
    const double h = T / n;
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    for (int j = 0; j <= n; ++j) {
      const double w = (j == 0 || j == n) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
      acc += w * f(j * h, u);
    }
    return Eigen::VectorXd(-acc * (h / 3.0));
  };
  rep.averaged_degree = brouwer_degree(minus_fhat, U).value;

  for (double mu : mu_ladder) {
    AveragingEntry e;
    e.mu = mu;
    VectorField g = [&](const Eigen::VectorXd& x) {
      const Eigen::Vector2d u = x;
      return Eigen::VectorXd(u - planar_flow(f, mu, T, u, rk4_steps));
    };
    try {
      e.degree = brouwer_degree(g, U).value;
    } catch (const BlowUp&) {
      e.skipped = true;
      e.skip_reason = "BLOW_UP";
    } catch (const NumericalFailure& ex) {
      e.skipped = true;
      e.skip_reason = ex.code();
    }
    rep.entries.push_back(e);
  }

  std::vector<AveragingEntry> asc = rep.entries;
  std::sort(asc.begin(), asc.end(), [](const AveragingEntry& a, const AveragingEntry& b) { return a.mu < b.mu; });
  for (const AveragingEntry& e : asc) {
    if (e.skipped) continue;
    if (e.degree != rep.averaged_degree) break;
    rep.mu_star = e.mu;
  }
  rep.agrees_below_mu_star = rep.mu_star > 0.0;
  return rep;
}

}  // namespace dampwave
