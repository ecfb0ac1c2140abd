#include "dampwave/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "dampwave/errors.hpp"

namespace dampwave {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::ExpEuler: return "EXP_EULER";
    case Scheme::ExpMidpoint: return "EXP_MIDPOINT";
    case Scheme::Rk4Ref: return "RK4_REF";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "EXP_EULER") return Scheme::ExpEuler;
  if (s == "EXP_MIDPOINT") return Scheme::ExpMidpoint;
  if (s == "RK4_REF") return Scheme::Rk4Ref;
  throw std::invalid_argument("unknown integrator scheme '" + s + "'");
}

void IntegratorSettings::validate(double period) const {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("integrator step h must be positive");
  if (h > period / 8.0 * (1.0 + 1e-12)) throw std::invalid_argument("integrator step h exceeds T/8");
  if (!(tol > 0.0)) throw std::invalid_argument("integrator tol must be positive");
  if (max_halvings < 0) throw std::invalid_argument("max_halvings must be non-negative");
}

CoeffVec nemitskii(const NonlinearitySpec& f, double t, const CoeffVec& u, const EigenBasis& basis) {
  const int n = basis.size();
  if (u.size() != n) throw std::invalid_argument("nemitskii: state shape does not match basis");
  if (f.family == Family::KernelConst) {
    // y0 is band-limited, so its projection is a truncation of the coefficients.
    CoeffVec out = CoeffVec::Zero(n);
    const Eigen::Index m = std::min<Eigen::Index>(n, f.y0.size());
    out.head(m) = f.y0.head(m);
    return out;
  }
  const GridVec g = grid_eval(u, basis);
  GridVec v(g.size());
  if (f.family == Family::Arctan) {
    const double shift = f.eval(t, 0.0, 0.0);  // the s-independent time term
    for (Eigen::Index j = 0; j < g.size(); ++j) v(j) = f.a * std::atan(f.b * g(j)) + shift;
  } else {
    for (Eigen::Index j = 0; j < g.size(); ++j) v(j) = f.eval(t, basis.nodes()(j), g(j));
  }
  return grid_project(v, basis);
}

namespace {

Forcing nemitskii_forcing(const NonlinearitySpec& f, const Decomposition& dec) {
  return [&f, &dec](double t, const CoeffVec& u) { return nemitskii(f, t, u, dec.basis()); };
}

// Linear part of a block-diagonal system w_i' = -M_i w_i + (0, F_i).
class Propagator {
 public:
  explicit Propagator(std::vector<Block2> blocks) : blocks_(std::move(blocks)) {
    for (const Block2& b : blocks_) rho_max_ = std::max({rho_max_, std::abs(b.mu_minus), std::abs(b.mu_plus)});
  }

  int size() const { return static_cast<int>(blocks_.size()); }
  const Block2& block(int i) const { return blocks_[static_cast<std::size_t>(i)]; }
  double rho_max() const { return rho_max_; }

  void prepare(double h) {
    if (h == h_) return;
    h_ = h;
    exp_full_.clear();
    int_full_.clear();
    exp_half_.clear();
    int_half_.clear();
    for (const Block2& b : blocks_) {
      exp_full_.push_back(block_exp(b, h));
      int_full_.push_back(block_exp_integral(b, h));
      exp_half_.push_back(block_exp(b, 0.5 * h));
      int_half_.push_back(block_exp_integral(b, 0.5 * h));
    }
  }

  // S(h) w + W(h) (0, F), or the half-step version.
  StateE apply(const StateE& w, const CoeffVec& forcing, bool half) const {
    const auto& e = half ? exp_half_ : exp_full_;
    const auto& wi = half ? int_half_ : int_full_;
    StateE out = StateE::zeros(w.size());
    for (int i = 0; i < size(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      const Eigen::Vector2d r = e[k] * Eigen::Vector2d(w.a(i), w.b(i)) + wi[k].col(1) * forcing(i);
      out.a(i) = r(0);
      out.b(i) = r(1);
    }
    return out;
  }

  // -M w + (0, F)
  StateE rhs(const StateE& w, const CoeffVec& forcing) const {
    StateE out = StateE::zeros(w.size());
    for (int i = 0; i < size(); ++i) {
      const Eigen::Matrix2d& m = blocks_[static_cast<std::size_t>(i)].matrix;
      const Eigen::Vector2d r = -(m * Eigen::Vector2d(w.a(i), w.b(i)));
      out.a(i) = r(0);
      out.b(i) = r(1) + forcing(i);
    }
    return out;
  }

 private:
  std::vector<Block2> blocks_;
  double rho_max_ = 0.0;
  double h_ = -1.0;
  std::vector<Eigen::Matrix2d> exp_full_, int_full_, exp_half_, int_half_;
};

StateE step(Propagator& prop, const StateE& w, double t, double h, const Forcing& forcing, Scheme scheme) {
  switch (scheme) {
    case Scheme::ExpEuler: {
      prop.prepare(h);
      return prop.apply(w, forcing(t, w.a), false);
    }
    case Scheme::ExpMidpoint: {
      prop.prepare(h);
      const StateE half = prop.apply(w, forcing(t, w.a), true);
      return prop.apply(w, forcing(t + 0.5 * h, half.a), false);
    }
    case Scheme::Rk4Ref: {
      // Classical RK4 on the stiff system, substepped so that h |mu|max <= 0.5.
      const int sub = std::max(1, static_cast<int>(std::ceil(h * prop.rho_max() / 0.5)));
      const double k = h / sub;
      StateE y = w;
      for (int j = 0; j < sub; ++j) {
        const double s = t + j * k;
        const StateE k1 = prop.rhs(y, forcing(s, y.a));
        const StateE y2 = y + k1 * (0.5 * k);
        const StateE k2 = prop.rhs(y2, forcing(s + 0.5 * k, y2.a));
        const StateE y3 = y + k2 * (0.5 * k);
        const StateE k3 = prop.rhs(y3, forcing(s + 0.5 * k, y3.a));
        const StateE y4 = y + k3 * k;
        const StateE k4 = prop.rhs(y4, forcing(s + k, y4.a));
        y = y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (k / 6.0);
      }
      return y;
    }
  }
  throw std::logic_error("bad scheme");
}

void check_finite(const StateE& w, double t) {
  const double big = 1e150;
  if (!w.a.allFinite() || !w.b.allFinite() || w.a.cwiseAbs().maxCoeff() > big ||
      w.b.cwiseAbs().maxCoeff() > big) {
    throw NumericalFailure("OVERFLOW", "state left the finite range at t=" + std::to_string(t));
  }
}

Trajectory run_fixed(Propagator& prop, const StateE& w0, double t0, double t_end, long steps,
                     const Forcing& forcing, Scheme scheme) {
  Trajectory tr;
  tr.scheme = scheme;
  const double h = (t_end - t0) / static_cast<double>(steps);
  tr.step = h;
  tr.times.reserve(static_cast<std::size_t>(steps + 1));
  tr.states.reserve(static_cast<std::size_t>(steps + 1));
  tr.times.push_back(t0);
  tr.states.push_back(w0);
  StateE w = w0;
  for (long j = 0; j < steps; ++j) {
    const double t = t0 + static_cast<double>(j) * h;
    w = step(prop, w, t, h, forcing, scheme);
    const double tn = (j + 1 == steps) ? t_end : t0 + static_cast<double>(j + 1) * h;
    check_finite(w, tn);
    tr.times.push_back(tn);
    tr.states.push_back(w);
  }
  return tr;
}

using NormFn = std::function<double(const StateE&)>;

Trajectory run_controlled(Propagator& prop, const StateE& w0, double t0, double t_end, const Forcing& forcing,
                          const IntegratorSettings& settings, const NormFn& norm) {
  if (!(t_end > t0)) throw std::invalid_argument("integration needs t_end > t0");
  if (!(settings.h > 0.0)) throw std::invalid_argument("integrator step h must be positive");
  long steps = std::max(1L, static_cast<long>(std::ceil((t_end - t0) / settings.h - 1e-9)));
  if (!settings.error_control) return run_fixed(prop, w0, t0, t_end, steps, forcing, settings.scheme);

  Trajectory coarse = run_fixed(prop, w0, t0, t_end, steps, forcing, settings.scheme);
  double err = 0.0;
  for (int k = 0; k <= settings.max_halvings; ++k) {
    steps *= 2;
    Trajectory fine = run_fixed(prop, w0, t0, t_end, steps, forcing, settings.scheme);
    err = norm(fine.final_state() - coarse.final_state());
    if (err <= settings.tol) {
      fine.error_estimate = err;
      return fine;
    }
    coarse = std::move(fine);
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "step-halving error %.3e above tol %.3e after %d halvings", err, settings.tol,
                settings.max_halvings);
  throw NumericalFailure("TOL_NOT_MET", buf);
}

std::vector<Block2> full_blocks(const Decomposition& dec) {
  std::vector<Block2> out;
  for (const ModeBlock& mb : dec.blocks()) out.push_back(mb.block);
  return out;
}

NormFn e_norm_fn(const Decomposition& dec) {
  return [&dec](const StateE& z) { return e_norm(z, dec); };
}

}  // namespace

StateE mild_step(const StateE& w, double t, double h, const NonlinearitySpec& f, const Decomposition& dec,
                 const IntegratorSettings& settings) {
  if (!(h > 0.0)) throw std::invalid_argument("mild_step needs h > 0");
  w.check_shape(dec.size());
  Propagator prop(full_blocks(dec));
  StateE out = step(prop, w, t, h, nemitskii_forcing(f, dec), settings.scheme);
  check_finite(out, t + h);
  return out;
}

Trajectory integrate_forcing(const StateE& w0, double t0, double t_end, const Forcing& forcing,
                             const Decomposition& dec, const IntegratorSettings& settings) {
  w0.check_shape(dec.size());
  Propagator prop(full_blocks(dec));
  return run_controlled(prop, w0, t0, t_end, forcing, settings, e_norm_fn(dec));
}

Trajectory integrate(const StateE& w0, double t_end, const NonlinearitySpec& f, const Decomposition& dec,
                     const IntegratorSettings& settings, double t0) {
  settings.validate(f.period);
  return integrate_forcing(w0, t0, t_end, nemitskii_forcing(f, dec), dec, settings);
}

StateE poincare(const StateE& w0, const NonlinearitySpec& f, const Decomposition& dec,
                const IntegratorSettings& settings) {
  return integrate(w0, f.period, f, dec, settings).final_state();
}

StateE poincare_homotopy(double s, const StateE& w0, const NonlinearitySpec& f, const Decomposition& dec,
                         const IntegratorSettings& settings) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("homotopy parameter s must lie in [0,1]");
  settings.validate(f.period);
  if (s == 1.0) return poincare(w0, f, dec, settings);
  CoeffVec kmask = CoeffVec::Zero(dec.size());
  for (int i : dec.idx_kernel()) kmask(i) = 1.0;
  const CoeffVec qscale = (CoeffVec::Ones(dec.size()) - kmask) * s;
  const CoeffVec weight = kmask + qscale;  // P + s Q, diagonal in the eigenbasis
  Forcing g = [&f, &dec, weight](double t, const CoeffVec& u) {
    const CoeffVec us = weight.cwiseProduct(u);
    return CoeffVec(weight.cwiseProduct(nemitskii(f, t, us, dec.basis())));
  };
  return integrate_forcing(w0, 0.0, f.period, g, dec, settings).final_state();
}

Eigen::VectorXd kernel_flow(double mu, const Eigen::VectorXd& u0v0, const NonlinearitySpec& f,
                            const Decomposition& dec, const IntegratorSettings& settings) {
  if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("kernel_flow needs mu in (0,1]");
  settings.validate(f.period);
  const int d = dec.kernel_dim();
  if (d == 0) throw std::invalid_argument("kernel_flow needs a resonant configuration");
  if (u0v0.size() != 2 * d) throw std::invalid_argument("kernel coordinates must have 2*dim X0 entries");
  const auto& kidx = dec.idx_kernel();
  std::vector<Block2> blocks;
  for (int i : kidx) blocks.push_back(Block2::from_matrix(mu * dec.block(i).matrix()));
  Propagator prop(std::move(blocks));
  const int n = dec.size();
  Forcing g = [&, mu](double t, const CoeffVec& u0) {
    CoeffVec full = CoeffVec::Zero(n);
    for (int j = 0; j < d; ++j) full(kidx[static_cast<std::size_t>(j)]) = u0(j);
    const CoeffVec fx = nemitskii(f, t, full, dec.basis());
    CoeffVec out(d);
    for (int j = 0; j < d; ++j) out(j) = mu * fx(kidx[static_cast<std::size_t>(j)]);
    return out;
  };
  const double alpha = dec.config().alpha;
  NormFn norm = [&](const StateE& z) {
    double acc = 0.0;
    for (int j = 0; j < d; ++j) {
      const double w = std::pow(dec.block(kidx[static_cast<std::size_t>(j)]).lambda_i, alpha);
      acc += w * w * z.a(j) * z.a(j);
    }
    return std::sqrt(acc) + z.b.norm();
  };
  const StateE z0 = StateE::unstack(u0v0);
  const Trajectory tr = run_controlled(prop, z0, 0.0, f.period, g, settings, norm);
  return tr.final_state().stacked();
}

std::vector<double> drift_functional(const Trajectory& traj, const CoeffVec& y0, const Decomposition& dec) {
  const int n = dec.size();
  if (y0.size() != n) throw std::invalid_argument("drift_functional: y0 shape does not match basis");
  for (int i = 0; i < n; ++i) {
    if (dec.block(i).cls != ModeClass::Kernel && y0(i) != 0.0) {
      throw std::invalid_argument("drift_functional: y0 has a component outside the kernel");
    }
  }
  const double cl = dec.config().c * dec.config().lambda;
  std::vector<double> out;
  out.reserve(traj.states.size());
  for (const StateE& w : traj.states) {
    double acc = 0.0;
    for (int i : dec.idx_kernel()) acc += w.a(i) * cl * y0(i) + w.b(i) * y0(i);
    out.push_back(acc);
  }
  return out;
}

double fitted_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("fitted_slope needs >= 2 paired points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace dampwave
