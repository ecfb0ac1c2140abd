#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dampwave/nonlinearity.hpp"
#include "dampwave/spectral.hpp"
#include "dampwave/state.hpp"

namespace dampwave {

enum class Scheme { ExpEuler, ExpMidpoint, Rk4Ref };
std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct IntegratorSettings {
  Scheme scheme = Scheme::ExpMidpoint;
  double h = 1.0 / 256.0;
  double tol = 1e-8;
  int max_halvings = 6;
  /// Off: a single fixed-step pass (used inside Newton solves).
  bool error_control = true;

  /// h > 0, h <= T/8, tol > 0, max_halvings >= 0.
  void validate(double period) const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateE> states;
  Scheme scheme = Scheme::ExpMidpoint;
  double step = 0.0;
  /// ||w_h(t_end) - w_{h/2}(t_end)||_E of the last halving; 0 without error control.
  double error_estimate = 0.0;

  const StateE& final_state() const { return states.back(); }
};

/// Second component of the right-hand side: v' gets F(t, u).
using Forcing = std::function<CoeffVec(double t, const CoeffVec& u)>;

/// F(t, u)(x) = f(t, x, u(x)) projected on the retained modes.
CoeffVec nemitskii(const NonlinearitySpec& f, double t, const CoeffVec& u, const EigenBasis& basis);

/// One step of w' = -A w + (0, F(t, u)) from t to t + h.
StateE mild_step(const StateE& w, double t, double h, const NonlinearitySpec& f, const Decomposition& dec,
                 const IntegratorSettings& settings);

/// Integrates from t0 to t_end with the step rounded down to divide the interval.
/// Throws NumericalFailure on overflow or when tol is not met within max_halvings.
Trajectory integrate(const StateE& w0, double t_end, const NonlinearitySpec& f, const Decomposition& dec,
                     const IntegratorSettings& settings, double t0 = 0.0);

/// Same, with an arbitrary forcing instead of a Nemitskii operator.
Trajectory integrate_forcing(const StateE& w0, double t0, double t_end, const Forcing& forcing,
                             const Decomposition& dec, const IntegratorSettings& settings);

/// Phi_T(w0) with T = f.period.
StateE poincare(const StateE& w0, const NonlinearitySpec& f, const Decomposition& dec,
                const IntegratorSettings& settings);

/// Psi_T(s, w0): the nonlinearity replaced by
///   G(s, t, u) = P F(t, P u + s Q u) + s Q F(t, P u + s Q u).
StateE poincare_homotopy(double s, const StateE& w0, const NonlinearitySpec& f, const Decomposition& dec,
                         const IntegratorSettings& settings);

/// Kernel coordinates: (u_0, v_0) stacked, 2 * dim X_0 entries in kernel-mode order.
/// Theta^mu_T for u' = mu v, v' = -c mu lambda v + mu P F(t, u).
Eigen::VectorXd kernel_flow(double mu, const Eigen::VectorXd& u0v0, const NonlinearitySpec& f,
                            const Decomposition& dec, const IntegratorSettings& settings);

/// t -> <P u(t), c lambda y0> + <P v(t), y0> along the trajectory. y0 must vanish off the kernel.
std::vector<double> drift_functional(const Trajectory& traj, const CoeffVec& y0, const Decomposition& dec);

/// Least-squares slope of ys against xs.
double fitted_slope(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace dampwave
