#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dampwave/evolution.hpp"
#include "dampwave/resonance.hpp"

namespace dampwave {

using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static Box cube(int dim, double half_width);
  int dim() const { return static_cast<int>(lo.size()); }
  Eigen::VectorXd center() const { return 0.5 * (lo + hi); }
  bool contains(const Eigen::VectorXd& x) const;
};

enum class DegreeMethod { Sign1D, Winding2D, RegularSum };
enum class Rigor { Certified, Heuristic };
std::string to_string(DegreeMethod m);
std::string to_string(Rigor r);

struct ZeroRecord {
  Eigen::VectorXd point;
  int jacobian_sign = 0;
  double residual = 0.0;
  double determinant = 0.0;
  double min_singular_ratio = 0.0;  // smallest / largest singular value of the Jacobian
};

struct DegreeResult {
  int value = 0;
  DegreeMethod method = DegreeMethod::Sign1D;
  Rigor rigor = Rigor::Certified;
  std::vector<ZeroRecord> zeros;               // RegularSum
  std::vector<Eigen::VectorXd> boundary_values;  // Sign1D end values, Winding2D image polygon
  double total_winding = 0.0;                  // Winding2D, before rounding
  double boundary_margin = 0.0;                // min |field| / (L r) over the boundary samples
};

struct NewtonOptions {
  int starts = 64;
  double tol = 1e-10;
  double dedup_radius = 1e-5;
  int max_iter = 40;
  double fd_rel_step = 1e-6;
  /// Jacobians with smallest/largest singular value below this flag the result heuristic.
  double singular_ratio = 1e-8;
};

struct NewtonStats {
  int starts_run = 0;
  int converged = 0;
  int abandoned = 0;
  long field_evals = 0;
};

/// Forward-difference Jacobian with step fd_rel * max(1, |x_j|).
Eigen::MatrixXd fd_jacobian(const VectorField& F, const Eigen::VectorXd& x, const Eigen::VectorXd& fx,
                            double fd_rel, long* evals = nullptr);

/// Damped Newton from the box centre and `starts` Halton points in the box.
/// Returns the distinct zeros (no membership filtering).
std::vector<ZeroRecord> multistart_newton(const VectorField& F, const Box& box, const NewtonOptions& opts,
                                          NewtonStats* stats = nullptr);

/// Dim 1: sign difference of the end values; dim 2: boundary winding number; dim 3: regular sum.
/// Throws NumericalFailure("BOUNDARY_ZERO") when the boundary margin rule fails.
DegreeResult brouwer_degree(const VectorField& F, const Box& box, const NewtonOptions& opts = {});

struct AveragedDegree {
  DegreeResult kernel_degree;  // deg_B(F^, U_R^0)
  int assembled = 0;           // (-1)^{dim X_0} deg_B(F^, U_R^0)
};

AveragedDegree averaged_degree(const NonlinearitySpec& f, const Decomposition& dec, double R);

struct LadderEntry {
  int N = 0;
  int degree = 0;
  Rigor rigor = Rigor::Certified;
  std::vector<ZeroRecord> fixed_points;  // inside W, stacked (a, b) coordinates
  NewtonStats stats;
  AprioriConstants constants;
  double kernel_radius = 0.0;  // R3 + 1
  double q_radius = 0.0;       // R1 + R2 + 1
};

struct TruncationLadder {
  std::vector<int> N_values;
  std::vector<int> degrees;
  std::vector<LadderEntry> entries;
  bool stable = true;
  /// Throws NumericalFailure("UNSTABLE") when the degrees differ.
  void require_stable() const;
};

/// Everything a single truncation level needs, minus the mode count.
struct DegreeSetup {
  double length = 3.141592653589793;
  int grid = 64;  // raised to 4N when smaller
  double c = 0.5;
  std::optional<int> k;  // resonant index; otherwise lambda
  double lambda = 0.0;
  double alpha = 0.5;
  NonlinearitySpec f;
  IntegratorSettings integrator;
  NewtonOptions newton;
  int g_samples = 400;
  std::uint64_t seed = 1;
  std::vector<double> R_ladder = default_R_ladder();
};

Decomposition decomposition_for(const DegreeSetup& setup, int N);

/// Fixed points of Phi_T in W = {||P z||_E < R3 + 1} x {||Q z||_E < R1 + R2 + 1} and their index sum.
LadderEntry poincare_degree_at(const DegreeSetup& setup, int N);
TruncationLadder poincare_degree(const DegreeSetup& setup, const std::vector<int>& N_ladder);

/// Re-integration and a priori bound checks for a fixed point of Phi_T. The point is first
/// polished against the RK4 reference map (tol 1e-12), which also does the re-integration.
struct PeriodicCheck {
  Eigen::VectorXd point;         // stacked (a, b), after polishing
  double polish_correction = 0;  // total distance moved by the polish
  double periodicity_error = 0;  // ||w(2T) - w(0)||_E
  double max_q_norm = 0;         // max_t ||Q w(t)||_E over one period
  double max_kernel_velocity = 0;  // max_t ||P v(t)||_H over one period
  bool within_q_bound = false;         // max_q_norm <= R1 + R2
  bool within_velocity_bound = false;  // max_kernel_velocity <= m1/(c lambda) + 1
};

PeriodicCheck check_periodic_solution(const StateE& w, const NonlinearitySpec& f, const Decomposition& dec,
                                      const IntegratorSettings& settings, const AprioriConstants& k);

struct NonexistenceReport {
  std::vector<double> times;
  std::vector<double> drift;  // drift functional along the trajectory from rest
  double fitted_slope = 0.0;
  double expected_slope = 0.0;  // ||y0||_H^2
  double search_radius = 0.0;
  NewtonStats stats;
  std::vector<ZeroRecord> zeros;  // fixed points of Phi_T found in the search box
  /// No fixed point found after the full start budget.
  bool exhaustive_failure() const { return zeros.empty(); }
};

/// Drift of a state-independent forcing over `periods` periods, then multistart Newton on I - Phi_T
/// in the cube of half-width search_radius (energy-scaled in the a-coordinates).
NonexistenceReport nonexistence_demo(const NonlinearitySpec& f, const Decomposition& dec,
                                     const IntegratorSettings& settings, int periods, double search_radius,
                                     const NewtonOptions& newton);

/// (-1)^{d_k} under G1, (-1)^{d_{k-1}} under G2, with d_l = l for simple eigenvalues.
int predicted_degree(const Decomposition& dec, const std::string& condition);

/// Planar T-periodic field f(t, u) for the averaging check.
using PlanarField = std::function<Eigen::Vector2d(double t, const Eigen::Vector2d& u)>;

struct AveragingEntry {
  double mu = 0.0;
  bool skipped = false;
  std::string skip_reason;
  int degree = 0;  // deg_B(I - phi^mu_T, U)
};

struct AveragingReport {
  int averaged_degree = 0;  // deg_B(-f^, U)
  std::vector<AveragingEntry> entries;
  double mu_star = 0.0;  // largest ladder mu with agreement at it and every smaller mu; 0 if none
  bool agrees_below_mu_star = false;
};

std::vector<double> default_mu_ladder();

/// LINEAR_SINK: -u. ROTATION_SINK: (-u1 - u2, u1 - u2) + 0.5 (cos, sin)(2 pi t / T).
/// SQUARE: -(u1^2 - u2^2, 2 u1 u2) + 0.3 (cos, sin)(2 pi t / T), so -f^ is T z^2.
PlanarField named_planar_field(const std::string& name, double T);

AveragingReport verify_kras_averaging(const PlanarField& f, double T, const Box& U,
                                      const std::vector<double>& mu_ladder, int rk4_steps = 400);

}  // namespace dampwave
