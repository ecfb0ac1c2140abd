#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dampwave/basis.hpp"
#include "dampwave/state.hpp"

namespace dampwave {

/// A real 2x2 matrix M with the invariants needed to evaluate exp(-tM) and
/// its integrals in closed form. Writing m = tr(M)/2 and d^2 = m^2 - det(M),
/// the eigenvalues are m -/+ d and (M - mI)^2 = d^2 I, so
///   exp(-tM) = e^{-tm} (C(t) I - S(t) (M - mI)),
/// with C = cosh(td), S = sinh(td)/d for d^2 > 0, C = cos(tw), S = sin(tw)/w
/// for d^2 = -w^2 < 0, and C = 1, S = t at a double root.
struct Block2 {
  Eigen::Matrix2d matrix;
  double half_trace = 0.0;
  double disc_quarter = 0.0;  // d^2
  std::complex<double> mu_minus;
  std::complex<double> mu_plus;

  static Block2 from_matrix(const Eigen::Matrix2d& m);

  bool double_root() const { return disc_quarter == 0.0; }
  bool complex_pair() const { return disc_quarter < 0.0; }
};

/// exp(-tM); any sign of t.
Eigen::Matrix2d block_exp(const Block2& b, double t);

/// The matrix  int_0^h exp(-sM) ds.  Singular M (a zero root) is handled by
/// the phi_1 branch, near-double roots by a moment series.
Eigen::Matrix2d block_exp_integral(const Block2& b, double h);

/// phi_1(z) = (e^z - 1)/z with a series for |z| < 1e-4.
double phi1(double z);
std::complex<double> phi1(std::complex<double> z);

enum class ModeClass { Negative, Kernel, Positive };
std::string to_string(ModeClass c);

/// Damping c > 0, resonance parameter lambda, the base operator and alpha.
struct DampedConfig {
  double c = 0.5;
  double lambda = 1.0;
  BasisPtr basis;
  std::optional<int> resonance_index;  // 1-based k with lambda = lambda_k
  double alpha = 0.5;

  /// lambda is copied from lambda_k, so the kernel test is exact.
  static DampedConfig resonant(BasisPtr basis, double c, int k, double alpha = 0.5);
  /// lambda must not coincide with an eigenvalue.
  static DampedConfig nonresonant(BasisPtr basis, double c, double lambda, double alpha = 0.5);

  void validate() const;
};

/// Restriction of the block operator (x, y) -> (-y, A(x + cy) - lambda x) to mode i:
/// [[0, -1], [lambda_i - lambda, c lambda_i]].
struct ModeBlock {
  int index = 0;  // 1-based
  double lambda_i = 0.0;
  Block2 block;
  ModeClass cls = ModeClass::Positive;

  const Eigen::Matrix2d& matrix() const { return block.matrix; }
  std::complex<double> mu_minus() const { return block.mu_minus; }
  std::complex<double> mu_plus() const { return block.mu_plus; }
  bool double_root() const { return block.double_root(); }
};

ModeBlock mode_block(double lambda_i, int index, const DampedConfig& cfg);

/// exp(-t M_i). Negative times are only accepted on E_- blocks, where the
/// semigroup extends to a group.
Eigen::Matrix2d semigroup_block(const ModeBlock& b, double t);

enum class Projection { P, Qminus, Qplus };

/// Splitting E = E_- + E_0 + E_+ realized mode by mode.
class Decomposition {
 public:
  explicit Decomposition(DampedConfig cfg);

  const DampedConfig& config() const { return cfg_; }
  const EigenBasis& basis() const { return *cfg_.basis; }
  int size() const { return basis().size(); }

  const std::vector<ModeBlock>& blocks() const { return blocks_; }
  const ModeBlock& block(int i) const { return blocks_.at(static_cast<std::size_t>(i)); }

  /// 0-based mode positions of each class.
  const std::vector<int>& idx_minus() const { return idx_minus_; }
  const std::vector<int>& idx_kernel() const { return idx_kernel_; }
  const std::vector<int>& idx_plus() const { return idx_plus_; }
  int kernel_dim() const { return static_cast<int>(idx_kernel_.size()); }

  /// Per-mode 2x2 spectral projection for mode position i.
  const Eigen::Matrix2d& projector(Projection which, int i) const;

  double delta() const { return delta_; }
  double M_const() const { return M_const_; }

  /// max over modes of the 2x2 spectral norm of Q_+ (resp. Q_-) in energy-weighted coordinates.
  double q_plus_norm() const { return q_plus_norm_; }
  double q_minus_norm() const { return q_minus_norm_; }

  /// diag(lambda_i^alpha, 1): maps mode coordinates to coordinates whose
  /// Euclidean norm matches the E-norm contribution of the mode.
  Eigen::Matrix2d energy_weight(int i) const;

  /// Modes flagged for reporting: double roots, and roots within 1e-9 of 1/c.
  const std::vector<int>& double_root_modes() const { return double_root_modes_; }
  const std::vector<int>& one_over_c_modes() const { return one_over_c_modes_; }

  /// sup_{t>=0} e^{delta t} || D S_i(t) Q_+ D^{-1} ||_2 for mode position i.
  double plus_envelope_sup(int i) const { return envelope_sup_.at(static_cast<std::size_t>(i)); }

 private:
  void compute_decay_constants();

  DampedConfig cfg_;
  std::vector<ModeBlock> blocks_;
  std::vector<int> idx_minus_, idx_kernel_, idx_plus_;
  std::vector<Eigen::Matrix2d> proj_P_, proj_Qm_, proj_Qp_;
  std::vector<double> envelope_sup_;
  std::vector<int> double_root_modes_, one_over_c_modes_;
  double delta_ = 1.0;
  double M_const_ = 1.0;
  double q_plus_norm_ = 0.0;
  double q_minus_norm_ = 0.0;
};

Decomposition decompose(const DampedConfig& cfg);

/// S(t) applied to a state; t < 0 only for states in E_-.
StateE semigroup(const Decomposition& dec, const StateE& z, double t);
StateE project(const StateE& z, Projection which, const Decomposition& dec);

/// ||(a, b)||_E = ||a||_alpha + ||b||.
double e_norm(const StateE& z, const Decomposition& dec);

/// |z| = ||(P + Q_-) z||_E + sup_t ||e^{delta t} S(t) Q_+ z||_E, with the supremum
/// taken over t_grid and refined at every sampled local maximum.
double custom_norm(const StateE& z, const Decomposition& dec, std::span<const double> t_grid);

/// Tail bound for the supremum beyond the last grid point; the sampled supremum
/// is certified when this does not exceed it.
double custom_norm_tail_bound(const StateE& z, const Decomposition& dec, double t_max);

/// Uniform grid from 0 past max(5/delta, t_min) to where no E_+ envelope can exceed its t = 0 value,
/// with at least the given sample count
/// and at least 16 samples per period of the fastest oscillating E_+ mode.
std::vector<double> default_norm_grid(const Decomposition& dec, int samples = 2001, double t_min = 0.0);

/// Largest singular value of a 2x2 matrix.
double spectral_norm2(const Eigen::Matrix2d& m);

}  // namespace dampwave
