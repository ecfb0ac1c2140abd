#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dampwave/nonlinearity.hpp"
#include "dampwave/spectral.hpp"

namespace dampwave {

/// Sample at which a checked inequality fails. Unused fields stay empty / NaN.
struct Witness {
  double t = 0.0;
  double s = std::numeric_limits<double>::quiet_NaN();      // SR lattice value
  double x_pos = std::numeric_limits<double>::quiet_NaN();  // SR lattice point in (0, l)
  CoeffVec y, z, x;  // G: coordinates in the full basis; LL: x is the kernel element
  double value = 0.0;
};

struct SampleSpec {
  double B1 = 0.0;
  double B2 = 0.0;
  std::vector<double> R_ladder;
  int sample_count = 0;
  std::uint64_t seed = 0;
};

struct ConditionReport {
  std::string condition_id;  // G1, G2, LL1, LL2, SR1, SR2
  bool holds = false;        // HOLDS_ON_SAMPLES vs VIOLATED
  std::optional<Witness> witness;
  /// Smallest slack seen: for LL1/SR1/G1 the minimum of the quantity required to be
  /// positive, for LL2/SR2/G2 the minimum of its negation.
  double margin = 0.0;
  SampleSpec sample_spec;
  std::optional<double> threshold_R;  // G only
  long evaluations = 0;

  std::string verdict() const { return holds ? "HOLDS_ON_SAMPLES" : "VIOLATED"; }
};

/// int_0^T P F(tau, x) dtau by composite Simpson; x and the result are kernel coordinates.
/// `offset` shifts the quadrature origin (the integrand is T-periodic).
CoeffVec averaged_map(const NonlinearitySpec& f, const CoeffVec& x, const Decomposition& dec, int panels = 64,
                      double offset = 0.0);

/// int_{x>0} f_+ x + int_{x<0} f_- x for a kernel element given by full-basis coefficients.
/// The sign sets are split at the roots of the element, each piece integrated by Gauss-Legendre.
double landesman_lazer_integral(const NonlinearitySpec& f, const EigenBasis& basis, const CoeffVec& element,
                                double t);

/// LL1 and LL2 on the kernel span{phi_k}: unit kernel elements times sampled t.
std::pair<ConditionReport, ConditionReport> check_LL_both(const NonlinearitySpec& f, const EigenBasis& basis,
                                                          int k, int sample_count, std::uint64_t seed = 0);
/// The holding one of LL1/LL2, or the LL1 report when neither holds.
ConditionReport check_LL(const NonlinearitySpec& f, const EigenBasis& basis, int k, int sample_count,
                         std::uint64_t seed = 0);

/// SR1/SR2 on a (t, x, s) lattice with |s| log-spaced up to 1e6. Throws when f_inf is undefined.
std::pair<ConditionReport, ConditionReport> check_SR_both(const NonlinearitySpec& f, const EigenBasis& basis,
                                                          int sample_count);
ConditionReport check_SR(const NonlinearitySpec& f, const EigenBasis& basis, int sample_count);

std::vector<double> default_R_ladder();

/// G1/G2 with the z-ball handled exactly: sup over ||z|| <= B2 of -<F, z> is B2 ||P F||.
std::pair<ConditionReport, ConditionReport> check_G_both(const NonlinearitySpec& f, const Decomposition& dec,
                                                         double B1, double B2, const std::vector<double>& R_ladder,
                                                         int sample_count, std::uint64_t seed);
ConditionReport check_G(const NonlinearitySpec& f, const Decomposition& dec, double B1, double B2,
                        const std::vector<double>& R_ladder, int sample_count, std::uint64_t seed);

/// <F(t, x + y), x> + <F(t, x + y), z>, the quantity G1 needs positive and G2 negative.
double g_condition_value(const NonlinearitySpec& f, const Decomposition& dec, double t, const CoeffVec& x,
                         const CoeffVec& y, const CoeffVec& z);

struct AprioriConstants {
  double m = 0.0;   // sup |f|
  double m0 = 0.0;  // bound on ||(0, F)||_E
  double m1 = 0.0;  // bound on ||P F||_H
  double R1 = 0.0;
  double R2 = 0.0;
  double R3 = 0.0;
  double kernel_velocity_bound = 0.0;  // m1 / (c lambda) + 1
  /// Ball radii for the G check: B1 = R1 + R2, B2 = kernel_velocity_bound / (c lambda).
  double B1 = 0.0;
  double B2 = 0.0;
};

/// m0 = m1 = m sqrt(l); R1 = m0 M ||Q_+|| / delta; R2 = m0 M ||Q_-|| / delta. R3 is copied in.
AprioriConstants apriori_constants(const NonlinearitySpec& f, const Decomposition& dec, double R3 = 0.0);

}  // namespace dampwave
