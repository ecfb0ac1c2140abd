#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace dampwave {

/// Coordinates of an element of X = L^2(0, l) in the sine eigenbasis.
using CoeffVec = Eigen::VectorXd;
/// Values of a spatial function on the quadrature nodes.
using GridVec = Eigen::VectorXd;

struct EigenMode {
  int index = 0;          // 1-based mode number i
  double eigenvalue = 0;  // (i pi / l)^2
  GridVec grid_values;    // sqrt(2/l) sin(i pi x_j / l)
};

/// Retained eigenpairs of the 1-D Dirichlet Laplacian on (0, l) together with
/// the uniform interior quadrature used for every spatial integral.
///
/// Nodes are x_j = j l / (G + 1), j = 1..G, with equal weights l / (G + 1).
/// This is the trapezoid rule on [0, l] with the (vanishing) boundary values
/// dropped, and it integrates phi_i phi_j exactly for i, j <= G.
class EigenBasis {
 public:
  EigenBasis(double length, std::vector<EigenMode> modes, Eigen::VectorXd nodes,
             Eigen::VectorXd weights);

  double length() const { return length_; }
  int size() const { return static_cast<int>(modes_.size()); }
  int grid_size() const { return static_cast<int>(nodes_.size()); }

  const std::vector<EigenMode>& modes() const { return modes_; }
  const EigenMode& mode(int i) const { return modes_.at(static_cast<std::size_t>(i)); }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  /// G x N matrix with column i holding phi_{i+1} on the nodes.
  const Eigen::MatrixXd& synthesis() const { return synthesis_; }

  /// Exact value of phi_i(x) for a 1-based mode index, off-grid.
  double eigenfunction(int index, double x) const;

 private:
  double length_;
  std::vector<EigenMode> modes_;
  Eigen::VectorXd eigenvalues_;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXd synthesis_;
};

using BasisPtr = std::shared_ptr<const EigenBasis>;

/// Requires N >= 1, G >= 4N (anti-aliasing for the Nemitskii quadrature), l > 0.
/// Throws std::invalid_argument otherwise.
BasisPtr build_dirichlet_laplacian(double length, int modes, int grid);

/// L^2 scalar product through Parseval.
double h_inner(const CoeffVec& u, const CoeffVec& v);
double h_norm(const CoeffVec& u);

/// Graph norm ||A^alpha u|| = (sum_i lambda_i^{2 alpha} u_i^2)^{1/2}, alpha in (0, 1).
double fractional_norm(const CoeffVec& u, double alpha, const EigenBasis& basis);

GridVec grid_eval(const CoeffVec& u, const EigenBasis& basis);
CoeffVec grid_project(const GridVec& g, const EigenBasis& basis);

/// Discrete L^2 inner product of two grid functions.
double grid_inner(const GridVec& f, const GridVec& g, const EigenBasis& basis);

}  // namespace dampwave
