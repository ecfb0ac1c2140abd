#include "dampwave/basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dampwave {

EigenBasis::EigenBasis(double length, std::vector<EigenMode> modes, Eigen::VectorXd nodes,
                       Eigen::VectorXd weights)
    : length_(length), modes_(std::move(modes)), nodes_(std::move(nodes)), weights_(std::move(weights)) {
  const auto n = static_cast<Eigen::Index>(modes_.size());
  eigenvalues_.resize(n);
  synthesis_.resize(nodes_.size(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    eigenvalues_(i) = modes_[static_cast<std::size_t>(i)].eigenvalue;
    synthesis_.col(i) = modes_[static_cast<std::size_t>(i)].grid_values;
    if (i > 0 && !(eigenvalues_(i) > eigenvalues_(i - 1))) {
      throw std::logic_error("eigenvalues must be strictly increasing");
    }
  }
}

double EigenBasis::eigenfunction(int index, double x) const {
  return std::sqrt(2.0 / length_) * std::sin(index * std::numbers::pi * x / length_);
}

BasisPtr build_dirichlet_laplacian(double length, int modes, int grid) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw std::invalid_argument("domain length must be positive, got " + std::to_string(length));
  }
  if (modes <= 0) {
    throw std::invalid_argument("mode count must be positive, got " + std::to_string(modes));
  }
  if (grid < 4 * modes) {
    throw std::invalid_argument("grid size " + std::to_string(grid) + " below 4 * modes = " +
                                std::to_string(4 * modes));
  }

  const double h = length / (grid + 1);
  Eigen::VectorXd nodes(grid);
  for (int j = 0; j < grid; ++j) nodes(j) = (j + 1) * h;
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(grid, h);

  const double amp = std::sqrt(2.0 / length);
  std::vector<EigenMode> list;
  list.reserve(static_cast<std::size_t>(modes));
  for (int i = 1; i <= modes; ++i) {
    EigenMode m;
    m.index = i;
    const double k = i * std::numbers::pi / length;
    m.eigenvalue = k * k;
    m.grid_values.resize(grid);
    for (int j = 0; j < grid; ++j) m.grid_values(j) = amp * std::sin(k * nodes(j));
    list.push_back(std::move(m));
  }
  return std::make_shared<const EigenBasis>(length, std::move(list), std::move(nodes), std::move(weights));
}

double h_inner(const CoeffVec& u, const CoeffVec& v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("h_inner: length mismatch " + std::to_string(u.size()) + " vs " +
                                std::to_string(v.size()));
  }
  return u.dot(v);
}

double h_norm(const CoeffVec& u) { return u.norm(); }

double fractional_norm(const CoeffVec& u, double alpha, const EigenBasis& basis) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("fractional exponent must lie in (0,1), got " + std::to_string(alpha));
  }
  if (u.size() != basis.size()) throw std::invalid_argument("fractional_norm: shape mismatch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double s = std::pow(basis.eigenvalues()(i), alpha) * u(i);
    acc += s * s;
  }
  return std::sqrt(acc);
}

GridVec grid_eval(const CoeffVec& u, const EigenBasis& basis) {
  if (u.size() != basis.size()) throw std::invalid_argument("grid_eval: shape mismatch");
  return basis.synthesis() * u;
}

CoeffVec grid_project(const GridVec& g, const EigenBasis& basis) {
  if (g.size() != basis.grid_size()) throw std::invalid_argument("grid_project: shape mismatch");
  return basis.synthesis().transpose() * g.cwiseProduct(basis.weights());
}

double grid_inner(const GridVec& f, const GridVec& g, const EigenBasis& basis) {
  if (f.size() != basis.grid_size() || g.size() != basis.grid_size()) {
    throw std::invalid_argument("grid_inner: shape mismatch");
  }
  return (f.cwiseProduct(g)).dot(basis.weights());
}

}  // namespace dampwave
