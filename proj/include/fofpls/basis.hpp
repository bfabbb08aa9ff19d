#pragma once

#include <Eigen/Dense>
#include <optional>

#include "fofpls/grid.hpp"

namespace fofpls {

struct SymmetricRoot {
  Eigen::MatrixXd sqrt;
  Eigen::MatrixXd inv_sqrt;
};

/// Symmetric square root of a symmetric positive semidefinite matrix via its
/// eigendecomposition. Eigenvalues below `tol` are clamped to `tol`; the
/// default tolerance is 1e-12 times the largest eigenvalue.
SymmetricRoot symmetric_sqrt(const Eigen::MatrixXd& a, std::optional<double> tol = std::nullopt);

/// Clamped B-spline basis on [0,1] with uniform interior knots.
class BasisSystem {
 public:
  BasisSystem(int num_functions, int order, Grid grid);

  int order() const noexcept { return order_; }
  int degree() const noexcept { return order_ - 1; }
  int size() const noexcept { return num_functions_; }
  const Eigen::VectorXd& knots() const noexcept { return knots_; }
  const Grid& grid() const noexcept { return grid_; }

  /// L x K matrix of basis values on the construction grid.
  const Eigen::MatrixXd& eval() const noexcept { return eval_; }
  /// Basis values at arbitrary points of [0,1]; one row per point.
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& points) const;

  const Eigen::MatrixXd& gram() const noexcept { return gram_; }
  const Eigen::MatrixXd& gram_sqrt() const noexcept { return gram_root_.sqrt; }
  const Eigen::MatrixXd& gram_inv_sqrt() const noexcept { return gram_root_.inv_sqrt; }

  /// Least-squares coefficients for curves sampled on the construction grid.
  /// `values` is N x L (one curve per row); the result is N x K.
  Eigen::MatrixXd project(const Eigen::MatrixXd& values) const;

 private:
  void evaluate_row(double x, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) const;
  int find_span(double x) const;

  int num_functions_;
  int order_;
  Grid grid_;
  Eigen::VectorXd knots_;
  Eigen::MatrixXd eval_;
  Eigen::MatrixXd gram_;
  SymmetricRoot gram_root_;
  Eigen::MatrixXd projector_;  // K x L, (E^T E)^{-1} E^T
};

/// Spline of the given order with `num_functions` basis functions observed on `grid`.
BasisSystem make_bspline_basis(int num_functions, int order, const Grid& grid);

/// Least-squares basis coefficients of a single curve sampled on the basis grid.
Eigen::VectorXd project_curve(const Eigen::VectorXd& values, const BasisSystem& basis);

/// Gram matrix of the tensor-product basis psi_j(s) psi_l(r), indexed j*K + l.
struct TensorMetric {
  Eigen::MatrixXd gram2;
  Eigen::MatrixXd gram2_sqrt;
  Eigen::MatrixXd gram2_inv_sqrt;
};

TensorMetric tensor_metric(const BasisSystem& basis);

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Gauss-Legendre nodes and weights on [-1,1].
void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

}  // namespace fofpls
