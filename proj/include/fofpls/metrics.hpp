#pragma once

#include <Eigen/Dense>

#include "fofpls/grid.hpp"

namespace fofpls {

/// L2 norm on a grid approximated by a weighted Riemann sum.
struct CurveNorm {
  Grid grid;
  Eigen::VectorXd weights;

  /// Trapezoid weights.
  explicit CurveNorm(Grid g);
  CurveNorm(Grid g, Eigen::VectorXd w);

  /// Squared L2 norm of every row.
  Eigen::VectorXd squared_norms(const Eigen::MatrixXd& curves) const;
};

inline constexpr double kRelativeGuard = 1e-8;

/// Mean over curves of the squared L2 distance.
double mse(const Eigen::MatrixXd& y_true, const Eigen::MatrixXd& y_fit, const CurveNorm& norm);
double mspe(const Eigen::MatrixXd& y_true, const Eigen::MatrixXd& y_pred, const CurveNorm& norm);
/// sqrt of the mean squared L2 norm of the relative error curve.
double rmspe(const Eigen::MatrixXd& y_true, const Eigen::MatrixXd& y_pred, const CurveNorm& norm);
/// Mean L2 norm of the absolute relative error curve.
double mape(const Eigen::MatrixXd& y_true, const Eigen::MatrixXd& y_pred, const CurveNorm& norm);

/// 1 - sum ||yhat_i - y_i||^2 / sum ||y_i - ybar||^2, ybar taken over `y_obs`.
double r2(const Eigen::MatrixXd& y_obs, const Eigen::MatrixXd& y_hat, const CurveNorm& norm);
/// Same functional on held-out curves.
double r2_pred(const Eigen::MatrixXd& y_obs, const Eigen::MatrixXd& y_hat, const CurveNorm& norm);

}  // namespace fofpls
