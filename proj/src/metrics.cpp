#include "fofpls/metrics.hpp"

#include <cmath>

#include "fofpls/error.hpp"

namespace fofpls {

CurveNorm::CurveNorm(Grid g) : grid(std::move(g)), weights(grid.trapezoid_weights()) {}

CurveNorm::CurveNorm(Grid g, Eigen::VectorXd w) : grid(std::move(g)), weights(std::move(w)) {
  if (weights.size() != grid.size()) throw Error(ErrorKind::ShapeMismatch, "weights do not match the grid");
  if ((weights.array() <= 0.0).any()) throw Error(ErrorKind::InvalidInput, "norm weights must be positive");
}

Eigen::VectorXd CurveNorm::squared_norms(const Eigen::MatrixXd& curves) const {
  if (curves.cols() != weights.size()) throw Error(ErrorKind::ShapeMismatch, "curve length does not match the grid");
  return curves.array().square().matrix() * weights;
}

namespace {

void check_shapes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const CurveNorm& norm) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::ShapeMismatch, "curve matrices differ in shape");
  if (a.rows() == 0) throw Error(ErrorKind::ShapeMismatch, "no curves");
  if (a.cols() != norm.weights.size()) throw Error(ErrorKind::ShapeMismatch, "curve length does not match the grid");
}

Eigen::MatrixXd relative_error(const Eigen::MatrixXd& y_true, const Eigen::MatrixXd& y_pred) {
  if ((y_true.array().abs() < kRelativeGuard).any())
    throw Error(ErrorKind::NearZeroDenominator, "true response is within 1e-8 of zero at a grid point");
  return ((y_pred - y_true).array() / y_true.array()).matrix();
}

}  // namespace

double mse(const Eigen::MatrixXd& y_true, const Eigen::MatrixXd& y_fit, const CurveNorm& norm) {
  check_shapes(y_true, y_fit, norm);
  return norm.squared_norms(y_true - y_fit).mean();
}

double mspe(const Eigen::MatrixXd& y_true, const Eigen::MatrixXd& y_pred, const CurveNorm& norm) {
  return mse(y_true, y_pred, norm);
}

double rmspe(const Eigen::MatrixXd& y_true, const Eigen::MatrixXd& y_pred, const CurveNorm& norm) {
  check_shapes(y_true, y_pred, norm);
  return std::sqrt(norm.squared_norms(relative_error(y_true, y_pred)).mean());
}

double mape(const Eigen::MatrixXd& y_true, const Eigen::MatrixXd& y_pred, const CurveNorm& norm) {
  check_shapes(y_true, y_pred, norm);
  return norm.squared_norms(relative_error(y_true, y_pred)).cwiseSqrt().mean();
}

double r2(const Eigen::MatrixXd& y_obs, const Eigen::MatrixXd& y_hat, const CurveNorm& norm) {
  check_shapes(y_obs, y_hat, norm);
  if (y_obs.rows() < 2) throw Error(ErrorKind::InvalidInput, "R^2 needs at least two curves");
  const Eigen::RowVectorXd mean = y_obs.colwise().mean();
  const double total = norm.squared_norms(y_obs.rowwise() - mean).sum();
  if (!(total > 0.0)) throw Error(ErrorKind::UndefinedR2, "all observed curves are identical");
  return 1.0 - norm.squared_norms(y_hat - y_obs).sum() / total;
}

double r2_pred(const Eigen::MatrixXd& y_obs, const Eigen::MatrixXd& y_hat, const CurveNorm& norm) {
  return r2(y_obs, y_hat, norm);
}

}  // namespace fofpls
