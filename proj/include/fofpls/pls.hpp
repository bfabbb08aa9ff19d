#pragma once

#include <Eigen/Dense>
#include <vector>

namespace fofpls {

struct NipalsOptions {
  double tolerance = 1e-10;
  int max_iterations = 500;
  /// Keep the deflated predictor and response matrices after the last component.
  bool keep_residuals = false;
  /// Stop early, with fewer components, once no predictor/response covariance
  /// remains instead of failing with DegenerateDesign.
  bool stop_when_exhausted = false;
};

/// NIPALS fit between transformed predictors (N x P) and transformed
/// responses (N x K_Y). Column j of each matrix belongs to component j.
struct PlsFit {
  int h = 0;
  Eigen::MatrixXd weights;      // P x h
  Eigen::MatrixXd scores;       // N x h
  Eigen::MatrixXd x_loadings;   // P x h
  Eigen::MatrixXd y_loadings;   // K_Y x h
  Eigen::MatrixXd theta;        // P x K_Y, regression matrix for all h components
  std::vector<int> inner_iterations;
  Eigen::MatrixXd x_residual;   // only with keep_residuals
  Eigen::MatrixXd y_residual;

  /// Regression matrix built from the first `components` components.
  Eigen::MatrixXd theta_for(int components) const;
};

/// Runs NIPALS directly on already-transformed (metric-weighted, centered) data.
PlsFit nipals(const Eigen::MatrixXd& pi, const Eigen::MatrixXd& lambda, int h, const NipalsOptions& options = {});

/// NIPALS on Pi = D * x_factor and Lambda = C * y_factor, where each factor F
/// satisfies F F^T = metric (the symmetric square root in the standard case).
PlsFit nipals_fit(const Eigen::MatrixXd& d, const Eigen::MatrixXd& c, const Eigen::MatrixXd& x_factor,
                  const Eigen::MatrixXd& y_factor, int h, const NipalsOptions& options = {});

}  // namespace fofpls
