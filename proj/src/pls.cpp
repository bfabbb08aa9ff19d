#include "fofpls/pls.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fofpls/error.hpp"

namespace fofpls {

Eigen::MatrixXd PlsFit::theta_for(int components) const {
  if (components < 1 || components > h)
    throw Error(ErrorKind::TooManyComponents,
                "requested " + std::to_string(components) + " of " + std::to_string(h) + " fitted components");
  const auto w = weights.leftCols(components);
  const auto p = x_loadings.leftCols(components);
  const auto q = y_loadings.leftCols(components);
  const Eigen::MatrixXd ptw = p.transpose() * w;
  return w * ptw.partialPivLu().solve(q.transpose());
}

PlsFit nipals(const Eigen::MatrixXd& pi, const Eigen::MatrixXd& lambda, int h, const NipalsOptions& options) {
  const Eigen::Index n = pi.rows();
  const Eigen::Index p = pi.cols();
  const Eigen::Index ky = lambda.cols();
  if (lambda.rows() != n) throw Error(ErrorKind::ShapeMismatch, "predictor and response row counts differ");
  if (h < 1) throw Error(ErrorKind::TooManyComponents, "need at least one component");
  const Eigen::Index limit = std::min<Eigen::Index>(n - 1, p);
  if (h > limit)
    throw Error(ErrorKind::TooManyComponents,
                "h=" + std::to_string(h) + " exceeds min(N-1, P)=" + std::to_string(limit));

  Eigen::MatrixXd x = pi;
  Eigen::MatrixXd y = lambda;
  const double initial_cov = (x.transpose() * y).norm();
  if (!(initial_cov > 0.0) || x.norm() == 0.0)
    throw Error(ErrorKind::DegenerateDesign, "predictors carry no covariance with the response");

  PlsFit fit;
  fit.h = h;
  fit.weights.resize(p, h);
  fit.scores.resize(n, h);
  fit.x_loadings.resize(p, h);
  fit.y_loadings.resize(ky, h);

  for (int a = 0; a < h; ++a) {
    const Eigen::MatrixXd xty = x.transpose() * y;
    if (xty.norm() <= 1e-10 * initial_cov) {
      if (options.stop_when_exhausted && a > 0) {
        fit.h = a;
        fit.weights.conservativeResize(Eigen::NoChange, a);
        fit.scores.conservativeResize(Eigen::NoChange, a);
        fit.x_loadings.conservativeResize(Eigen::NoChange, a);
        fit.y_loadings.conservativeResize(Eigen::NoChange, a);
        break;
      }
      throw Error(ErrorKind::DegenerateDesign, "no covariance left for component " + std::to_string(a + 1));
    }

    // Start the inner loop from the dominant response direction of X^T Y.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xty.transpose() * xty);
    Eigen::VectorXd u = y * es.eigenvectors().col(ky - 1);

    Eigen::VectorXd w(p), t(n), t_old(n);
    bool converged = false;
    int iter = 0;
    while (iter < options.max_iterations) {
      ++iter;
      w.noalias() = x.transpose() * u;
      const double wn = w.norm();
      if (!(wn > 0.0)) throw Error(ErrorKind::DegenerateDesign, "zero weight vector at component " + std::to_string(a + 1));
      w /= wn;
      t.noalias() = x * w;
      Eigen::VectorXd q = y.transpose() * t;
      const double qn = q.norm();
      if (!(qn > 0.0)) throw Error(ErrorKind::DegenerateDesign, "score uncorrelated with response at component " + std::to_string(a + 1));
      q /= qn;
      u.noalias() = y * q;
      if (iter > 1 && (t - t_old).norm() < options.tolerance * t_old.norm()) {
        converged = true;
        break;
      }
      t_old = t;
    }
    if (!converged)
      throw Error(ErrorKind::ConvergenceFailure, "inner loop did not converge for component " + std::to_string(a + 1));

    Eigen::Index imax = 0;
    w.cwiseAbs().maxCoeff(&imax);
    if (w[imax] < 0.0) {
      w = -w;
      t = -t;
    }
    const double tt = t.squaredNorm();
    if (!(tt > 0.0)) throw Error(ErrorKind::DegenerateDesign, "zero score at component " + std::to_string(a + 1));
    const Eigen::VectorXd pl = x.transpose() * t / tt;
    const Eigen::VectorXd ql = y.transpose() * t / tt;
    x.noalias() -= t * pl.transpose();
    y.noalias() -= t * ql.transpose();

    fit.weights.col(a) = w;
    fit.scores.col(a) = t;
    fit.x_loadings.col(a) = pl;
    fit.y_loadings.col(a) = ql;
    fit.inner_iterations.push_back(iter);
  }
  fit.theta = fit.theta_for(fit.h);
  if (options.keep_residuals) {
    fit.x_residual = std::move(x);
    fit.y_residual = std::move(y);
  }
  return fit;
}

PlsFit nipals_fit(const Eigen::MatrixXd& d, const Eigen::MatrixXd& c, const Eigen::MatrixXd& x_factor,
                  const Eigen::MatrixXd& y_factor, int h, const NipalsOptions& options) {
  if (d.cols() != x_factor.rows() || c.cols() != y_factor.rows())
    throw Error(ErrorKind::ShapeMismatch, "metric factor does not match the data dimension");
  return nipals(d * x_factor, c * y_factor, h, options);
}

}  // namespace fofpls
