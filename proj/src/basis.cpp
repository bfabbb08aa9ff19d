#include "fofpls/basis.hpp"

#include <algorithm>
#include <cmath>

#include "fofpls/error.hpp"

namespace fofpls {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfiguration: return "invalid-configuration";
    case ErrorKind::InvalidGrid: return "invalid-grid";
    case ErrorKind::NotPositiveSemidefinite: return "not-positive-semidefinite";
    case ErrorKind::SingularMetric: return "singular-metric";
    case ErrorKind::UnderdeterminedProjection: return "underdetermined-projection";
    case ErrorKind::GridMismatch: return "grid-mismatch";
    case ErrorKind::InvalidTerm: return "invalid-term";
    case ErrorKind::TooManyComponents: return "too-many-components";
    case ErrorKind::DegenerateDesign: return "degenerate-design";
    case ErrorKind::ConvergenceFailure: return "convergence-failure";
    case ErrorKind::DesignMismatch: return "design-mismatch";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::NothingToExtend: return "nothing-to-extend";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::ShapeMismatch: return "shape-mismatch";
    case ErrorKind::NearZeroDenominator: return "near-zero-denominator";
    case ErrorKind::UndefinedR2: return "undefined-r2";
    case ErrorKind::NumericalFailure: return "numerical-failure";
    case ErrorKind::UnknownSetting: return "unknown-setting";
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(Eigen::VectorXd points) : points_(std::move(points)) {
  if (points_.size() < 2) throw Error(ErrorKind::InvalidGrid, "a grid needs at least two points");
  for (Eigen::Index i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i]) || points_[i] < 0.0 || points_[i] > 1.0)
      throw Error(ErrorKind::InvalidGrid, "grid points must lie in [0,1]");
    if (i > 0 && !(points_[i] > points_[i - 1]))
      throw Error(ErrorKind::InvalidGrid, "grid points must be strictly increasing");
  }
}

Grid Grid::uniform(std::size_t length) {
  if (length < 2) throw Error(ErrorKind::InvalidGrid, "a grid needs at least two points");
  Eigen::VectorXd p(static_cast<Eigen::Index>(length));
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = static_cast<double>(i) / static_cast<double>(length - 1);
  p[p.size() - 1] = 1.0;
  return Grid(std::move(p));
}

Eigen::VectorXd Grid::trapezoid_weights() const {
  const Eigen::Index n = points_.size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double half = 0.5 * (points_[i + 1] - points_[i]);
    w[i] += half;
    w[i + 1] += half;
  }
  return w;
}

bool Grid::same_as(const Grid& other, double tol) const {
  if (points_.size() != other.points_.size()) return false;
  return (points_ - other.points_).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------
// Linear algebra helpers

SymmetricRoot symmetric_sqrt(const Eigen::MatrixXd& a, std::optional<double> tol) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw Error(ErrorKind::InvalidInput, "symmetric_sqrt needs a non-empty square matrix");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw Error(ErrorKind::InvalidInput, "symmetric_sqrt needs a symmetric matrix");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NumericalFailure, "eigendecomposition failed");
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const double max_ev = lambda.maxCoeff();
  const double floor = tol ? *tol : 1e-12 * std::max(max_ev, 0.0);
  if (lambda.minCoeff() < -floor)
    throw Error(ErrorKind::NotPositiveSemidefinite,
                "eigenvalue " + std::to_string(lambda.minCoeff()) + " below -tol");
  if (max_ev < floor || max_ev <= 0.0) throw Error(ErrorKind::SingularMetric, "all eigenvalues below tolerance");

  const Eigen::VectorXd clamped = lambda.cwiseMax(floor);
  const Eigen::VectorXd root = clamped.cwiseSqrt();
  const Eigen::MatrixXd& v = es.eigenvectors();
  SymmetricRoot out;
  out.sqrt = v * root.asDiagonal() * v.transpose();
  out.inv_sqrt = v * root.cwiseInverse().asDiagonal() * v.transpose();
  // exact symmetry
  out.sqrt = 0.5 * (out.sqrt + out.sqrt.transpose()).eval();
  out.inv_sqrt = 0.5 * (out.inv_sqrt + out.inv_sqrt.transpose()).eval();
  return out;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix of the Legendre recurrence.
void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (n < 1) throw Error(ErrorKind::InvalidConfiguration, "quadrature needs at least one node");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  nodes = es.eigenvalues();
  weights = 2.0 * es.eigenvectors().row(0).transpose().array().square();
}

// ---------------------------------------------------------------------------
// BasisSystem

BasisSystem::BasisSystem(int num_functions, int order, Grid grid)
    : num_functions_(num_functions), order_(order), grid_(std::move(grid)) {
  if (order_ < 1) throw Error(ErrorKind::InvalidConfiguration, "spline order must be at least 1");
  if (num_functions_ < order_)
    throw Error(ErrorKind::InvalidConfiguration, "need K >= order (K=" + std::to_string(num_functions_) +
                                                     ", order=" + std::to_string(order_) + ")");

  const int interior = num_functions_ - order_;
  knots_.resize(num_functions_ + order_);
  for (int i = 0; i < order_; ++i) {
    knots_[i] = 0.0;
    knots_[num_functions_ + i] = 1.0;
  }
  for (int j = 1; j <= interior; ++j) knots_[order_ - 1 + j] = static_cast<double>(j) / (interior + 1);

  eval_ = evaluate(grid_.points());

  // Exact Gram: the integrand is a piecewise polynomial of degree 2*(order-1).
  Eigen::VectorXd gx, gw;
  gauss_legendre(order_, gx, gw);
  gram_ = Eigen::MatrixXd::Zero(num_functions_, num_functions_);
  for (int span = 0; span <= interior; ++span) {
    const double a = static_cast<double>(span) / (interior + 1);
    const double b = static_cast<double>(span + 1) / (interior + 1);
    const Eigen::VectorXd x = (0.5 * (a + b) + 0.5 * (b - a) * gx.array()).matrix();
    const Eigen::VectorXd w = 0.5 * (b - a) * gw;
    const Eigen::MatrixXd phi = evaluate(x);
    gram_.noalias() += phi.transpose() * w.asDiagonal() * phi;
  }
  gram_ = 0.5 * (gram_ + gram_.transpose()).eval();
  gram_root_ = symmetric_sqrt(gram_);

  if (grid_.size() < num_functions_)
    throw Error(ErrorKind::UnderdeterminedProjection, "grid has fewer points than basis functions");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(eval_);
  if (qr.rank() < num_functions_)
    throw Error(ErrorKind::UnderdeterminedProjection, "basis evaluation matrix is rank deficient on this grid");
  projector_ = qr.solve(Eigen::MatrixXd::Identity(grid_.size(), grid_.size()));
}

int BasisSystem::find_span(double x) const {
  // index i with knots[i] <= x < knots[i+1], restricted to [order-1, K-1]
  const int lo = order_ - 1;
  const int hi = num_functions_ - 1;
  if (x >= knots_[hi + 1]) return hi;
  if (x <= knots_[lo]) return lo;
  const auto begin = knots_.data();
  const auto it = std::upper_bound(begin + lo, begin + hi + 1, x);
  return static_cast<int>(it - begin) - 1;
}

void BasisSystem::evaluate_row(double x, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) const {
  row.setZero();
  const int span = find_span(x);
  // Cox-de Boor triangular scheme for the `order` nonzero functions on this span.
  Eigen::VectorXd n = Eigen::VectorXd::Zero(order_);
  Eigen::VectorXd left(order_), right(order_);
  n[0] = 1.0;
  for (int j = 1; j < order_; ++j) {
    left[j] = x - knots_[span + 1 - j];
    right[j] = knots_[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }
  for (int j = 0; j < order_; ++j) row[span - order_ + 1 + j] = n[j];
}

Eigen::MatrixXd BasisSystem::evaluate(const Eigen::VectorXd& points) const {
  Eigen::MatrixXd out(points.size(), num_functions_);
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    if (!(points[i] >= 0.0 && points[i] <= 1.0))
      throw Error(ErrorKind::InvalidGrid, "evaluation point outside [0,1]");
    evaluate_row(points[i], out.row(i));
  }
  return out;
}

Eigen::MatrixXd BasisSystem::project(const Eigen::MatrixXd& values) const {
  if (values.cols() != grid_.size())
    throw Error(ErrorKind::GridMismatch, "curve length " + std::to_string(values.cols()) +
                                             " does not match grid length " + std::to_string(grid_.size()));
  return values * projector_.transpose();
}

BasisSystem make_bspline_basis(int num_functions, int order, const Grid& grid) {
  return BasisSystem(num_functions, order, grid);
}

Eigen::VectorXd project_curve(const Eigen::VectorXd& values, const BasisSystem& basis) {
  return basis.project(values.transpose()).transpose();
}

TensorMetric tensor_metric(const BasisSystem& basis) {
  return TensorMetric{kron(basis.gram(), basis.gram()), kron(basis.gram_sqrt(), basis.gram_sqrt()),
                      kron(basis.gram_inv_sqrt(), basis.gram_inv_sqrt())};
}

}  // namespace fofpls
