#pragma once

#include <Eigen/Dense>
#include <cstddef>

namespace fofpls {

/// Ordered abscissae on [0,1] at which curves are observed or evaluated.
class Grid {
 public:
  Grid() = default;
  /// Throws InvalidGrid unless the points are strictly increasing inside [0,1]
  /// and there are at least two of them.
  explicit Grid(Eigen::VectorXd points);

  /// L equally spaced points with spacing 1/(L-1).
  static Grid uniform(std::size_t length);

  const Eigen::VectorXd& points() const noexcept { return points_; }
  Eigen::Index size() const noexcept { return points_.size(); }
  double operator[](Eigen::Index i) const { return points_[i]; }

  /// Trapezoid cell widths; they sum to the span of the grid.
  Eigen::VectorXd trapezoid_weights() const;

  bool same_as(const Grid& other, double tol = 1e-12) const;

 private:
  Eigen::VectorXd points_;
};

}  // namespace fofpls
