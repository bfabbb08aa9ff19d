#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fofpls/basis.hpp"
#include "fofpls/grid.hpp"

namespace fofpls {

/// N curves observed on a common grid; row i holds curve i.
struct FunctionalSample {
  Grid grid;
  Eigen::MatrixXd values;
  std::string label;

  Eigen::Index num_curves() const noexcept { return values.rows(); }
  /// Throws InvalidInput on an empty sample, a length mismatch or a non-finite value.
  void validate() const;
  FunctionalSample rows(const std::vector<int>& index) const;
};

/// Index sets of main effects and quadratic/interaction pairs. Indices are
/// 1-based predictor numbers; every pair is stored with first <= second.
struct TermSet {
  std::vector<int> main;
  std::vector<std::pair<int, int>> inter;

  bool empty() const noexcept { return main.empty() && inter.empty(); }
  std::size_t size() const noexcept { return main.size() + inter.size(); }
  /// Throws InvalidTerm for out-of-range indices, unordered pairs or duplicates.
  void validate(int num_predictors) const;

  static TermSet main_effects(int num_predictors);
  static TermSet full(int num_predictors);

  friend bool operator==(const TermSet&, const TermSet&) = default;
};

/// Symmetric positive definite metric block together with its symmetric roots.
struct MetricBlock {
  Eigen::MatrixXd gram;
  Eigen::MatrixXd sqrt;
  Eigen::MatrixXd inv_sqrt;
};

/// Block-diagonal metric over the stacked design columns. Blocks share their
/// matrices: every main term uses the univariate Gram, every interaction the
/// tensor Gram.
class BlockMetric {
 public:
  void append(std::shared_ptr<const MetricBlock> block);

  Eigen::Index dim() const noexcept { return dim_; }
  std::size_t num_blocks() const noexcept { return blocks_.size(); }
  Eigen::Index offset(std::size_t b) const { return offsets_[b]; }
  const MetricBlock& block(std::size_t b) const { return *blocks_[b]; }

  /// D * S with S the block-diagonal symmetric square root.
  Eigen::MatrixXd right_multiply_sqrt(const Eigen::MatrixXd& d) const;
  /// S^{-1} * G for a matrix with dim() rows.
  Eigen::MatrixXd left_multiply_inv_sqrt(const Eigen::MatrixXd& g) const;

  Eigen::MatrixXd dense() const;
  Eigen::MatrixXd dense_sqrt() const;
  Eigen::MatrixXd dense_inv_sqrt() const;

 private:
  std::vector<std::shared_ptr<const MetricBlock>> blocks_;
  std::vector<Eigen::Index> offsets_;
  Eigen::Index dim_ = 0;
};

/// Stacked predictor coefficients: main blocks first (in `terms.main` order),
/// then interaction blocks (in `terms.inter` order).
struct StackedDesign {
  TermSet terms;
  int num_predictors = 0;
  std::shared_ptr<const BasisSystem> basis_x;
  Eigen::MatrixXd matrix;  // N x P, centered
  BlockMetric metric;
  /// Training column means of each block before centering, in block order.
  std::vector<Eigen::RowVectorXd> block_means;
  /// Pointwise training mean curve of every predictor.
  std::vector<Eigen::RowVectorXd> x_means;

  Eigen::Index num_columns() const noexcept { return metric.dim(); }
  int k() const { return basis_x->size(); }
  Eigen::Index block_offset(std::size_t b) const { return metric.offset(b); }
};

std::pair<FunctionalSample, Eigen::RowVectorXd> center_sample(const FunctionalSample& x);

StackedDesign build_design(const std::vector<FunctionalSample>& predictors, const TermSet& terms,
                           std::shared_ptr<const BasisSystem> basis_x);

/// Design rows for new curves, centered with the training means of `design`.
Eigen::MatrixXd design_columns_for_new(const std::vector<FunctionalSample>& x_new, const StackedDesign& design);

/// Block-diagonal metric matching a term layout.
BlockMetric make_block_metric(const TermSet& terms, const BasisSystem& basis_x);

/// Row-wise vec(a b^T) with index j*K + l.
Eigen::MatrixXd outer_rows(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace fofpls
