#include "fofpls/design.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fofpls/error.hpp"

namespace fofpls {

void FunctionalSample::validate() const {
  if (values.rows() < 1) throw Error(ErrorKind::InvalidInput, "sample '" + label + "' has no curves");
  if (values.cols() != grid.size())
    throw Error(ErrorKind::GridMismatch, "sample '" + label + "' has rows of length " +
                                             std::to_string(values.cols()) + " but grid length " +
                                             std::to_string(grid.size()));
  if (!values.allFinite()) throw Error(ErrorKind::InvalidInput, "sample '" + label + "' has non-finite values");
}

FunctionalSample FunctionalSample::rows(const std::vector<int>& index) const {
  FunctionalSample out{grid, Eigen::MatrixXd(static_cast<Eigen::Index>(index.size()), values.cols()), label};
  for (std::size_t i = 0; i < index.size(); ++i) out.values.row(static_cast<Eigen::Index>(i)) = values.row(index[i]);
  return out;
}

void TermSet::validate(int num_predictors) const {
  std::set<int> seen_main;
  for (int m : main) {
    if (m < 1 || m > num_predictors)
      throw Error(ErrorKind::InvalidTerm, "main term " + std::to_string(m) + " outside 1.." +
                                              std::to_string(num_predictors));
    if (!seen_main.insert(m).second) throw Error(ErrorKind::InvalidTerm, "duplicate main term " + std::to_string(m));
  }
  std::set<std::pair<int, int>> seen_pairs;
  for (auto [m, n] : inter) {
    const std::string name = "(" + std::to_string(m) + "," + std::to_string(n) + ")";
    if (m < 1 || n < 1 || m > num_predictors || n > num_predictors)
      throw Error(ErrorKind::InvalidTerm, "interaction " + name + " out of range");
    if (m > n) throw Error(ErrorKind::InvalidTerm, "interaction " + name + " must satisfy m <= n");
    if (!seen_pairs.insert({m, n}).second) throw Error(ErrorKind::InvalidTerm, "duplicate interaction " + name);
  }
  if (empty()) throw Error(ErrorKind::InvalidTerm, "empty term set");
}

TermSet TermSet::main_effects(int num_predictors) {
  TermSet t;
  for (int m = 1; m <= num_predictors; ++m) t.main.push_back(m);
  return t;
}

TermSet TermSet::full(int num_predictors) {
  TermSet t = main_effects(num_predictors);
  for (int m = 1; m <= num_predictors; ++m)
    for (int n = m; n <= num_predictors; ++n) t.inter.emplace_back(m, n);
  return t;
}

// ---------------------------------------------------------------------------

void BlockMetric::append(std::shared_ptr<const MetricBlock> block) {
  offsets_.push_back(dim_);
  dim_ += block->gram.rows();
  blocks_.push_back(std::move(block));
}

Eigen::MatrixXd BlockMetric::right_multiply_sqrt(const Eigen::MatrixXd& d) const {
  if (d.cols() != dim_) throw Error(ErrorKind::DesignMismatch, "column count does not match metric");
  Eigen::MatrixXd out(d.rows(), d.cols());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto k = blocks_[b]->sqrt.rows();
    out.middleCols(offsets_[b], k).noalias() = d.middleCols(offsets_[b], k) * blocks_[b]->sqrt;
  }
  return out;
}

Eigen::MatrixXd BlockMetric::left_multiply_inv_sqrt(const Eigen::MatrixXd& g) const {
  if (g.rows() != dim_) throw Error(ErrorKind::DesignMismatch, "row count does not match metric");
  Eigen::MatrixXd out(g.rows(), g.cols());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto k = blocks_[b]->inv_sqrt.rows();
    out.middleRows(offsets_[b], k).noalias() = blocks_[b]->inv_sqrt * g.middleRows(offsets_[b], k);
  }
  return out;
}

namespace {
template <typename Pick>
Eigen::MatrixXd assemble(const BlockMetric& m, Pick pick) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.dim(), m.dim());
  for (std::size_t b = 0; b < m.num_blocks(); ++b) {
    const Eigen::MatrixXd& blk = pick(m.block(b));
    out.block(m.offset(b), m.offset(b), blk.rows(), blk.cols()) = blk;
  }
  return out;
}
}  // namespace

Eigen::MatrixXd BlockMetric::dense() const {
  return assemble(*this, [](const MetricBlock& b) -> const Eigen::MatrixXd& { return b.gram; });
}
Eigen::MatrixXd BlockMetric::dense_sqrt() const {
  return assemble(*this, [](const MetricBlock& b) -> const Eigen::MatrixXd& { return b.sqrt; });
}
Eigen::MatrixXd BlockMetric::dense_inv_sqrt() const {
  return assemble(*this, [](const MetricBlock& b) -> const Eigen::MatrixXd& { return b.inv_sqrt; });
}

// ---------------------------------------------------------------------------

std::pair<FunctionalSample, Eigen::RowVectorXd> center_sample(const FunctionalSample& x) {
  x.validate();
  Eigen::RowVectorXd mean = x.values.colwise().mean();
  FunctionalSample centered{x.grid, x.values.rowwise() - mean, x.label};
  return {std::move(centered), std::move(mean)};
}

Eigen::MatrixXd outer_rows(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::Index k1 = a.cols(), k2 = b.cols();
  Eigen::MatrixXd out(a.rows(), k1 * k2);
  for (Eigen::Index j = 0; j < k1; ++j)
    out.middleCols(j * k2, k2) = b.array().colwise() * a.col(j).array();
  return out;
}

BlockMetric make_block_metric(const TermSet& terms, const BasisSystem& basis_x) {
  BlockMetric metric;
  if (!terms.main.empty()) {
    auto main_block = std::make_shared<const MetricBlock>(
        MetricBlock{basis_x.gram(), basis_x.gram_sqrt(), basis_x.gram_inv_sqrt()});
    for (std::size_t i = 0; i < terms.main.size(); ++i) metric.append(main_block);
  }
  if (!terms.inter.empty()) {
    TensorMetric tm = tensor_metric(basis_x);
    auto inter_block = std::make_shared<const MetricBlock>(
        MetricBlock{std::move(tm.gram2), std::move(tm.gram2_sqrt), std::move(tm.gram2_inv_sqrt)});
    for (std::size_t i = 0; i < terms.inter.size(); ++i) metric.append(inter_block);
  }
  return metric;
}

namespace {

void check_predictors(const std::vector<FunctionalSample>& predictors, const Grid& grid) {
  if (predictors.empty()) throw Error(ErrorKind::InvalidInput, "no predictors supplied");
  const auto n = predictors.front().num_curves();
  for (const auto& p : predictors) {
    p.validate();
    if (!p.grid.same_as(grid)) throw Error(ErrorKind::GridMismatch, "predictor '" + p.label + "' is on a different grid");
    if (p.num_curves() != n) throw Error(ErrorKind::InvalidInput, "predictors have different curve counts");
  }
}

// Uncentered blocks in layout order.
std::vector<Eigen::MatrixXd> raw_blocks(const std::vector<FunctionalSample>& predictors, const TermSet& terms,
                                        const BasisSystem& basis) {
  std::vector<Eigen::MatrixXd> coef(predictors.size());
  auto coefficients = [&](int m) -> const Eigen::MatrixXd& {
    auto& c = coef[static_cast<std::size_t>(m - 1)];
    if (c.size() == 0) c = basis.project(predictors[static_cast<std::size_t>(m - 1)].values);
    return c;
  };
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(terms.size());
  for (int m : terms.main) blocks.push_back(coefficients(m));
  for (auto [m, n] : terms.inter) blocks.push_back(outer_rows(coefficients(m), coefficients(n)));
  return blocks;
}

}  // namespace

StackedDesign build_design(const std::vector<FunctionalSample>& predictors, const TermSet& terms,
                           std::shared_ptr<const BasisSystem> basis_x) {
  if (!basis_x) throw Error(ErrorKind::InvalidInput, "missing predictor basis");
  check_predictors(predictors, basis_x->grid());
  const int num_predictors = static_cast<int>(predictors.size());
  terms.validate(num_predictors);

  StackedDesign design;
  design.terms = terms;
  design.num_predictors = num_predictors;
  design.metric = make_block_metric(terms, *basis_x);
  for (const auto& p : predictors) design.x_means.push_back(p.values.colwise().mean());

  auto blocks = raw_blocks(predictors, terms, *basis_x);
  const auto n = predictors.front().num_curves();
  design.matrix.resize(n, design.metric.dim());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    Eigen::RowVectorXd mean = blocks[b].colwise().mean();
    design.matrix.middleCols(design.metric.offset(b), blocks[b].cols()) = blocks[b].rowwise() - mean;
    design.block_means.push_back(std::move(mean));
  }
  design.basis_x = std::move(basis_x);
  return design;
}

Eigen::MatrixXd design_columns_for_new(const std::vector<FunctionalSample>& x_new, const StackedDesign& design) {
  check_predictors(x_new, design.basis_x->grid());
  if (static_cast<int>(x_new.size()) != design.num_predictors)
    throw Error(ErrorKind::DesignMismatch, "expected " + std::to_string(design.num_predictors) + " predictors, got " +
                                               std::to_string(x_new.size()));
  auto blocks = raw_blocks(x_new, design.terms, *design.basis_x);
  Eigen::MatrixXd out(x_new.front().num_curves(), design.metric.dim());
  for (std::size_t b = 0; b < blocks.size(); ++b)
    out.middleCols(design.metric.offset(b), blocks[b].cols()) = blocks[b].rowwise() - design.block_means[b];
  return out;
}

}  // namespace fofpls
