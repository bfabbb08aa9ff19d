#include "fofpls/model.hpp"

#include <algorithm>

#include "fofpls/error.hpp"

namespace fofpls {

FittedModel fit_model(const FunctionalSample& y, StackedDesign design, std::shared_ptr<const BasisSystem> basis_y,
                      int h, const NipalsOptions& options) {
  y.validate();
  if (y.num_curves() != design.matrix.rows())
    throw Error(ErrorKind::InvalidInput, "response and predictors have different curve counts");
  if (!y.grid.same_as(basis_y->grid())) throw Error(ErrorKind::GridMismatch, "response is not on the response basis grid");

  FittedModel model;
  model.spec = ModelSpec{design.k(), basis_y->size(), design.basis_x->order(), h};
  model.y_mean = y.values.colwise().mean();
  const Eigen::MatrixXd c = basis_y->project(y.values.rowwise() - model.y_mean);
  const Eigen::MatrixXd pi = design.metric.right_multiply_sqrt(design.matrix);
  model.pls = nipals(pi, c * basis_y->gram_sqrt(), h, options);
  model.design = std::move(design);
  model.basis_y = std::move(basis_y);
  return model;
}

FittedModel fit_model(const FunctionalSample& y, const std::vector<FunctionalSample>& predictors, const TermSet& terms,
                      const ModelSpec& spec, const NipalsOptions& options) {
  if (predictors.empty()) throw Error(ErrorKind::InvalidInput, "no predictors supplied");
  auto basis_x = std::make_shared<const BasisSystem>(spec.k_x, spec.order, predictors.front().grid);
  auto basis_y = std::make_shared<const BasisSystem>(spec.k_y, spec.order, y.grid);
  return fit_model(y, build_design(predictors, terms, std::move(basis_x)), std::move(basis_y), spec.h, options);
}

namespace {
Eigen::MatrixXd theta_of(const FittedModel& model, std::optional<int> components) {
  return components ? model.pls.theta_for(*components) : model.pls.theta;
}
}  // namespace

Eigen::MatrixXd predict_from_design(const FittedModel& model, const Eigen::MatrixXd& d_new,
                                    std::optional<int> components) {
  if (d_new.cols() != model.design.num_columns())
    throw Error(ErrorKind::DesignMismatch, "design has " + std::to_string(d_new.cols()) + " columns, model expects " +
                                               std::to_string(model.design.num_columns()));
  const Eigen::MatrixXd lambda_hat = model.design.metric.right_multiply_sqrt(d_new) * theta_of(model, components);
  const Eigen::MatrixXd c_hat = lambda_hat * model.basis_y->gram_inv_sqrt();
  Eigen::MatrixXd curves = c_hat * model.basis_y->eval().transpose();
  curves.rowwise() += model.y_mean;
  return curves;
}

std::vector<Eigen::MatrixXd> predict_path_from_design(const FittedModel& model, const Eigen::MatrixXd& d_new,
                                                      int h_max) {
  if (d_new.cols() != model.design.num_columns())
    throw Error(ErrorKind::DesignMismatch, "design has " + std::to_string(d_new.cols()) + " columns, model expects " +
                                               std::to_string(model.design.num_columns()));
  const Eigen::MatrixXd pi_new = model.design.metric.right_multiply_sqrt(d_new);
  const Eigen::MatrixXd to_curves = model.basis_y->gram_inv_sqrt() * model.basis_y->eval().transpose();
  std::vector<Eigen::MatrixXd> out;
  for (int h = 1; h <= std::min(h_max, model.pls.h); ++h) {
    Eigen::MatrixXd curves = pi_new * model.pls.theta_for(h) * to_curves;
    curves.rowwise() += model.y_mean;
    out.push_back(std::move(curves));
  }
  return out;
}

Eigen::MatrixXd predict(const FittedModel& model, const std::vector<FunctionalSample>& x_new,
                        std::optional<int> components) {
  return predict_from_design(model, design_columns_for_new(x_new, model.design), components);
}

Eigen::MatrixXd fitted_values(const FittedModel& model, std::optional<int> components) {
  return predict_from_design(model, model.design.matrix, components);
}

Eigen::MatrixXd coefficient_tensor(const FittedModel& model, std::optional<int> components) {
  return model.design.metric.left_multiply_inv_sqrt(theta_of(model, components)) * model.basis_y->gram_inv_sqrt();
}

CoefficientSurfaces reconstruct_surfaces(const FittedModel& model, const Grid& s_grid, const Grid& r_grid,
                                         const Grid& t_grid) {
  CoefficientSurfaces out;
  out.s_grid = s_grid;
  out.r_grid = r_grid;
  out.t_grid = t_grid;
  out.coefficients = coefficient_tensor(model);

  const BasisSystem& bx = *model.design.basis_x;
  const Eigen::Index k = bx.size();
  const Eigen::MatrixXd psi_s = bx.evaluate(s_grid.points());
  const Eigen::MatrixXd psi_r = bx.evaluate(r_grid.points());
  const Eigen::MatrixXd phi_t = model.basis_y->evaluate(t_grid.points());

  std::size_t b = 0;
  for (; b < model.design.terms.main.size(); ++b) {
    const auto gamma = out.coefficients.middleRows(model.design.block_offset(b), k);
    out.main.push_back(psi_s * gamma * phi_t.transpose());
  }
  for (std::size_t i = 0; i < model.design.terms.inter.size(); ++i, ++b) {
    // rows j*K + l of this block, evaluated at every t
    const Eigen::MatrixXd gt = out.coefficients.middleRows(model.design.block_offset(b), k * k) * phi_t.transpose();
    Surface3 surf(s_grid.size(), r_grid.size(), t_grid.size());
    for (Eigen::Index q = 0; q < t_grid.size(); ++q) {
      const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> g(
          gt.col(q).data(), k, k);
      surf.slice(q) = psi_s * g * psi_r.transpose();
    }
    out.inter.push_back(std::move(surf));
  }
  return out;
}

}  // namespace fofpls
