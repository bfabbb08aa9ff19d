#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

#include "fofpls/basis.hpp"
#include "fofpls/design.hpp"
#include "fofpls/pls.hpp"

namespace fofpls {

struct ModelSpec {
  int k_x = 8;
  int k_y = 8;
  int order = 4;
  int h = 8;
};

/// Everything needed to predict new curves: design layout and centering
/// means, the response basis and mean, and the PLS fit in metric space.
struct FittedModel {
  ModelSpec spec;
  StackedDesign design;
  std::shared_ptr<const BasisSystem> basis_y;
  Eigen::RowVectorXd y_mean;
  PlsFit pls;
};

FittedModel fit_model(const FunctionalSample& y, const std::vector<FunctionalSample>& predictors, const TermSet& terms,
                      const ModelSpec& spec, const NipalsOptions& options = {});

/// Same as fit_model but reuses an existing design and response basis.
FittedModel fit_model(const FunctionalSample& y, StackedDesign design, std::shared_ptr<const BasisSystem> basis_y,
                      int h, const NipalsOptions& options = {});

/// Response curves on the response grid. `components` defaults to all fitted ones.
Eigen::MatrixXd predict_from_design(const FittedModel& model, const Eigen::MatrixXd& d_new,
                                    std::optional<int> components = std::nullopt);
/// Predictions for components 1..h_max from one pass over the new design; entry h-1 uses h components.
std::vector<Eigen::MatrixXd> predict_path_from_design(const FittedModel& model, const Eigen::MatrixXd& d_new, int h_max);
Eigen::MatrixXd predict(const FittedModel& model, const std::vector<FunctionalSample>& x_new,
                        std::optional<int> components = std::nullopt);
Eigen::MatrixXd fitted_values(const FittedModel& model, std::optional<int> components = std::nullopt);

/// Basis coefficients of the stacked coefficient function: S^{-1} Theta G_Y^{-1/2},
/// P x K_Y with rows in design-column order.
Eigen::MatrixXd coefficient_tensor(const FittedModel& model, std::optional<int> components = std::nullopt);

/// Values of a function of (s, r, t) on a tensor grid, stored t-major.
class Surface3 {
 public:
  Surface3() = default;
  Surface3(Eigen::Index ns, Eigen::Index nr, Eigen::Index nt) : ns_(ns), nr_(nr), slices_(nt, Eigen::MatrixXd::Zero(ns, nr)) {}

  Eigen::Index ns() const noexcept { return ns_; }
  Eigen::Index nr() const noexcept { return nr_; }
  Eigen::Index nt() const noexcept { return static_cast<Eigen::Index>(slices_.size()); }
  double operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) const { return slices_[k](i, j); }
  /// ns x nr slice at t index k.
  const Eigen::MatrixXd& slice(Eigen::Index k) const { return slices_[k]; }
  Eigen::MatrixXd& slice(Eigen::Index k) { return slices_[k]; }

 private:
  Eigen::Index ns_ = 0, nr_ = 0;
  std::vector<Eigen::MatrixXd> slices_;
};

struct CoefficientSurfaces {
  Grid s_grid, r_grid, t_grid;
  Eigen::MatrixXd coefficients;         // P x K_Y
  std::vector<Eigen::MatrixXd> main;    // per main term, |s| x |t|
  std::vector<Surface3> inter;          // per interaction term
};

CoefficientSurfaces reconstruct_surfaces(const FittedModel& model, const Grid& s_grid, const Grid& r_grid,
                                         const Grid& t_grid);

}  // namespace fofpls
