#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fofpls/basis.hpp"
#include "fofpls/design.hpp"

namespace fofpls {

/// How candidate models are scored during term and basis selection.
enum class Criterion {
  TrainingMse,  // MSE of fitted curves on the data the model was fitted to
  HoldoutMse,   // MSPE on the second half of random 50/50 splits
};

/// "training" or "holdout".
Criterion parse_criterion(const std::string& name);
std::string to_string(Criterion criterion);

/// With HoldoutMse a candidate scores its best held-out MSPE over h = 1..h_fixed.
struct SelectionOptions {
  int h_fixed = 8;
  Criterion criterion = Criterion::TrainingMse;
  std::uint64_t split_seed = 0;
  int splits = 1;  // number of random 50/50 splits averaged by HoldoutMse
};

struct Term {
  int m = 0;
  int n = 0;  // 0 for a main effect
  bool is_interaction() const noexcept { return n != 0; }
  std::string to_string() const;
};

struct SelectionStep {
  Term candidate;
  double mse = 0.0;
  bool accepted = false;
};

struct SelectionTrace {
  std::vector<SelectionStep> steps;
  TermSet final_terms;
  int h_fixed = 0;
  double baseline_mse = 0.0;     // MSE before the first accepted term of this stage
  std::vector<double> mse_path;  // MSE after each accepted term
};

/// Relative margin by which a candidate must beat the current MSE.
inline constexpr double kImprovementTolerance = 1e-12;

/// Greedy forward selection of main effects, seeded by the best single-term model.
SelectionTrace forward_select_main(const FunctionalSample& y, const std::vector<FunctionalSample>& predictors,
                                   std::shared_ptr<const BasisSystem> basis_x,
                                   std::shared_ptr<const BasisSystem> basis_y, const SelectionOptions& options = {});

/// Greedy forward selection of quadratic/interaction pairs drawn from the selected main effects.
SelectionTrace forward_select_interactions(const FunctionalSample& y, const std::vector<FunctionalSample>& predictors,
                                           const TermSet& main_terms, std::shared_ptr<const BasisSystem> basis_x,
                                           std::shared_ptr<const BasisSystem> basis_y,
                                           const SelectionOptions& options = {});

struct ComponentChoice {
  int h_opt = 1;
  std::vector<double> mspe_path;  // entry h-1 is the held-out MSPE with h components
};

/// Number of components minimising held-out MSPE over random 50/50 splits of
/// the supplied training data (smallest h on ties).
ComponentChoice select_components(const FunctionalSample& y_train, const std::vector<FunctionalSample>& x_train,
                                  const TermSet& terms, std::shared_ptr<const BasisSystem> basis_x,
                                  std::shared_ptr<const BasisSystem> basis_y, int h_max, std::uint64_t split_seed,
                                  int splits = 1);

struct BasisChoice {
  int k_y = 0;
  int k_x = 0;
  double score = 0.0;
  /// Held-out MSPE path of the chosen pair; empty for TrainingMse.
  std::vector<double> mspe_path;
  std::vector<std::string> warnings;
};

/// Grid search over candidate basis sizes. TrainingMse scores each pair at
/// h_fixed; HoldoutMse scores each pair by its best held-out MSPE over
/// h = 1..h_fixed. Ties go to the smaller K_X, then the smaller K_Y.
BasisChoice select_basis_counts(const FunctionalSample& y_train, const std::vector<FunctionalSample>& x_train,
                                const TermSet& terms, const std::vector<int>& candidates_y,
                                const std::vector<int>& candidates_x, const SelectionOptions& options, int order = 4);

/// Held-out MSPE for h = 1..h_max averaged over `splits` random 50/50 splits.
std::vector<double> holdout_mspe_path(const FunctionalSample& y, const std::vector<FunctionalSample>& x,
                                      const TermSet& terms, std::shared_ptr<const BasisSystem> basis_x,
                                      std::shared_ptr<const BasisSystem> basis_y, int h_max,
                                      std::uint64_t split_seed, int splits);

/// Training MSE of a model with min(h, N-1, P) components.
double training_mse(const FunctionalSample& y, const std::vector<FunctionalSample>& x, const TermSet& terms,
                    std::shared_ptr<const BasisSystem> basis_x, std::shared_ptr<const BasisSystem> basis_y, int h);

}  // namespace fofpls
