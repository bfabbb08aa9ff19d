#include "fofpls/selection.hpp"

#include <algorithm>
#include <limits>

#include "fofpls/error.hpp"
#include "fofpls/metrics.hpp"
#include "fofpls/model.hpp"
#include "fofpls/parallel.hpp"
#include "fofpls/sim.hpp"

namespace fofpls {

Criterion parse_criterion(const std::string& name) {
  if (name == "training") return Criterion::TrainingMse;
  if (name == "holdout") return Criterion::HoldoutMse;
  throw Error(ErrorKind::InvalidConfiguration, "unknown criterion '" + name + "' (expected training or holdout)");
}

std::string to_string(Criterion criterion) {
  return criterion == Criterion::TrainingMse ? "training" : "holdout";
}

std::string Term::to_string() const {
  if (!is_interaction()) return std::to_string(m);
  return std::to_string(m) + ":" + std::to_string(n);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

NipalsOptions selection_nipals() {
  NipalsOptions o;
  o.stop_when_exhausted = true;
  return o;
}

int usable_components(int h, Eigen::Index n, Eigen::Index p) {
  return static_cast<int>(std::max<Eigen::Index>(1, std::min<Eigen::Index>({static_cast<Eigen::Index>(h), n - 1, p})));
}

struct Split {
  std::vector<int> train, test;
};

Split random_half_split(int n, std::uint64_t seed, int index) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(index)));
  auto perm = rng.permutation(n);
  Split s;
  const int half = n / 2;
  s.train.assign(perm.begin(), perm.begin() + half);
  s.test.assign(perm.begin() + half, perm.end());
  return s;
}

std::vector<FunctionalSample> take_rows(const std::vector<FunctionalSample>& x, const std::vector<int>& rows) {
  std::vector<FunctionalSample> out;
  out.reserve(x.size());
  for (const auto& s : x) out.push_back(s.rows(rows));
  return out;
}

double baseline_mse(const FunctionalSample& y) {
  Eigen::MatrixXd fit(y.values.rows(), y.values.cols());
  fit.rowwise() = y.values.colwise().mean();
  return mse(y.values, fit, CurveNorm(y.grid));
}

// Scores one term set under the selection criterion; lower is better.
double score_terms(const FunctionalSample& y, const std::vector<FunctionalSample>& x, const TermSet& terms,
                   const std::shared_ptr<const BasisSystem>& basis_x, const std::shared_ptr<const BasisSystem>& basis_y,
                   const SelectionOptions& options) {
  if (options.criterion == Criterion::TrainingMse) return training_mse(y, x, terms, basis_x, basis_y, options.h_fixed);
  // best held-out MSPE over h = 1..h_fixed
  const auto path = holdout_mspe_path(y, x, terms, basis_x, basis_y, options.h_fixed, options.split_seed, options.splits);
  return *std::min_element(path.begin(), path.end());
}

}  // namespace

double training_mse(const FunctionalSample& y, const std::vector<FunctionalSample>& x, const TermSet& terms,
                    std::shared_ptr<const BasisSystem> basis_x, std::shared_ptr<const BasisSystem> basis_y, int h) {
  StackedDesign design = build_design(x, terms, std::move(basis_x));
  const int comps = usable_components(h, design.matrix.rows(), design.num_columns());
  const FittedModel model = fit_model(y, std::move(design), std::move(basis_y), comps, selection_nipals());
  return mse(y.values, fitted_values(model), CurveNorm(y.grid));
}

std::vector<double> holdout_mspe_path(const FunctionalSample& y, const std::vector<FunctionalSample>& x,
                                      const TermSet& terms, std::shared_ptr<const BasisSystem> basis_x,
                                      std::shared_ptr<const BasisSystem> basis_y, int h_max,
                                      std::uint64_t split_seed, int splits) {
  const int n = static_cast<int>(y.num_curves());
  if (n < 4) throw Error(ErrorKind::InsufficientData, "need at least 4 curves to split 50/50, got " + std::to_string(n));
  if (h_max < 1) throw Error(ErrorKind::InvalidConfiguration, "h_max must be at least 1");
  if (splits < 1) throw Error(ErrorKind::InvalidConfiguration, "need at least one split");

  const CurveNorm norm(y.grid);
  std::vector<double> total(static_cast<std::size_t>(h_max), 0.0);
  for (int s = 0; s < splits; ++s) {
    const Split split = random_half_split(n, split_seed, s);
    const auto x_train = take_rows(x, split.train);
    const auto x_test = take_rows(x, split.test);
    const FunctionalSample y_train = y.rows(split.train);
    const FunctionalSample y_test = y.rows(split.test);

    StackedDesign design = build_design(x_train, terms, basis_x);
    const Eigen::MatrixXd d_test = design_columns_for_new(x_test, design);
    const int comps = usable_components(h_max, design.matrix.rows(), design.num_columns());
    const FittedModel model = fit_model(y_train, std::move(design), basis_y, comps, selection_nipals());
    const auto path = predict_path_from_design(model, d_test, h_max);
    for (int h = 1; h <= h_max; ++h) {
      auto& slot = total[static_cast<std::size_t>(h - 1)];
      if (h > static_cast<int>(path.size())) {
        slot = kInf;
        continue;
      }
      slot += mspe(y_test.values, path[static_cast<std::size_t>(h - 1)], norm);
    }
  }
  for (auto& v : total) v /= splits;
  return total;
}

SelectionTrace forward_select_main(const FunctionalSample& y, const std::vector<FunctionalSample>& predictors,
                                   std::shared_ptr<const BasisSystem> basis_x,
                                   std::shared_ptr<const BasisSystem> basis_y, const SelectionOptions& options) {
  if (predictors.empty()) throw Error(ErrorKind::InvalidInput, "forward selection needs at least one predictor");
  if (options.h_fixed < 1) throw Error(ErrorKind::InvalidConfiguration, "h_fixed must be at least 1");

  SelectionTrace trace;
  trace.h_fixed = options.h_fixed;
  trace.baseline_mse = baseline_mse(y);
  double current = trace.baseline_mse;
  if (options.criterion == Criterion::HoldoutMse) {
    // the empty model predicts the inner-training mean; score it on the same splits
    const int n = static_cast<int>(y.num_curves());
    const CurveNorm norm(y.grid);
    double total = 0.0;
    for (int s = 0; s < options.splits; ++s) {
      const Split split = random_half_split(n, options.split_seed, s);
      const FunctionalSample tr = y.rows(split.train), te = y.rows(split.test);
      Eigen::MatrixXd pred(te.values.rows(), te.values.cols());
      pred.rowwise() = tr.values.colwise().mean();
      total += mspe(te.values, pred, norm);
    }
    current = trace.baseline_mse = total / options.splits;
  }

  std::vector<int> remaining;
  for (int m = 1; m <= static_cast<int>(predictors.size()); ++m) remaining.push_back(m);

  while (!remaining.empty()) {
    std::vector<double> scores(remaining.size());
    parallel_for(remaining.size(), [&](std::size_t i) {
      TermSet candidate = trace.final_terms;
      candidate.main.push_back(remaining[i]);
      scores[i] = score_terms(y, predictors, candidate, basis_x, basis_y, options);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
      if (scores[i] < scores[best]) best = i;
    const bool accept = scores[best] < current - kImprovementTolerance * current;
    for (std::size_t i = 0; i < scores.size(); ++i)
      trace.steps.push_back({Term{remaining[i], 0}, scores[i], accept && i == best});
    if (!accept) break;
    trace.final_terms.main.push_back(remaining[best]);
    trace.mse_path.push_back(scores[best]);
    current = scores[best];
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return trace;
}

SelectionTrace forward_select_interactions(const FunctionalSample& y, const std::vector<FunctionalSample>& predictors,
                                           const TermSet& main_terms, std::shared_ptr<const BasisSystem> basis_x,
                                           std::shared_ptr<const BasisSystem> basis_y,
                                           const SelectionOptions& options) {
  if (main_terms.main.empty()) throw Error(ErrorKind::NothingToExtend, "no main effects to build interactions from");
  if (options.h_fixed < 1) throw Error(ErrorKind::InvalidConfiguration, "h_fixed must be at least 1");

  std::vector<int> mains = main_terms.main;
  std::sort(mains.begin(), mains.end());
  std::vector<std::pair<int, int>> pool;
  for (std::size_t i = 0; i < mains.size(); ++i)
    for (std::size_t j = i; j < mains.size(); ++j) pool.emplace_back(mains[i], mains[j]);

  SelectionTrace trace;
  trace.h_fixed = options.h_fixed;
  trace.final_terms = main_terms;
  trace.final_terms.inter.clear();
  double current = score_terms(y, predictors, trace.final_terms, basis_x, basis_y, options);
  trace.baseline_mse = current;

  while (!pool.empty()) {
    std::vector<double> scores(pool.size());
    parallel_for(pool.size(), [&](std::size_t i) {
      TermSet candidate = trace.final_terms;
      candidate.inter.push_back(pool[i]);
      scores[i] = score_terms(y, predictors, candidate, basis_x, basis_y, options);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
      if (scores[i] < scores[best]) best = i;
    const bool accept = scores[best] < current - kImprovementTolerance * current;
    for (std::size_t i = 0; i < scores.size(); ++i)
      trace.steps.push_back({Term{pool[i].first, pool[i].second}, scores[i], accept && i == best});
    if (!accept) break;
    trace.final_terms.inter.push_back(pool[best]);
    trace.mse_path.push_back(scores[best]);
    current = scores[best];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return trace;
}

ComponentChoice select_components(const FunctionalSample& y_train, const std::vector<FunctionalSample>& x_train,
                                  const TermSet& terms, std::shared_ptr<const BasisSystem> basis_x,
                                  std::shared_ptr<const BasisSystem> basis_y, int h_max, std::uint64_t split_seed,
                                  int splits) {
  ComponentChoice choice;
  choice.mspe_path =
      holdout_mspe_path(y_train, x_train, terms, std::move(basis_x), std::move(basis_y), h_max, split_seed, splits);
  const auto best = std::min_element(choice.mspe_path.begin(), choice.mspe_path.end());
  choice.h_opt = static_cast<int>(best - choice.mspe_path.begin()) + 1;
  return choice;
}

BasisChoice select_basis_counts(const FunctionalSample& y_train, const std::vector<FunctionalSample>& x_train,
                                const TermSet& terms, const std::vector<int>& candidates_y,
                                const std::vector<int>& candidates_x, const SelectionOptions& options, int order) {
  if (candidates_y.empty() || candidates_x.empty())
    throw Error(ErrorKind::InvalidInput, "candidate basis lists must be nonempty");
  if (x_train.empty()) throw Error(ErrorKind::InvalidInput, "no predictors supplied");

  std::vector<int> cx = candidates_x, cy = candidates_y;
  std::sort(cx.begin(), cx.end());
  cx.erase(std::unique(cx.begin(), cx.end()), cx.end());
  std::sort(cy.begin(), cy.end());
  cy.erase(std::unique(cy.begin(), cy.end()), cy.end());

  BasisChoice choice;
  auto make = [&](int k, const Grid& grid, const char* which) -> std::shared_ptr<const BasisSystem> {
    try {
      return std::make_shared<const BasisSystem>(k, order, grid);
    } catch (const Error& e) {
      choice.warnings.push_back(std::string("skipping ") + which + "=" + std::to_string(k) + ": " + e.what());
      return nullptr;
    }
  };
  std::vector<std::shared_ptr<const BasisSystem>> bx, by;
  for (int k : cx) bx.push_back(make(k, x_train.front().grid, "K_X"));
  for (int k : cy) by.push_back(make(k, y_train.grid, "K_Y"));

  struct Cell {
    std::size_t ix, iy;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < cx.size(); ++i)
    for (std::size_t j = 0; j < cy.size(); ++j)
      if (bx[i] && by[j]) cells.push_back({i, j});
  if (cells.empty()) throw Error(ErrorKind::InvalidConfiguration, "every candidate basis size was skipped");

  std::vector<double> scores(cells.size(), kInf);
  std::vector<std::vector<double>> paths(cells.size());
  parallel_for(cells.size(), [&](std::size_t c) {
    const auto& cell = cells[c];
    if (options.criterion == Criterion::TrainingMse) {
      scores[c] = training_mse(y_train, x_train, terms, bx[cell.ix], by[cell.iy], options.h_fixed);
    } else {
      paths[c] = holdout_mspe_path(y_train, x_train, terms, bx[cell.ix], by[cell.iy], options.h_fixed,
                                   options.split_seed, options.splits);
      scores[c] = *std::min_element(paths[c].begin(), paths[c].end());
    }
  });

  std::size_t best = 0;
  for (std::size_t c = 1; c < cells.size(); ++c)
    if (scores[c] < scores[best]) best = c;
  choice.k_x = cx[cells[best].ix];
  choice.k_y = cy[cells[best].iy];
  choice.score = scores[best];
  choice.mspe_path = std::move(paths[best]);
  return choice;
}

}  // namespace fofpls
