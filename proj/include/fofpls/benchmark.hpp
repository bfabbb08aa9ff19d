#pragma once

#include <string>
#include <vector>

#include "fofpls/design.hpp"
#include "fofpls/selection.hpp"
#include "fofpls/sim.hpp"

namespace fofpls {

enum class ModelKind { Main, Full, True, Selected };

std::string to_string(ModelKind kind);
/// Accepts main, full, true, selected.
ModelKind parse_model_kind(const std::string& name);

/// Which predictor curves the fitted models see on the test curves.
enum class TestPredictors { Truth, Noisy };

struct BenchmarkOptions {
  SimConfig config;
  std::vector<ModelKind> models{ModelKind::Main, ModelKind::Full, ModelKind::True, ModelKind::Selected};
  int mc_reps = 50;
  int n_train = 100;  // first n_train curves train, the rest test
  std::vector<int> candidates_y{4, 6, 8, 10};
  std::vector<int> candidates_x{4, 6, 8, 10, 15};
  int order = 4;
  int h_max = 10;
  int h_select = 8;  // components used by forward selection
  Criterion basis_criterion = Criterion::HoldoutMse;
  Criterion selection_criterion = Criterion::HoldoutMse;
  int splits = 5;
  /// When positive, h is re-chosen at the selected basis sizes over this many splits.
  int h_splits = 0;
  TestPredictors test_predictors = TestPredictors::Truth;

  void validate() const;
};

struct ReplicateResult {
  int replicate = 0;
  ModelKind model = ModelKind::Main;
  TermSet terms;
  int k_y = 0;
  int k_x = 0;
  int h = 0;
  double mspe = 0.0;
  double rmspe = 0.0;
  double mape = 0.0;
};

/// Mean and replicate standard deviation of each metric for one model.
struct ModelSummary {
  ModelKind model = ModelKind::Main;
  int reps = 0;
  double mspe_mean = 0.0, mspe_sd = 0.0;
  double rmspe_mean = 0.0, rmspe_sd = 0.0;
  double mape_mean = 0.0, mape_sd = 0.0;
};

struct BenchmarkReport {
  BenchmarkOptions options;
  std::vector<ReplicateResult> replicates;  // ordered by replicate, then model
  std::vector<ModelSummary> rows;           // one per requested model
};

/// Fits every requested model on one simulated dataset and scores it on the test curves.
std::vector<ReplicateResult> run_replicate(const BenchmarkOptions& options, int replicate);

BenchmarkReport run_benchmark(const BenchmarkOptions& options);

std::vector<ModelSummary> summarize(const std::vector<ReplicateResult>& results, const std::vector<ModelKind>& models);

}  // namespace fofpls
