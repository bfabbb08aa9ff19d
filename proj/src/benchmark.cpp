#include "fofpls/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fofpls/error.hpp"
#include "fofpls/metrics.hpp"
#include "fofpls/model.hpp"
#include "fofpls/parallel.hpp"

namespace fofpls {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Main: return "main";
    case ModelKind::Full: return "full";
    case ModelKind::True: return "true";
    case ModelKind::Selected: return "selected";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "main") return ModelKind::Main;
  if (name == "full") return ModelKind::Full;
  if (name == "true") return ModelKind::True;
  if (name == "selected") return ModelKind::Selected;
  throw Error(ErrorKind::InvalidConfiguration, "unknown model '" + name + "' (expected main, full, true or selected)");
}

void BenchmarkOptions::validate() const {
  config.validate();
  if (mc_reps < 1) throw Error(ErrorKind::InvalidConfiguration, "mc_reps must be at least 1");
  if (models.empty()) throw Error(ErrorKind::InvalidConfiguration, "no models requested");
  if (n_train < 4 || n_train >= config.n_curves)
    throw Error(ErrorKind::InvalidConfiguration, "n_train must be at least 4 and leave test curves");
  if (h_max < 1 || h_select < 1) throw Error(ErrorKind::InvalidConfiguration, "component counts must be positive");
  if (h_splits < 0) throw Error(ErrorKind::InvalidConfiguration, "h_splits must be nonnegative");
  if (splits < 1) throw Error(ErrorKind::InvalidConfiguration, "splits must be at least 1");
}

namespace {

constexpr int kPredictors = 5;

std::vector<int> range(int from, int to) {
  std::vector<int> out(static_cast<std::size_t>(to - from));
  std::iota(out.begin(), out.end(), from);
  return out;
}

std::vector<FunctionalSample> take(const std::vector<FunctionalSample>& xs, const std::vector<int>& rows) {
  std::vector<FunctionalSample> out;
  for (const auto& x : xs) out.push_back(x.rows(rows));
  return out;
}

struct TrainData {
  FunctionalSample y;
  std::vector<FunctionalSample> x;
};

struct Tuned {
  int k_y = 0, k_x = 0, h = 0;
};

Tuned tune(const BenchmarkOptions& opt, const TrainData& train, const TermSet& terms, std::uint64_t split_seed) {
  SelectionOptions sel;
  sel.criterion = opt.basis_criterion;
  sel.split_seed = split_seed;
  sel.splits = opt.splits;
  sel.h_fixed = opt.basis_criterion == Criterion::HoldoutMse ? opt.h_max : opt.h_select;
  const BasisChoice basis =
      select_basis_counts(train.y, train.x, terms, opt.candidates_y, opt.candidates_x, sel, opt.order);
  Tuned t{basis.k_y, basis.k_x, 0};
  if (!basis.mspe_path.empty() && opt.h_splits == 0) {
    t.h = static_cast<int>(std::min_element(basis.mspe_path.begin(), basis.mspe_path.end()) - basis.mspe_path.begin()) + 1;
  } else {
    auto bx = std::make_shared<const BasisSystem>(t.k_x, opt.order, train.x.front().grid);
    auto by = std::make_shared<const BasisSystem>(t.k_y, opt.order, train.y.grid);
    const int splits = opt.h_splits > 0 ? opt.h_splits : opt.splits;
    t.h = select_components(train.y, train.x, terms, bx, by, opt.h_max, split_seed, splits).h_opt;
  }
  return t;
}

TermSet forward_selected_terms(const BenchmarkOptions& opt, const TrainData& train, const Tuned& main_tuned,
                               std::uint64_t split_seed) {
  auto bx = std::make_shared<const BasisSystem>(main_tuned.k_x, opt.order, train.x.front().grid);
  auto by = std::make_shared<const BasisSystem>(main_tuned.k_y, opt.order, train.y.grid);
  SelectionOptions sel;
  sel.h_fixed = opt.h_select;
  sel.criterion = opt.selection_criterion;
  sel.split_seed = split_seed;
  sel.splits = opt.splits;
  const SelectionTrace mains = forward_select_main(train.y, train.x, bx, by, sel);
  if (mains.final_terms.main.empty()) return TermSet::main_effects(kPredictors);
  return forward_select_interactions(train.y, train.x, mains.final_terms, bx, by, sel).final_terms;
}

}  // namespace

std::vector<ReplicateResult> run_replicate(const BenchmarkOptions& options, int replicate) {
  SimConfig config = options.config;
  config.seed = derive_seed(options.config.seed, static_cast<std::uint64_t>(replicate));
  const std::uint64_t split_seed = derive_seed(config.seed, 1);
  const SimDataset data = simulate(config);

  const auto train_rows = range(0, options.n_train);
  const auto test_rows = range(options.n_train, config.n_curves);
  const TrainData train{data.response.observed.rows(train_rows), take(data.predictors.noisy, train_rows)};
  const auto& test_source =
      options.test_predictors == TestPredictors::Truth ? data.predictors.truth : data.predictors.noisy;
  const auto x_test = take(test_source, test_rows);
  const FunctionalSample y_test = data.response.signal.rows(test_rows);
  const CurveNorm norm(y_test.grid);

  std::vector<ReplicateResult> out;
  std::optional<Tuned> main_tuned;
  for (ModelKind kind : options.models) {
    TermSet terms;
    switch (kind) {
      case ModelKind::Main: terms = TermSet::main_effects(kPredictors); break;
      case ModelKind::Full: terms = TermSet::full(kPredictors); break;
      case ModelKind::True: terms = true_terms(config.setting); break;
      case ModelKind::Selected: {
        // forward selection runs with the basis sizes chosen for the main-effect model
        if (!main_tuned) main_tuned = tune(options, train, TermSet::main_effects(kPredictors), split_seed);
        terms = forward_selected_terms(options, train, *main_tuned, split_seed);
        break;
      }
    }
    Tuned tuned;
    if (kind == ModelKind::Main && main_tuned) {
      tuned = *main_tuned;
    } else {
      tuned = tune(options, train, terms, split_seed);
      if (kind == ModelKind::Main) main_tuned = tuned;
    }

    const FittedModel model =
        fit_model(train.y, train.x, terms, ModelSpec{tuned.k_x, tuned.k_y, options.order, tuned.h});
    const Eigen::MatrixXd pred = predict(model, x_test);
    ReplicateResult r;
    r.replicate = replicate;
    r.model = kind;
    r.terms = terms;
    r.k_y = tuned.k_y;
    r.k_x = tuned.k_x;
    r.h = model.pls.h;
    r.mspe = mspe(y_test.values, pred, norm);
    r.rmspe = rmspe(y_test.values, pred, norm);
    r.mape = mape(y_test.values, pred, norm);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ModelSummary> summarize(const std::vector<ReplicateResult>& results, const std::vector<ModelKind>& models) {
  std::vector<ModelSummary> rows;
  for (ModelKind kind : models) {
    std::vector<double> a, b, c;
    for (const auto& r : results)
      if (r.model == kind) {
        a.push_back(r.mspe);
        b.push_back(r.rmspe);
        c.push_back(r.mape);
      }
    auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
      const double n = static_cast<double>(v.size());
      mean = n > 0 ? std::accumulate(v.begin(), v.end(), 0.0) / n : std::nan("");
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    };
    ModelSummary s;
    s.model = kind;
    s.reps = static_cast<int>(a.size());
    stats(a, s.mspe_mean, s.mspe_sd);
    stats(b, s.rmspe_mean, s.rmspe_sd);
    stats(c, s.mape_mean, s.mape_sd);
    rows.push_back(s);
  }
  return rows;
}

BenchmarkReport run_benchmark(const BenchmarkOptions& options) {
  options.validate();
  std::vector<std::vector<ReplicateResult>> per_rep(static_cast<std::size_t>(options.mc_reps));
  parallel_for(per_rep.size(), [&](std::size_t i) {
    try {
      per_rep[i] = run_replicate(options, static_cast<int>(i));
    } catch (const Error& e) {
      throw Error(e.kind(), "replicate " + std::to_string(i) + ": " + e.what());
    }
  });
  BenchmarkReport report;
  report.options = options;
  for (auto& rep : per_rep)
    for (auto& r : rep) report.replicates.push_back(std::move(r));
  report.rows = summarize(report.replicates, options.models);
  return report;
}

}  // namespace fofpls
