#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fofpls/benchmark.hpp"
#include "fofpls/error.hpp"
#include "fofpls/io.hpp"
#include "fofpls/model.hpp"
#include "fofpls/selection.hpp"
#include "fofpls/sim.hpp"

namespace fs = std::filesystem;
using namespace fofpls;

namespace {

constexpr int kUsageError = 2;
constexpr int kDataError = 1;
constexpr int kPredictors = 5;

struct DataArgs {
  std::string data_dir = ".";
  std::string y_path;
  std::vector<std::string> x_paths;
};

void add_data_options(CLI::App* cmd, DataArgs& a, bool need_y) {
  cmd->add_option("--data-dir", a.data_dir, "Directory holding y.csv and x1.csv..x5.csv")->capture_default_str();
  if (need_y) cmd->add_option("--y", a.y_path, "Response curves CSV (overrides --data-dir)");
  cmd->add_option("--x", a.x_paths, "Predictor curve CSVs in predictor order (overrides --data-dir)");
}

std::vector<CurveTable> load_predictors(const DataArgs& a) {
  std::vector<std::string> paths = a.x_paths;
  if (paths.empty())
    for (int m = 1; m <= kPredictors; ++m) paths.push_back((fs::path(a.data_dir) / ("x" + std::to_string(m) + ".csv")).string());
  std::vector<CurveTable> out;
  for (const auto& p : paths) out.push_back(read_curves_csv(p));
  return out;
}

std::vector<FunctionalSample> samples(const std::vector<CurveTable>& tables) {
  std::vector<FunctionalSample> out;
  for (const auto& t : tables) out.push_back(t.sample);
  return out;
}

CurveTable load_response(const DataArgs& a) {
  return read_curves_csv(a.y_path.empty() ? fs::path(a.data_dir) / "y.csv" : fs::path(a.y_path));
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw CLI::ValidationError(what, "'" + cell + "' is not an integer");
    }
  }
  if (out.empty()) throw CLI::ValidationError(what, "list is empty");
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory " + dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Function-on-function PLS regression with quadratic and interaction effects"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  SimConfig sim;
  std::string out_dir = ".";
  auto* simulate_cmd = app.add_subcommand("simulate", "Draw a simulated dataset");
  simulate_cmd->add_option("--setting", sim.setting, "Coefficient setting")->check(CLI::IsMember({1, 2}))->capture_default_str();
  simulate_cmd->add_option("--lag", sim.lag, "Number of shared latent processes")->check(CLI::NonNegativeNumber)->capture_default_str();
  simulate_cmd->add_option("--n", sim.n_curves, "Number of curves")->check(CLI::PositiveNumber)->capture_default_str();
  simulate_cmd->add_option("--grid", sim.grid_len, "Grid length")->check(CLI::Range(2, 100000))->capture_default_str();
  simulate_cmd->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  simulate_cmd->add_option("--out-dir", out_dir)->capture_default_str();

  DataArgs fit_data;
  ModelSpec spec;
  std::string terms_text = "main=1,2,3,4,5";
  int surface_len = 50;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model and export coefficient surfaces");
  add_data_options(fit_cmd, fit_data, true);
  fit_cmd->add_option("--terms", terms_text, "Terms, e.g. main=2,3;inter=2:2,3:4")->capture_default_str();
  fit_cmd->add_option("--kx", spec.k_x)->check(CLI::PositiveNumber)->capture_default_str();
  fit_cmd->add_option("--ky", spec.k_y)->check(CLI::PositiveNumber)->capture_default_str();
  fit_cmd->add_option("--h", spec.h, "PLS components")->check(CLI::PositiveNumber)->capture_default_str();
  fit_cmd->add_option("--surface-grid", surface_len, "Points per axis of the surface grid")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
  fit_cmd->add_option("--out-dir", out_dir)->capture_default_str();

  DataArgs select_data;
  ModelSpec select_spec;
  auto* select_cmd = app.add_subcommand("select", "Forward selection of main then interaction terms");
  add_data_options(select_cmd, select_data, true);
  select_cmd->add_option("--kx", select_spec.k_x)->check(CLI::PositiveNumber)->capture_default_str();
  select_cmd->add_option("--ky", select_spec.k_y)->check(CLI::PositiveNumber)->capture_default_str();
  select_cmd->add_option("--h", select_spec.h, "Components used while selecting")->check(CLI::PositiveNumber)->capture_default_str();
  std::string select_criterion = "holdout";
  int select_splits = 5;
  std::uint64_t select_seed = 1;
  select_cmd->add_option("--criterion", select_criterion, "Candidate score: training or holdout")
      ->check(CLI::IsMember({"training", "holdout"}))
      ->capture_default_str();
  select_cmd->add_option("--splits", select_splits, "Random 50/50 splits for holdout scoring")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  select_cmd->add_option("--seed", select_seed, "Seed of the random splits")->capture_default_str();
  select_cmd->add_option("--out-dir", out_dir)->capture_default_str();

  DataArgs predict_data;
  std::string model_path = "model.json";
  auto* predict_cmd = app.add_subcommand("predict", "Predict response curves from a saved model");
  add_data_options(predict_cmd, predict_data, false);
  predict_cmd->add_option("--model", model_path)->capture_default_str();
  predict_cmd->add_option("--out-dir", out_dir)->capture_default_str();

  BenchmarkOptions bench;
  std::string models_text = "main,full,true,selected";
  std::string ky_text = "4,6,8,10", kx_text = "4,6,8,10,15";
  bool noisy_test = false;
  auto* bench_cmd = app.add_subcommand("benchmark", "Monte Carlo prediction benchmark on simulated data");
  bench_cmd->add_option("--setting", bench.config.setting)->check(CLI::IsMember({1, 2}))->capture_default_str();
  bench_cmd->add_option("--lag", bench.config.lag)->check(CLI::NonNegativeNumber)->capture_default_str();
  bench_cmd->add_option("--n", bench.config.n_curves, "Curves per replicate")->check(CLI::PositiveNumber)->capture_default_str();
  bench_cmd->add_option("--n-train", bench.n_train, "Leading curves used for training")->capture_default_str();
  bench_cmd->add_option("--grid", bench.config.grid_len)->check(CLI::Range(2, 100000))->capture_default_str();
  bench_cmd->add_option("--seed", bench.config.seed)->capture_default_str();
  bench_cmd->add_option("--models", models_text)->capture_default_str();
  bench_cmd->add_option("--reps", bench.mc_reps)->check(CLI::PositiveNumber)->capture_default_str();
  bench_cmd->add_option("--ky-candidates", ky_text)->capture_default_str();
  bench_cmd->add_option("--kx-candidates", kx_text)->capture_default_str();
  bench_cmd->add_option("--h-max", bench.h_max)->check(CLI::PositiveNumber)->capture_default_str();
  bench_cmd->add_option("--h", bench.h_select, "Components used by forward selection")->check(CLI::PositiveNumber)->capture_default_str();
  bench_cmd->add_option("--splits", bench.splits, "Random 50/50 splits averaged when tuning")->check(CLI::PositiveNumber)->capture_default_str();
  std::string bench_criterion = "holdout";
  bench_cmd->add_option("--criterion", bench_criterion, "Score for basis and term selection: training or holdout")
      ->check(CLI::IsMember({"training", "holdout"}))
      ->capture_default_str();
  bench_cmd->add_flag("--noisy-test", noisy_test, "Predict test curves from noisy predictors");
  bench_cmd->add_option("--out-dir", out_dir)->capture_default_str();

  try {
    app.parse(argc, argv);
    if (*bench_cmd) {
      bench.models.clear();
      std::stringstream in(models_text);
      std::string name;
      while (std::getline(in, name, ',')) {
        try {
          bench.models.push_back(parse_model_kind(name));
        } catch (const Error& e) {
          throw CLI::ValidationError("--models", e.what());
        }
      }
      bench.candidates_y = parse_int_list(ky_text, "--ky-candidates");
      bench.candidates_x = parse_int_list(kx_text, "--kx-candidates");
      bench.basis_criterion = bench.selection_criterion = parse_criterion(bench_criterion);
      bench.test_predictors = noisy_test ? TestPredictors::Noisy : TestPredictors::Truth;
    }
    if (*fit_cmd) {
      try {
        parse_terms(terms_text);
      } catch (const Error& e) {
        throw CLI::ValidationError("--terms", e.what());
      }
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*simulate_cmd) {
      ensure_dir(out_dir);
      const SimDataset data = simulate(sim);
      const fs::path dir(out_dir);
      write_curves_csv(dir / "y.csv", data.response.observed);
      for (int m = 0; m < kPredictors; ++m) {
        const std::string stem = "x" + std::to_string(m + 1);
        write_curves_csv(dir / (stem + ".csv"), data.predictors.noisy[static_cast<std::size_t>(m)]);
        write_curves_csv(dir / (stem + "_true.csv"), data.predictors.truth[static_cast<std::size_t>(m)]);
      }
      const nlohmann::json meta{{"setting", sim.setting},       {"lag", sim.lag},
                                {"n_curves", sim.n_curves},     {"grid_len", sim.grid_len},
                                {"noise_sd_eps", sim.noise_sd_eps}, {"noise_sd_u", sim.noise_sd_u},
                                {"seed", sim.seed},             {"true_terms", format_terms(true_terms(sim.setting))}};
      atomic_write(dir / "meta.json", meta.dump(1) + "\n");
    } else if (*fit_cmd) {
      ensure_dir(out_dir);
      const CurveTable y = load_response(fit_data);
      const auto x = samples(load_predictors(fit_data));
      const TermSet terms = parse_terms(terms_text);
      const FittedModel model = fit_model(y.sample, x, terms, spec);
      const fs::path dir(out_dir);
      save_model(dir / "model.json", model);
      write_curves_csv(dir / "fitted.csv", CurveTable{y.ids, FunctionalSample{y.sample.grid, fitted_values(model), "fitted"}});
      const Grid g = Grid::uniform(static_cast<std::size_t>(surface_len));
      atomic_write(dir / "surfaces.csv", surfaces_to_csv(reconstruct_surfaces(model, g, g, g), terms));
      std::printf("fitted %s with K_X=%d K_Y=%d h=%d\n", format_terms(terms).c_str(), spec.k_x, spec.k_y, model.pls.h);
    } else if (*select_cmd) {
      ensure_dir(out_dir);
      const CurveTable y = load_response(select_data);
      const auto x = samples(load_predictors(select_data));
      auto bx = std::make_shared<const BasisSystem>(select_spec.k_x, select_spec.order, x.front().grid);
      auto by = std::make_shared<const BasisSystem>(select_spec.k_y, select_spec.order, y.sample.grid);
      SelectionOptions opt;
      opt.h_fixed = select_spec.h;
      opt.criterion = parse_criterion(select_criterion);
      opt.splits = select_splits;
      opt.split_seed = select_seed;
      const SelectionTrace mains = forward_select_main(y.sample, x, bx, by, opt);
      nlohmann::json doc{{"main", trace_to_json(mains)}};
      TermSet final_terms = mains.final_terms;
      if (!mains.final_terms.main.empty()) {
        const SelectionTrace inter = forward_select_interactions(y.sample, x, mains.final_terms, bx, by, opt);
        doc["interactions"] = trace_to_json(inter);
        final_terms = inter.final_terms;
      }
      doc["final_terms"] = final_terms.empty() ? "" : format_terms(final_terms);
      atomic_write(fs::path(out_dir) / "selection.json", doc.dump(1) + "\n");
      std::printf("selected %s\n", final_terms.empty() ? "(no terms)" : format_terms(final_terms).c_str());
    } else if (*predict_cmd) {
      ensure_dir(out_dir);
      const FittedModel model = load_model(model_path);
      const auto tables = load_predictors(predict_data);
      const Eigen::MatrixXd pred = predict(model, samples(tables));
      write_curves_csv(fs::path(out_dir) / "predicted.csv",
                       CurveTable{tables.front().ids, FunctionalSample{model.basis_y->grid(), pred, "predicted"}});
    } else if (*bench_cmd) {
      ensure_dir(out_dir);
      const BenchmarkReport report = run_benchmark(bench);
      const fs::path dir(out_dir);
      atomic_write(dir / "report.csv", report_to_csv(report));
      atomic_write(dir / "replicates.csv", replicates_to_csv(report));
      const std::string text = report_to_text(report);
      atomic_write(dir / "report.txt", text);
      std::fputs(text.c_str(), stdout);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kDataError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kDataError;
  }
  return 0;
}
