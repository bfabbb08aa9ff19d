#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fofpls/benchmark.hpp"
#include "fofpls/io.hpp"
#include "fofpls/metrics.hpp"
#include "fofpls/model.hpp"
#include "fofpls/pls.hpp"
#include "fofpls/selection.hpp"
#include "fofpls/sim.hpp"
#include "test_util.hpp"

using namespace fofpls;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Benchmark cells: (setting, lag) -> mean MSPE of main, full, true.
std::map<std::pair<int, int>, BenchmarkReport> run_cells() {
  std::map<std::pair<int, int>, BenchmarkReport> out;
  for (int setting : {1, 2})
    for (int lag : {2, 4}) {
      BenchmarkOptions o;
      o.config.setting = setting;
      o.config.lag = lag;
      o.config.seed = 1;
      o.mc_reps = 50;
      o.models = {ModelKind::Main, ModelKind::Full, ModelKind::True};
      const auto t0 = std::chrono::steady_clock::now();
      out[{setting, lag}] = run_benchmark(o);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const auto& r = out[{setting, lag}].rows;
      std::printf("  setting %d lag %d: main %.4f (%.4f) full %.4f (%.4f) true %.4f (%.4f) [%.0fs]\n", setting, lag,
                  r[0].mspe_mean, r[0].mspe_sd, r[1].mspe_mean, r[1].mspe_sd, r[2].mspe_mean, r[2].mspe_sd, secs);
      std::fflush(stdout);
    }
  return out;
}

void criteria_1_2() {
  const auto cells = run_cells();
  const auto& c12 = cells.at({1, 2}).rows;
  const double main = c12[0].mspe_mean, truth = c12[2].mspe_mean;
  report(1, truth >= 0.19 && truth <= 0.30 && main >= 0.33 && main <= 0.53,
         "setting 1 lag 2: true " + fmt("%.4f", truth) + " in [0.19,0.30], main " + fmt("%.4f", main) + " in [0.33,0.53]");

  int held = 0;
  std::string detail;
  bool finite = true;
  for (const auto& [cell, rep] : cells) {
    const auto& r = rep.rows;
    const bool ok = r[2].mspe_mean <= r[1].mspe_mean && r[1].mspe_mean < r[0].mspe_mean;
    held += ok;
    for (const auto& row : r) finite = finite && std::isfinite(row.rmspe_mean) && std::isfinite(row.mape_mean);
    if (!ok)
      detail += " violated at setting " + std::to_string(cell.first) + " lag " + std::to_string(cell.second) + " (true " +
                fmt("%.4f", r[2].mspe_mean) + ", full " + fmt("%.4f", r[1].mspe_mean) + ", main " +
                fmt("%.4f", r[0].mspe_mean) + ")";
  }
  report(2, held == 4 && finite,
         "true <= full < main in " + std::to_string(held) + "/4 cells" + (finite ? "" : ", non-finite RMSPE/MAPE") + detail);
}

void criterion_3() {
  const int k = 6, n_curves = 60;
  const auto q = test::span_quadrature(k - 3, 5);
  auto b = std::make_shared<const BasisSystem>(k, 4, q.grid);
  const Eigen::Index n = q.grid.size();
  const Eigen::ArrayXd sw = q.weights.array().sqrt();
  const TermSet terms = TermSet::full(2);
  double worst = 1.0;
  for (int d = 0; d < 20; ++d) {
    Rng rng(derive_seed(3, static_cast<std::uint64_t>(d)));
    std::vector<FunctionalSample> xs{test::in_span_sample(*b, n_curves, rng), test::in_span_sample(*b, n_curves, rng)};
    const FunctionalSample y = test::in_span_sample(*b, n_curves, rng, "y");
    const FittedModel model = fit_model(y, build_design(xs, terms, b), b, 3);

    // quadrature space: sqrt-weighted pointwise values of every term
    Eigen::MatrixXd xq(n_curves, 2 * n + 3 * n * n);
    Eigen::Index col = 0;
    for (int m = 0; m < 2; ++m, col += n) xq.middleCols(col, n) = xs[static_cast<std::size_t>(m)].values.array().rowwise() * sw.transpose();
    for (auto [m1, m2] : terms.inter) {
      const auto& a = xs[static_cast<std::size_t>(m1 - 1)].values;
      const auto& c = xs[static_cast<std::size_t>(m2 - 1)].values;
      for (int i = 0; i < n_curves; ++i)
        for (Eigen::Index p = 0; p < n; ++p)
          for (Eigen::Index r = 0; r < n; ++r) xq(i, col + p * n + r) = sw[p] * sw[r] * a(i, p) * c(i, r);
      col += n * n;
    }
    xq = xq.rowwise() - xq.colwise().mean();
    Eigen::MatrixXd yq = y.values.array().rowwise() * sw.transpose();
    yq = yq.rowwise() - yq.colwise().mean();
    const PlsFit quad = nipals(xq, yq, 3);
    for (int a = 0; a < 3; ++a) worst = std::min(worst, test::cosine(model.pls.scores.col(a), quad.scores.col(a)));
  }
  report(3, worst > 1.0 - 1e-6, "20 datasets, components 1-3, min cosine 1-" + fmt("%.2e", 1.0 - worst));
}

void criterion_4() {
  double worst_orth = 0.0, worst_resid = 0.0;
  bool monotone = true;
  int models = 0;
  for (int setting : {1, 2})
    for (int lag : {2, 4}) {
      SimConfig c;
      c.setting = setting;
      c.lag = lag;
      c.n_curves = 100;
      c.seed = derive_seed(4, static_cast<std::uint64_t>(setting * 10 + lag));
      const SimDataset d = simulate(c);
      const CurveNorm norm(d.response.observed.grid);
      for (const TermSet& terms : {TermSet::main_effects(5), TermSet::full(5), true_terms(setting)})
        for (int k : {6, 10}) {
          const ModelSpec spec{k, k, 4, 10};
          const SimDataset& dd = d;
          FittedModel m = fit_model(dd.response.observed, dd.predictors.noisy, terms, spec);
          // refit with residuals kept for the residual-score check
          NipalsOptions keep;
          keep.keep_residuals = true;
          m = fit_model(dd.response.observed, m.design, m.basis_y, 10, keep);
          const Eigen::MatrixXd& t = m.pls.scores;
          for (int i = 0; i < t.cols(); ++i)
            for (int j = 0; j < i; ++j)
              worst_orth = std::max(worst_orth, std::abs(t.col(i).dot(t.col(j))) / (t.col(i).norm() * t.col(j).norm()));
          for (int i = 0; i < t.cols(); ++i) {
            const double sx = (m.pls.x_residual.transpose() * t.col(i)).norm() /
                              (std::max(1e-300, m.pls.x_residual.norm()) * t.col(i).norm());
            const double sy = (m.pls.y_residual.transpose() * t.col(i)).norm() /
                              (std::max(1e-300, m.pls.y_residual.norm()) * t.col(i).norm());
            worst_resid = std::max({worst_resid, sx, sy});
          }
          double prev = 1e300;
          for (int h = 1; h <= 10; ++h) {
            const double e = mse(dd.response.observed.values, fitted_values(m, h), norm);
            monotone = monotone && e <= prev * (1.0 + 1e-12);
            prev = e;
          }
          ++models;
        }
    }
  report(4, worst_orth < 1e-8 && worst_resid < 1e-8 && monotone,
         std::to_string(models) + " models: score orthogonality " + fmt("%.1e", worst_orth) + ", residual-score " +
             fmt("%.1e", worst_resid) + ", training MSE " + (monotone ? "non-increasing" : "INCREASES") + " over h=1..10");
}

void criterion_5() {
  const int k = 6, n_train = 60, n_test = 10;
  const Grid g = Grid::uniform(50);
  auto bx = std::make_shared<const BasisSystem>(k, 4, g);
  auto by = std::make_shared<const BasisSystem>(5, 4, g);
  Rng rng(5);
  const Eigen::MatrixXd a1 = rng.normal_matrix(n_train, k), a2 = rng.normal_matrix(n_train, k);
  const std::vector<FunctionalSample> xs{{g, a1 * bx->eval().transpose(), "x"}, {g, a2 * bx->eval().transpose(), "x"}};
  Eigen::MatrixXd yv(n_train, 50);
  for (int i = 0; i < n_train; ++i)
    for (Eigen::Index q = 0; q < 50; ++q)
      yv(i, q) = xs[0].values.row(i).mean() * std::sin(3 * g[q]) + xs[0].values(i, 10) * xs[1].values(i, 30) * g[q] +
                 xs[1].values(i, q) + 0.3 * rng.normal();
  const TermSet terms{{1, 2}, {{1, 2}, {2, 2}}};
  const FittedModel m = fit_model({g, yv, "y"}, xs, terms, ModelSpec{k, 5, 4, 3});

  const Eigen::MatrixXd t1 = rng.normal_matrix(n_test, k), t2 = rng.normal_matrix(n_test, k);
  const std::vector<FunctionalSample> x_new{{g, t1 * bx->eval().transpose(), "x"}, {g, t2 * bx->eval().transpose(), "x"}};
  const Eigen::MatrixXd via_theta = predict(m, x_new);

  // quadrature route on a 301-point Simpson grid
  const Grid fine = Grid::uniform(301);
  const Eigen::VectorXd w = test::simpson_weights(301);
  const CoefficientSurfaces s = reconstruct_surfaces(m, fine, fine, g);
  const Eigen::MatrixXd phi = bx->evaluate(fine.points());
  const Eigen::MatrixXd coef[2] = {a1, a2}, coef_new[2] = {t1, t2};
  Eigen::MatrixXd via_quad = m.y_mean.replicate(n_test, 1);
  for (std::size_t mi = 0; mi < 2; ++mi) {
    const Eigen::RowVectorXd mean_curve = coef[mi].colwise().mean() * phi.transpose();
    const Eigen::MatrixXd centered = (coef_new[mi] * phi.transpose()).rowwise() - mean_curve;
    via_quad += centered * w.asDiagonal() * s.main[mi];
  }
  for (std::size_t ii = 0; ii < terms.inter.size(); ++ii) {
    const auto [p1, p2] = terms.inter[ii];
    const Eigen::MatrixXd& ca = coef[p1 - 1];
    const Eigen::MatrixXd& cb = coef[p2 - 1];
    const Eigen::MatrixXd mean_outer = ca.transpose() * cb / static_cast<double>(n_train);
    const Eigen::MatrixXd mean_surface = phi * mean_outer * phi.transpose();
    for (int i = 0; i < n_test; ++i) {
      const Eigen::VectorXd xa = phi * coef_new[p1 - 1].row(i).transpose();
      const Eigen::VectorXd xb = phi * coef_new[p2 - 1].row(i).transpose();
      const Eigen::MatrixXd integrand = ((xa * xb.transpose() - mean_surface).array() * (w * w.transpose()).array()).matrix();
      for (Eigen::Index q = 0; q < g.size(); ++q)
        via_quad(i, q) += (integrand.array() * s.inter[ii].slice(q).array()).sum();
    }
  }
  const double diff = (via_theta - via_quad).cwiseAbs().maxCoeff();
  report(5, diff < 1e-5, "10 in-span test curves, max |quadrature - Theta| = " + fmt("%.2e", diff));
}

void criterion_6() {
  const Grid g = Grid::uniform(40);
  auto b = std::make_shared<const BasisSystem>(6, 4, g);
  Rng rng(6);
  double worst = 0.0;
  for (int rank : {6, 3}) {
    // exact-linear: response coefficients are a linear map of the design
    const Eigen::MatrixXd a = rng.normal_matrix(50, rank) * rng.normal_matrix(rank, 6);
    const FunctionalSample x{g, a * b->eval().transpose(), "x"};
    const Eigen::MatrixXd d = a.rowwise() - a.colwise().mean();
    const FunctionalSample y{g, (d * rng.normal_matrix(6, 6)) * b->eval().transpose(), "y"};
    const FittedModel m = fit_model(y, build_design({x}, TermSet{{1}, {}}, b), b, rank);
    const CurveNorm norm(g);
    worst = std::max(worst, std::sqrt(mse(y.values, fitted_values(m), norm) / mse(y.values, Eigen::MatrixXd::Zero(50, 40), norm)));
  }
  report(6, worst < 1e-8, "h = rank in {6, 3}: relative training residual " + fmt("%.1e", worst));
}

void criterion_7() {
  const int reps = 25;
  std::map<std::string, int> main_sets;
  std::map<std::pair<int, int>, int> pairs;
  for (int r = 0; r < reps; ++r) {
    SimConfig c;
    c.setting = 1;
    c.lag = 2;
    c.noise_sd_eps = 0.5;
    c.seed = derive_seed(7, static_cast<std::uint64_t>(r));
    const SimDataset d = simulate(c);
    auto bx = std::make_shared<const BasisSystem>(6, 4, d.response.observed.grid);
    auto by = std::make_shared<const BasisSystem>(6, 4, d.response.observed.grid);
    SelectionOptions o;
    o.criterion = Criterion::HoldoutMse;
    o.splits = 5;
    o.split_seed = c.seed;
    const SelectionTrace mains = forward_select_main(d.response.observed, d.predictors.noisy, bx, by, o);
    TermSet final_terms = mains.final_terms;
    if (!final_terms.main.empty())
      final_terms = forward_select_interactions(d.response.observed, d.predictors.noisy, final_terms, bx, by, o).final_terms;
    std::vector<int> sorted = final_terms.main;
    std::sort(sorted.begin(), sorted.end());
    std::string key;
    for (int m : sorted) key += (key.empty() ? "{" : ",") + std::to_string(m);
    ++main_sets[key + "}"];
    for (auto p : final_terms.inter) ++pairs[p];
  }
  const auto modal = std::max_element(main_sets.begin(), main_sets.end(),
                                      [](const auto& a, const auto& b) { return a.second < b.second; });
  const std::string want = "{2,3,4,5}";
  bool ok = modal->first == want;
  std::string detail = "modal main set " + modal->first + " (" + std::to_string(modal->second) + "/25)";
  for (auto p : std::vector<std::pair<int, int>>{{2, 2}, {3, 4}, {4, 5}}) {
    const int hits = pairs[p];
    ok = ok && hits * 100 >= 60 * reps;
    detail += ", (" + std::to_string(p.first) + "," + std::to_string(p.second) + ") " + std::to_string(hits) + "/25";
  }
  report(7, ok, detail);
}

void criterion_8() {
  double worst_var = 0.0, worst_cor = 0.0;
  for (int lag : {2, 4}) {
    SimConfig c;
    c.lag = lag;
    c.n_curves = 10000;
    Rng rng(derive_seed(8, static_cast<std::uint64_t>(lag)));
    const PredictorSet p = make_predictors(c, rng);
    for (const auto& x : p.truth) {
      const Eigen::MatrixXd cx = x.values.rowwise() - x.values.colwise().mean();
      const Eigen::ArrayXd var = cx.array().square().colwise().sum() / (cx.rows() - 1.0);
      worst_var = std::max(worst_var, (var - 1.0).abs().maxCoeff());
    }
    if (lag == 4)
      for (int m = 0; m < 4; ++m) {
        const Eigen::MatrixXd a = p.truth[static_cast<std::size_t>(m)].values.rowwise() - p.truth[static_cast<std::size_t>(m)].values.colwise().mean();
        const Eigen::MatrixXd b = p.truth[static_cast<std::size_t>(m + 1)].values.rowwise() - p.truth[static_cast<std::size_t>(m + 1)].values.colwise().mean();
        const Eigen::ArrayXd cor = (a.array() * b.array()).colwise().sum() /
                                   (a.array().square().colwise().sum() * b.array().square().colwise().sum()).sqrt();
        worst_cor = std::max(worst_cor, (cor - 0.8).abs().maxCoeff());
      }
  }
  report(8, worst_var < 0.05 && worst_cor < 0.05,
         "1e4 draws: max |var - 1| " + fmt("%.4f", worst_var) + ", max |cor - 0.8| (lag 4) " + fmt("%.4f", worst_cor));
}

void criterion_9() {
  const fs::path root = fs::temp_directory_path() / ("fofpls_accept_" + std::to_string(Rng(std::random_device{}()).next_u64()));
  fs::create_directories(root);
  const std::string cli = FOFPLS_CLI_PATH;
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands = {
      {"simulate --setting 2 --lag 4 --n 80 --seed 9 --out-dir {}/sim", {"sim/y.csv", "sim/x3.csv", "sim/x5_true.csv", "sim/meta.json"}},
      {"fit --data-dir {}/sim --terms 'main=1,2,4;inter=1:1,2:4' --kx 6 --ky 5 --h 4 --surface-grid 12 --out-dir {}/fit",
       {"fit/model.json", "fit/fitted.csv", "fit/surfaces.csv"}},
      {"predict --model {}/fit/model.json --data-dir {}/sim --out-dir {}/pred", {"pred/predicted.csv"}},
      {"select --data-dir {}/sim --kx 5 --ky 5 --h 3 --splits 2 --seed 4 --out-dir {}/sel", {"sel/selection.json"}},
      {"benchmark --setting 1 --lag 2 --n 60 --n-train 30 --reps 2 --models main,true --ky-candidates 5 "
       "--kx-candidates 5 --h-max 3 --splits 1 --seed 3 --out-dir {}/bench",
       {"bench/report.csv", "bench/replicates.csv", "bench/report.txt"}},
  };
  bool ok = true;
  std::string detail;
  std::map<std::string, std::string> first;
  for (int run = 0; run < 2 && ok; ++run) {
    const fs::path dir = root / std::to_string(run);
    fs::create_directories(dir);
    for (const auto& [args, outputs] : commands) {
      std::string a = args;
      for (std::size_t pos; (pos = a.find("{}")) != std::string::npos;) a.replace(pos, 2, dir.string());
      const std::string cmd = cli + " " + a + " > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) {
        ok = false;
        detail = "command failed: " + a.substr(0, a.find(' '));
        break;
      }
      for (const auto& f : outputs) {
        const std::string text = read_text(dir / f);
        if (run == 0) {
          first[f] = text;
        } else if (first[f] != text) {
          ok = false;
          detail += " differs: " + f;
        }
      }
    }
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  report(9, ok, ok ? "simulate, fit, predict, select, benchmark repeated: " + std::to_string(first.size()) + " outputs byte-identical"
                   : detail);
}

}  // namespace

int main(int argc, char** argv) {
  // optional list of criterion numbers to run, default all
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  auto want = [&](int id) { return which.empty() || std::find(which.begin(), which.end(), id) != which.end(); };
  auto guarded = [&](int id, void (*f)()) {
    if (!want(id)) return;
    try {
      f();
    } catch (const std::exception& e) {
      report(id, false, std::string("error: ") + e.what());
    }
  };
  guarded(3, criterion_3);
  guarded(4, criterion_4);
  guarded(5, criterion_5);
  guarded(6, criterion_6);
  guarded(8, criterion_8);
  guarded(9, criterion_9);
  guarded(7, criterion_7);
  if (want(1) || want(2)) {
    try {
      criteria_1_2();
    } catch (const std::exception& e) {
      report(1, false, std::string("error: ") + e.what());
      report(2, false, std::string("error: ") + e.what());
    }
  }
  return failures == 0 ? 0 : 1;
}
