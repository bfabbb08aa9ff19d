#include <gtest/gtest.h>

#include "fofpls/error.hpp"
#include "fofpls/metrics.hpp"
#include "fofpls/model.hpp"
#include "fofpls/pls.hpp"
#include "test_util.hpp"

using namespace fofpls;

namespace {

struct Problem {
  Eigen::MatrixXd x, y;
};

Problem random_problem(int n, int p, int q, std::uint64_t seed) {
  Rng rng(seed);
  Problem pr{rng.normal_matrix(n, p), Eigen::MatrixXd()};
  pr.y = pr.x * rng.normal_matrix(p, q) + 0.5 * rng.normal_matrix(n, q);
  pr.x = pr.x.rowwise() - pr.x.colwise().mean();
  pr.y = pr.y.rowwise() - pr.y.colwise().mean();
  return pr;
}

struct SimFit {
  SimDataset data;
  FittedModel model;
};

SimFit simulated_fit(int h, const TermSet& terms, int n = 100) {
  SimConfig c;
  c.n_curves = n;
  c.seed = 21;
  SimFit out{simulate(c), {}};
  out.model = fit_model(out.data.response.observed, out.data.predictors.noisy, terms, ModelSpec{6, 6, 4, h});
  return out;
}

}  // namespace

TEST(Nipals, ScoreAndResidualOrthogonality) {
  const Problem pr = random_problem(40, 12, 3, 1);
  NipalsOptions opt;
  opt.keep_residuals = true;
  const PlsFit fit = nipals(pr.x, pr.y, 6, opt);
  const Eigen::MatrixXd& t = fit.scores;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (i != j) EXPECT_LT(std::abs(t.col(i).dot(t.col(j))), 1e-8 * t.col(i).norm() * t.col(j).norm());
  EXPECT_LT((t.transpose() * fit.x_residual).cwiseAbs().maxCoeff(), 1e-8 * t.norm() * pr.x.norm());
  EXPECT_LT((t.transpose() * fit.y_residual).cwiseAbs().maxCoeff(), 1e-8 * t.norm() * pr.y.norm());
}

TEST(Nipals, ThetaMatchesLoadingsFormula) {
  const Problem pr = random_problem(30, 8, 2, 2);
  const PlsFit fit = nipals(pr.x, pr.y, 4);
  const Eigen::MatrixXd w = fit.weights, p = fit.x_loadings, q = fit.y_loadings;
  const Eigen::MatrixXd theta = w * (p.transpose() * w).inverse() * q.transpose();
  EXPECT_LT(test::rel_diff(fit.theta, theta), 1e-10);
  // fitted responses equal the score expansion T Q^T
  EXPECT_LT(test::rel_diff(pr.x * fit.theta, fit.scores * q.transpose()), 1e-10);
}

TEST(Nipals, FirstWeightIsNormalisedCrossCovariance) {
  // single response column: w1 is proportional to Pi^T lambda
  const Problem pr = random_problem(50, 10, 1, 3);
  const PlsFit fit = nipals(pr.x, pr.y, 1);
  const Eigen::VectorXd k1 = pr.x.transpose() * pr.y.col(0);
  EXPECT_GT(test::cosine(fit.weights.col(0), k1), 1.0 - 1e-8);
  // several response columns: w1 is the dominant left singular vector of Pi^T Lambda
  const Problem pr3 = random_problem(50, 10, 4, 4);
  const PlsFit fit3 = nipals(pr3.x, pr3.y, 1);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(pr3.x.transpose() * pr3.y, Eigen::ComputeThinU);
  EXPECT_GT(test::cosine(fit3.weights.col(0), svd.matrixU().col(0)), 1.0 - 1e-8);
}

TEST(Nipals, SignConventionLargestWeightPositive) {
  const Problem pr = random_problem(30, 7, 2, 5);
  const PlsFit fit = nipals(pr.x, pr.y, 3);
  for (int a = 0; a < 3; ++a) {
    Eigen::Index i = 0;
    fit.weights.col(a).cwiseAbs().maxCoeff(&i);
    EXPECT_GT(fit.weights(i, a), 0.0);
  }
}

TEST(Nipals, FullRankEqualsLeastSquares) {
  Rng rng(6);
  Eigen::MatrixXd d = rng.normal_matrix(25, 6);
  d = d.rowwise() - d.colwise().mean();
  const Eigen::MatrixXd c = d * rng.normal_matrix(6, 6);
  const PlsFit fit = nipals(d, c, 6);
  EXPECT_LT((d * fit.theta - c).norm(), 1e-8 * c.norm());
}

TEST(Nipals, Errors) {
  const Problem pr = random_problem(10, 4, 2, 7);
  auto kind = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  EXPECT_EQ(kind([&] { nipals(pr.x, pr.y, 5); }), ErrorKind::TooManyComponents);
  EXPECT_EQ(kind([&] { nipals(pr.x, pr.y, 0); }), ErrorKind::TooManyComponents);
  EXPECT_EQ(kind([&] { nipals(Eigen::MatrixXd::Zero(10, 4), pr.y, 1); }), ErrorKind::DegenerateDesign);
  EXPECT_EQ(kind([&] { nipals(pr.x, pr.y.topRows(9), 1); }), ErrorKind::ShapeMismatch);
  // exact rank 2: asking for 3 components exhausts the covariance
  Rng rng(8);
  Eigen::MatrixXd low = rng.normal_matrix(10, 2) * rng.normal_matrix(2, 4);
  low = low.rowwise() - low.colwise().mean();
  const Eigen::MatrixXd y = low * rng.normal_matrix(4, 2);
  EXPECT_EQ(kind([&] { nipals(low, y, 3); }), ErrorKind::DegenerateDesign);
  NipalsOptions opt;
  opt.stop_when_exhausted = true;
  EXPECT_EQ(nipals(low, y, 3, opt).h, 2);
}

TEST(Nipals, ConvergenceFailureReportsComponent) {
  const Problem pr = random_problem(20, 6, 3, 9);
  NipalsOptions opt;
  opt.max_iterations = 1;
  try {
    nipals(pr.x, pr.y, 2, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConvergenceFailure);
    EXPECT_NE(std::string(e.what()).find("component 1"), std::string::npos);
  }
}

TEST(Nipals, MetricFactorInvariance) {
  // a Cholesky factor instead of the symmetric root gives the same predictions
  Rng rng(10);
  const BasisSystem bx(6, 4, Grid::uniform(50)), by(5, 4, Grid::uniform(50));
  Eigen::MatrixXd d = rng.normal_matrix(30, 6);
  d = d.rowwise() - d.colwise().mean();
  Eigen::MatrixXd c = d * rng.normal_matrix(6, 5) + 0.3 * rng.normal_matrix(30, 5);
  c = c.rowwise() - c.colwise().mean();
  const Eigen::MatrixXd lx = bx.gram().llt().matrixL();
  const Eigen::MatrixXd ly = by.gram().llt().matrixL();
  const PlsFit sym = nipals_fit(d, c, bx.gram_sqrt(), by.gram_sqrt(), 3);
  const PlsFit chol = nipals_fit(d, c, lx, ly, 3);
  const Eigen::MatrixXd pred_sym = d * bx.gram_sqrt() * sym.theta * by.gram_inv_sqrt();
  const Eigen::MatrixXd pred_chol = d * lx * chol.theta * ly.inverse();
  EXPECT_LT((pred_sym - pred_chol).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Nipals, QuadratureSpaceEquivalence) {
  // in-span curves: NIPALS on sqrt-weighted discretised curves reproduces the coefficient-space scores
  const int k = 6;
  const auto q = test::span_quadrature(k - 3, 5);
  auto b = std::make_shared<const BasisSystem>(k, 4, q.grid);
  Rng rng(11);
  std::vector<FunctionalSample> xs{test::in_span_sample(*b, 40, rng), test::in_span_sample(*b, 40, rng)};
  const FunctionalSample y = test::in_span_sample(*b, 40, rng, "y");
  const TermSet terms{{1, 2}, {{1, 2}}};
  const FittedModel model = fit_model(y, build_design(xs, terms, b), b, 3);

  const Eigen::Index n = q.grid.size();
  const Eigen::ArrayXd sw = q.weights.array().sqrt();
  Eigen::MatrixXd xq(40, 2 * n + n * n);
  for (int m = 0; m < 2; ++m) xq.middleCols(m * n, n) = xs[m].values.array().rowwise() * sw.transpose();
  for (int i = 0; i < 40; ++i)
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index r = 0; r < n; ++r) xq(i, 2 * n + p * n + r) = sw[p] * sw[r] * xs[0].values(i, p) * xs[1].values(i, r);
  xq = xq.rowwise() - xq.colwise().mean();
  Eigen::MatrixXd yq = y.values.array().rowwise() * sw.transpose();
  yq = yq.rowwise() - yq.colwise().mean();
  const PlsFit quad = nipals(xq, yq, 3);
  for (int a = 0; a < 3; ++a) EXPECT_GT(test::cosine(model.pls.scores.col(a), quad.scores.col(a)), 1.0 - 1e-6);
}

TEST(Model, PredictionConsistency) {
  const SimFit f = simulated_fit(4, TermSet{{2, 3}, {{2, 3}}});
  const auto& m = f.model;
  const Eigen::MatrixXd fitted = fitted_values(m);
  EXPECT_LT((predict(m, f.data.predictors.noisy) - fitted).cwiseAbs().maxCoeff(), 1e-10);
  // zero design row predicts the mean curve
  const Eigen::MatrixXd zero = predict_from_design(m, Eigen::MatrixXd::Zero(1, m.design.num_columns()));
  EXPECT_LT((zero.row(0) - m.y_mean).cwiseAbs().maxCoeff(), 1e-12);
  // the path evaluation agrees with one-at-a-time prediction
  const auto path = predict_path_from_design(m, m.design.matrix, 4);
  for (int h = 1; h <= 4; ++h)
    EXPECT_LT((path[static_cast<std::size_t>(h - 1)] - predict_from_design(m, m.design.matrix, h)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Model, TrainingMseNonIncreasingInComponents) {
  const SimFit f = simulated_fit(10, TermSet::full(5));
  const CurveNorm norm(f.data.response.observed.grid);
  double prev = 1e300;
  for (int h = 1; h <= 10; ++h) {
    const double e = mse(f.data.response.observed.values, fitted_values(f.model, h), norm);
    EXPECT_LE(e, prev * (1 + 1e-12)) << "h=" << h;
    prev = e;
  }
}

TEST(Model, FirstComponentCarriesMostCovariance) {
  const SimFit f = simulated_fit(5, true_terms(1));
  const Eigen::MatrixXd lambda =
      f.model.basis_y->project(f.data.response.observed.values.rowwise() - f.model.y_mean) * f.model.basis_y->gram_sqrt();
  const double c1 = (lambda.transpose() * f.model.pls.scores.col(0)).norm();
  for (int a = 1; a < 5; ++a) EXPECT_GE(c1, (lambda.transpose() * f.model.pls.scores.col(a)).norm());
}

TEST(Model, SurfacesMatchCoefficientExpansion) {
  const SimFit f = simulated_fit(3, TermSet{{1}, {{1, 2}}});
  const Grid s = Grid::uniform(7), r = Grid::uniform(5), t = Grid::uniform(4);
  const CoefficientSurfaces cs = reconstruct_surfaces(f.model, s, r, t);
  const auto& bx = *f.model.design.basis_x;
  const auto& by = *f.model.basis_y;
  const Eigen::MatrixXd ps = bx.evaluate(s.points()), pr = bx.evaluate(r.points()), pt = by.evaluate(t.points());
  const Eigen::MatrixXd g = coefficient_tensor(f.model);
  const int k = bx.size();
  for (int i = 0; i < 7; ++i)
    for (int q = 0; q < 4; ++q) {
      double v = 0.0;
      for (int j = 0; j < k; ++j)
        for (int c = 0; c < by.size(); ++c) v += g(j, c) * ps(i, j) * pt(q, c);
      EXPECT_NEAR(cs.main[0](i, q), v, 1e-10);
    }
  for (int i = 0; i < 7; ++i)
    for (int j2 = 0; j2 < 5; ++j2)
      for (int q = 0; q < 4; ++q) {
        double v = 0.0;
        for (int j = 0; j < k; ++j)
          for (int l = 0; l < k; ++l)
            for (int c = 0; c < by.size(); ++c) v += g(k + j * k + l, c) * ps(i, j) * pr(j2, l) * pt(q, c);
        EXPECT_NEAR(cs.inter[0](i, j2, q), v, 1e-10);
      }
}

TEST(Model, ZeroThetaGivesZeroSurfaces) {
  SimFit f = simulated_fit(2, TermSet{{1}, {{1, 1}}});
  f.model.pls.theta.setZero();
  const CoefficientSurfaces cs = reconstruct_surfaces(f.model, Grid::uniform(5), Grid::uniform(5), Grid::uniform(5));
  EXPECT_EQ(cs.main[0].cwiseAbs().maxCoeff(), 0.0);
  for (int q = 0; q < 5; ++q) EXPECT_EQ(cs.inter[0].slice(q).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Model, RecoversKnownSurface) {
  // Y(t) = integral of X(s) s t ds, no noise
  SimConfig c;
  c.n_curves = 300;
  c.seed = 4;
  Rng rng(c.seed);
  const PredictorSet ps = make_predictors(c, rng);
  const Grid& g = ps.truth[0].grid;
  CoefficientTable table;
  table.terms = TermSet{{1}, {}};
  Eigen::MatrixXd beta(g.size(), g.size());
  for (Eigen::Index p = 0; p < g.size(); ++p)
    for (Eigen::Index q = 0; q < g.size(); ++q) beta(p, q) = g[p] * g[q];
  table.beta.push_back(beta);
  const SimResponse resp = generate_response(ps.truth, table, 0.0, rng);
  const FittedModel m = fit_model(resp.signal, {ps.truth[0]}, table.terms, ModelSpec{10, 10, 4, 10});
  const CoefficientSurfaces cs = reconstruct_surfaces(m, g, g, g);
  EXPECT_LT((cs.main[0] - beta).norm() / beta.norm(), 0.1);
}

TEST(Model, DesignMismatch) {
  const SimFit f = simulated_fit(2, TermSet{{1}, {}});
  try {
    predict_from_design(f.model, Eigen::MatrixXd::Zero(1, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DesignMismatch);
  }
}
