#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "fofpls/design.hpp"
#include "fofpls/grid.hpp"

namespace fofpls {

/// 64-bit Mersenne Twister with a fixed normal transform, so streams are
/// reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on (0,1) with 53 random bits.
  double uniform();
  /// Standard normal via the Box-Muller transform.
  double normal();
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);
  /// Fisher-Yates permutation of 0..n-1.
  std::vector<int> permutation(int n);

 private:
  std::uint64_t state_[312];
  int index_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent stream seed from a master seed and a stream index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

struct SimConfig {
  int setting = 1;
  int lag = 2;
  int n_curves = 300;
  int grid_len = 100;
  double noise_sd_eps = 2.0;
  double noise_sd_u = 2.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Draws zero-mean Gaussian-process curves with covariance exp(-100 (s - s')^2).
class GpSampler {
 public:
  explicit GpSampler(const Grid& grid, double jitter = 1e-10);
  Eigen::MatrixXd sample(int n, Rng& rng) const;
  const Eigen::MatrixXd& covariance() const noexcept { return cov_; }

 private:
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd factor_;  // factor * factor^T = cov + jitter I
};

Eigen::MatrixXd sample_gp(int n, const Grid& grid, Rng& rng);

struct PredictorSet {
  std::vector<FunctionalSample> truth;
  std::vector<FunctionalSample> noisy;
};

/// Five predictors X_m = sum_{i=0..lag} V_{m+i} / sqrt(lag+1) plus noisy copies.
PredictorSet make_predictors(const SimConfig& config, Rng& rng);

/// Index sets of the data-generating model for a setting (1 or 2).
TermSet true_terms(int setting);

/// Coefficient functions of a setting sampled on the grid.
struct CoefficientTable {
  TermSet terms;
  std::vector<Eigen::MatrixXd> beta;   // per main term: beta(s_p, t_q), L x L
  std::vector<Eigen::MatrixXd> gamma;  // per interaction: rows p*L + p', columns q
};

CoefficientTable coefficient_table(int setting, const Grid& grid);

/// Evaluates the coefficient functions pointwise; used for tests and surface comparison.
double beta_value(int setting, int m, double s, double t);
double gamma_value(int setting, int m, int n, double s, double r, double t);

struct SimResponse {
  FunctionalSample signal;    // noise-free response
  FunctionalSample observed;  // signal plus N(0, eps^2) at every grid point
};

SimResponse generate_response(const std::vector<FunctionalSample>& predictors_true, const SimConfig& config, Rng& rng);
SimResponse generate_response(const std::vector<FunctionalSample>& predictors_true, const CoefficientTable& table,
                              double noise_sd, Rng& rng);

struct SimDataset {
  SimConfig config;
  PredictorSet predictors;
  SimResponse response;
};

/// One complete draw with the stream seeded from config.seed.
SimDataset simulate(const SimConfig& config);

}  // namespace fofpls
