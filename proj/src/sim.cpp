#include "fofpls/sim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fofpls/error.hpp"

namespace fofpls {

namespace {
constexpr int kNN = 312;
constexpr int kMM = 156;
constexpr std::uint64_t kMatrixA = 0xB5026F5AA96619E9ULL;
constexpr std::uint64_t kUpper = 0xFFFFFFFF80000000ULL;
constexpr std::uint64_t kLower = 0x7FFFFFFFULL;

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace

// MT19937-64 (Matsumoto & Nishimura reference constants).
Rng::Rng(std::uint64_t seed) {
  state_[0] = seed;
  for (int i = 1; i < kNN; ++i)
    state_[i] = 6364136223846793005ULL * (state_[i - 1] ^ (state_[i - 1] >> 62)) + static_cast<std::uint64_t>(i);
  index_ = kNN;
}

std::uint64_t Rng::next_u64() {
  if (index_ >= kNN) {
    for (int i = 0; i < kNN; ++i) {
      const std::uint64_t x = (state_[i] & kUpper) | (state_[(i + 1) % kNN] & kLower);
      std::uint64_t xa = x >> 1;
      if (x & 1ULL) xa ^= kMatrixA;
      state_[i] = state_[(i + kMM) % kNN] ^ xa;
    }
    index_ = 0;
  }
  std::uint64_t x = state_[index_++];
  x ^= (x >> 29) & 0x5555555555555555ULL;
  x ^= (x << 17) & 0x71D67FFFEDA60000ULL;
  x ^= (x << 37) & 0xFFF7EEE000000000ULL;
  x ^= (x >> 43);
  return x;
}

double Rng::uniform() {
  // (k + 0.5) / 2^53 keeps the value strictly inside (0,1)
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Eigen::MatrixXd Rng::normal_matrix(Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal();
  return out;
}

std::vector<int> Rng::permutation(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
  }
  return p;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t x = master ^ (0xD1B54A32D192ED03ULL * (stream + 1));
  splitmix64(x);
  return splitmix64(x);
}

void SimConfig::validate() const {
  if (setting != 1 && setting != 2) throw Error(ErrorKind::UnknownSetting, "setting must be 1 or 2, got " + std::to_string(setting));
  if (lag < 0) throw Error(ErrorKind::InvalidConfiguration, "lag must be non-negative");
  if (n_curves < 1) throw Error(ErrorKind::InvalidConfiguration, "n_curves must be at least 1");
  if (grid_len < 2) throw Error(ErrorKind::InvalidConfiguration, "grid_len must be at least 2");
  if (noise_sd_eps < 0.0 || noise_sd_u < 0.0) throw Error(ErrorKind::InvalidConfiguration, "noise sds must be non-negative");
}

// ---------------------------------------------------------------------------

GpSampler::GpSampler(const Grid& grid, double jitter) {
  const auto& s = grid.points();
  const Eigen::Index l = s.size();
  cov_.resize(l, l);
  for (Eigen::Index p = 0; p < l; ++p)
    for (Eigen::Index q = 0; q < l; ++q) cov_(p, q) = std::exp(-100.0 * (s[p] - s[q]) * (s[p] - s[q]));
  Eigen::MatrixXd jittered = cov_;
  jittered.diagonal().array() += jitter;
  // The squared-exponential kernel is numerically rank deficient on fine grids,
  // so factor through the eigendecomposition rather than Cholesky.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jittered);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NumericalFailure, "covariance eigendecomposition failed");
  const double max_ev = es.eigenvalues().maxCoeff();
  if (es.eigenvalues().minCoeff() < -1e-8 * max_ev)
    throw Error(ErrorKind::NumericalFailure, "covariance is not positive semidefinite after jitter");
  factor_ = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Eigen::MatrixXd GpSampler::sample(int n, Rng& rng) const {
  return rng.normal_matrix(n, factor_.cols()) * factor_.transpose();
}

Eigen::MatrixXd sample_gp(int n, const Grid& grid, Rng& rng) { return GpSampler(grid).sample(n, rng); }

PredictorSet make_predictors(const SimConfig& config, Rng& rng) {
  config.validate();
  const Grid grid = Grid::uniform(static_cast<std::size_t>(config.grid_len));
  const GpSampler gp(grid);
  constexpr int kPredictors = 5;
  std::vector<Eigen::MatrixXd> v;
  for (int i = 0; i < kPredictors + config.lag; ++i) v.push_back(gp.sample(config.n_curves, rng));

  PredictorSet out;
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.lag + 1));
  for (int m = 0; m < kPredictors; ++m) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(config.n_curves, config.grid_len);
    for (int i = 0; i <= config.lag; ++i) x += v[static_cast<std::size_t>(m + i)];
    x *= scale;
    out.truth.push_back({grid, std::move(x), "x" + std::to_string(m + 1)});
  }
  for (int m = 0; m < kPredictors; ++m) {
    const auto& t = out.truth[static_cast<std::size_t>(m)];
    out.noisy.push_back({grid, t.values + config.noise_sd_u * rng.normal_matrix(config.n_curves, config.grid_len), t.label});
  }
  return out;
}

// ---------------------------------------------------------------------------

TermSet true_terms(int setting) {
  switch (setting) {
    case 1: return TermSet{{2, 3, 4, 5}, {{2, 2}, {3, 4}, {4, 5}}};
    case 2: return TermSet{{1, 2, 4, 5}, {{1, 1}, {1, 2}, {1, 5}, {2, 4}, {4, 5}, {5, 5}}};
    default: throw Error(ErrorKind::UnknownSetting, "setting must be 1 or 2, got " + std::to_string(setting));
  }
}

double beta_value(int setting, int m, double s, double t) {
  using std::cos, std::exp, std::log, std::sin, std::sqrt;
  constexpr double pi = std::numbers::pi;
  if (setting == 1) {
    switch (m) {
      case 2: return exp(-3.0 * (s - 1.0) * (s - 1.0) - 5.0 * (t - 0.5) * (t - 0.5));
      case 3:
        return exp(-5.0 * (s - 0.5) * (s - 0.5) - 5.0 * (t - 0.5) * (t - 0.5)) +
               8.0 * exp(-5.0 * (s - 1.5) * (s - 1.5) - 5.0 * (t - 0.5) * (t - 0.5));
      case 4: return sin(1.5 * pi * s) * sin(pi * t);
      case 5: return sqrt(s * t);
      default: break;
    }
  } else if (setting == 2) {
    switch (m) {
      case 1: return (s - 2.0 * t) * (s - 2.0 * t) / 3.0;
      case 2: return 2.0 * log(1.0 + s) * log(1.0 + s) * sin(2.0 * pi * (t - 0.5));
      case 4: return (cos(1.0 - s) + sqrt(t)) / 3.0;
      case 5: return (1.0 + s) * (1.0 + s) / (3.0 * (1.0 + t * t));
      default: break;
    }
  } else {
    throw Error(ErrorKind::UnknownSetting, "setting must be 1 or 2");
  }
  return 0.0;
}

double gamma_value(int setting, int m, int n, double s, double r, double t) {
  using std::cos, std::exp, std::log, std::sin, std::sqrt;
  constexpr double pi = std::numbers::pi;
  const int key = 10 * m + n;
  if (setting == 1) {
    switch (key) {
      case 22: return 5.0 * s * r * sqrt(t);
      case 34: return 5.0 * cos(pi * s) * sin(2.0 * pi * r) * cos(2.0 * pi * t);
      case 45: return 0.5 * exp(s + 2.0 * r - t);
      default: break;
    }
  } else if (setting == 2) {
    switch (key) {
      case 11: return 2.0 * (s + r) * t * t;
      case 12: return 0.01 * (s * s - r * r * r + t);
      case 15: return 0.01 * exp(2.0 * s - r + 3.0 * t);
      case 24: return 0.01 * (2.0 * s - r + 3.0 * t);
      case 45: return 0.01 * log(1.0 + 2.0 * s) / (1.0 + t);
      case 55: return cos(pi * (s + r)) + 3.0 * sqrt(t);
      default: break;
    }
  } else {
    throw Error(ErrorKind::UnknownSetting, "setting must be 1 or 2");
  }
  return 0.0;
}

CoefficientTable coefficient_table(int setting, const Grid& grid) {
  CoefficientTable table;
  table.terms = true_terms(setting);
  const auto& g = grid.points();
  const Eigen::Index l = g.size();
  for (int m : table.terms.main) {
    Eigen::MatrixXd b(l, l);
    for (Eigen::Index p = 0; p < l; ++p)
      for (Eigen::Index q = 0; q < l; ++q) b(p, q) = beta_value(setting, m, g[p], g[q]);
    table.beta.push_back(std::move(b));
  }
  for (auto [m, n] : table.terms.inter) {
    Eigen::MatrixXd c(l * l, l);
    for (Eigen::Index p = 0; p < l; ++p)
      for (Eigen::Index pp = 0; pp < l; ++pp)
        for (Eigen::Index q = 0; q < l; ++q) c(p * l + pp, q) = gamma_value(setting, m, n, g[p], g[pp], g[q]);
    table.gamma.push_back(std::move(c));
  }
  return table;
}

SimResponse generate_response(const std::vector<FunctionalSample>& predictors_true, const CoefficientTable& table,
                              double noise_sd, Rng& rng) {
  if (predictors_true.empty()) throw Error(ErrorKind::InvalidInput, "no predictors supplied");
  table.terms.validate(static_cast<int>(predictors_true.size()));
  const Grid& grid = predictors_true.front().grid;
  const Eigen::VectorXd w = grid.trapezoid_weights();
  const Eigen::Index n = predictors_true.front().num_curves();
  const Eigen::Index l = grid.size();

  std::vector<Eigen::MatrixXd> weighted;
  for (const auto& p : predictors_true) weighted.push_back(p.values * w.asDiagonal());

  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, l);
  for (std::size_t i = 0; i < table.terms.main.size(); ++i)
    y.noalias() += weighted[static_cast<std::size_t>(table.terms.main[i] - 1)] * table.beta[i];
  for (std::size_t i = 0; i < table.terms.inter.size(); ++i) {
    const auto [m, k] = table.terms.inter[i];
    const Eigen::MatrixXd products = outer_rows(weighted[static_cast<std::size_t>(m - 1)],
                                                weighted[static_cast<std::size_t>(k - 1)]);
    y.noalias() += products * table.gamma[i];
  }

  SimResponse out;
  out.signal = {grid, y, "y"};
  out.observed = {grid, y + noise_sd * rng.normal_matrix(n, l), "y"};
  return out;
}

SimResponse generate_response(const std::vector<FunctionalSample>& predictors_true, const SimConfig& config, Rng& rng) {
  config.validate();
  return generate_response(predictors_true, coefficient_table(config.setting, predictors_true.front().grid),
                           config.noise_sd_eps, rng);
}

SimDataset simulate(const SimConfig& config) {
  config.validate();
  Rng rng(config.seed);
  SimDataset data;
  data.config = config;
  data.predictors = make_predictors(config, rng);
  data.response = generate_response(data.predictors.truth, config, rng);
  return data;
}

}  // namespace fofpls
