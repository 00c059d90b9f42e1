#include "msvarfi/simulate.hpp"

#include "msvarfi/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace msvarfi {

VarfiModel benchmark_var(const BenchmarkParams& bp) {
  const auto self1 = [](double rho, double f) { return 2.0 * rho * std::cos(2.0 * std::numbers::pi * f); };
  Matrix a1 = Matrix::Zero(3, 3);
  Matrix a2 = Matrix::Zero(3, 3);
  a1(kChannelR, kChannelR) = self1(bp.rho_r, bp.f_r);
  a1(kChannelS, kChannelS) = self1(bp.rho_s, bp.f_s);
  a1(kChannelH, kChannelH) = self1(bp.rho_h, bp.f_h);
  a2(kChannelR, kChannelR) = -bp.rho_r * bp.rho_r;
  a2(kChannelS, kChannelS) = -bp.rho_s * bp.rho_s;
  a2(kChannelH, kChannelH) = -bp.rho_h * bp.rho_h;
  a1(kChannelS, kChannelR) = bp.a_sr;
  a1(kChannelH, kChannelR) = bp.a_hr;
  a1(kChannelH, kChannelS) = bp.a_hs;
  a2(kChannelS, kChannelH) = bp.a_sh;

  VarfiModel model;
  model.ar = {a1, a2};
  model.d = Vector(3);
  model.d << bp.d_r, bp.d_s, bp.d_h;
  model.sigma = Matrix::Identity(3, 3);
  model.labels = {"R", "S", "H"};
  return model;
}

namespace {

void require_stable(double radius) {
  if (radius >= kStabilityThreshold) {
    std::ostringstream os;
    os << "cannot simulate an unstable model (spectral radius " << radius << ")";
    throw Error(Errc::stability, os.str());
  }
}

// Largest root modulus of the truncated fractional polynomial of one channel.
// For d >= 0 the tail coefficients are nonpositive and sum to less than one
// in magnitude, so no root can lie in the closed unit disc.
double fractional_radius(double d, std::size_t q) {
  if (d >= 0.0 || q == 0) return 0.0;
  const auto g = fracdiff_coeffs(d, q);
  std::vector<Matrix> coeffs;
  for (std::size_t k = 1; k <= q; ++k) coeffs.push_back(Matrix::Constant(1, 1, -g[k]));
  return spectral_radius(companion(coeffs));
}

Matrix run_recursion(const VarModel& var, std::size_t samples, std::uint64_t seed, std::size_t burn_in) {
  const Eigen::Index M = var.sigma.rows();
  const auto m = static_cast<Eigen::Index>(var.order());
  const auto total = static_cast<Eigen::Index>(samples + burn_in);
  const Matrix chol = var.sigma.llt().matrixL();

  // Coefficients side by side, oldest lag first, so each step is one
  // matrix-vector product over the contiguous history [x_{n-m} .. x_{n-1}].
  Matrix stacked(M, M * m);
  for (Eigen::Index k = 1; k <= m; ++k) {
    stacked.middleCols((m - k) * M, M) = var.coeffs[static_cast<std::size_t>(k - 1)];
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Column n of `path` holds x_{n - m}; the first m columns are zero history.
  Matrix path = Matrix::Zero(M, total + m);
  Vector z(M);
  for (Eigen::Index n = 0; n < total; ++n) {
    for (Eigen::Index c = 0; c < M; ++c) z(c) = normal(rng);
    Vector x = chol * z;
    if (m > 0) x.noalias() += stacked * Eigen::Map<const Vector>(path.col(n).data(), M * m);
    path.col(n + m) = x;
  }
  return path.rightCols(static_cast<Eigen::Index>(samples));
}

}  // namespace

Matrix simulate_var(const VarModel& var, std::size_t samples, std::uint64_t seed, std::size_t burn_in) {
  validate(var);
  require_stable(check_stationarity(var).spectral_radius);
  return run_recursion(var, samples, seed, burn_in);
}

TimeSeriesSet simulate_realization(const VarfiModel& model, std::size_t samples, std::uint64_t seed,
                                   std::size_t q, std::size_t burn_in) {
  validate(model);
  // det of A(z) diag(D(z)) factors, so the truncated VAR is stable exactly
  // when the short-term part and every channel polynomial are.
  double radius = check_stationarity(model).spectral_radius;
  for (Eigen::Index c = 0; c < model.d.size(); ++c) radius = std::max(radius, fractional_radius(model.d(c), q));
  require_stable(radius);
  TimeSeriesSet ts;
  ts.data = run_recursion(truncate_to_var(model, q), samples, seed, burn_in);
  ts.labels = model.labels;
  if (ts.labels.empty()) {
    for (std::size_t c = 0; c < model.channels(); ++c) ts.labels.push_back("X" + std::to_string(c + 1));
  }
  ts.meta.source = "simulated";
  ts.meta.seed = seed;
  ts.meta.generator = kGeneratorName;
  return ts;
}

SweepResult sweep_experiment(Experiment which, const SweepConfig& config) {
  if (config.points < 2) throw Error(Errc::argument, "a sweep needs at least 2 points");
  if (!(config.d_max > 0.0 && config.d_max < 1.0)) {
    throw Error(Errc::argument, "sweep upper bound must lie in (0, 1)");
  }
  SweepResult out;
  out.experiment = which;
  out.swept = which == Experiment::source_memory ? "d_s" : "d_h";
  for (std::size_t k = 0; k < config.points; ++k) {
    out.values.push_back(config.d_max * static_cast<double>(k) / static_cast<double>(config.points - 1));
  }

  for (double value : out.values) {
    BenchmarkParams params = config.base;
    params.d_r = 0.1;
    if (which == Experiment::source_memory) {
      params.d_s = value;
      params.d_h = 0.45;
    } else {
      params.d_s = 0.25;
      params.d_h = value;
    }
    VarfiModel model = benchmark_var(params);
    out.profiles.push_back(decompose_multiscale(model, kChannelH, kChannelS, kChannelR, config.decompose));
    out.models.push_back(std::move(model));
  }
  return out;
}

}  // namespace msvarfi
