#include "msvarfi/error.hpp"
#include "msvarfi/filter.hpp"
#include "msvarfi/simulate.hpp"
#include "msvarfi/state_space.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace msvarfi;
using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

namespace {

VarModel scalar_ar1(double a) {
  VarModel v;
  v.coeffs = {Matrix::Constant(1, 1, a)};
  v.sigma = Matrix::Identity(1, 1);
  return v;
}

VarModel benchmark_truncated(double d_r, double d_s, double d_h) {
  BenchmarkParams p;
  p.d_r = d_r, p.d_s = d_s, p.d_h = d_h;
  return truncate_to_var(benchmark_var(p), 50);
}

FilterSpec bypass() { return fir_lowpass(48, 0.5); }

// Stationary state covariance and output autocovariances of an ISS.
std::vector<Matrix> iss_autocov(const IssModel& iss, std::size_t max_lag) {
  Matrix P = iss.K * iss.V * iss.K.transpose();
  Matrix Ak = iss.A;
  for (int it = 0; it < 64; ++it) {
    P += Ak * P * Ak.transpose();
    Ak = Ak * Ak;
    if (Ak.cwiseAbs().maxCoeff() < 1e-300) break;
  }
  std::vector<Matrix> g;
  g.push_back(iss.C * P * iss.C.transpose() + iss.V);
  Matrix G = iss.A * P * iss.C.transpose() + iss.K * iss.V;  // E[Z_{n+1} X_n']
  for (std::size_t h = 1; h <= max_lag; ++h) {
    g.push_back(iss.C * G);
    G = iss.A * G;
  }
  return g;
}

CMatrix iss_density(const IssModel& iss, double f) {
  const auto n = static_cast<Eigen::Index>(iss.state_dim());
  const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * f);
  const CMatrix zI = z * CMatrix::Identity(n, n);
  const CMatrix H = iss.C.cast<cplx>() * (zI - iss.A.cast<cplx>()).partialPivLu().solve(iss.K.cast<cplx>()) +
                    CMatrix::Identity(iss.C.rows(), iss.C.rows());
  return H * iss.V.cast<cplx>() * H.adjoint();
}

CMatrix var_density(const VarModel& var, double f) {
  const Eigen::Index M = var.sigma.rows();
  CMatrix B = CMatrix::Identity(M, M);
  for (std::size_t k = 0; k < var.order(); ++k) {
    B -= std::polar(1.0, -2.0 * std::numbers::pi * f * static_cast<double>(k + 1)) * var.coeffs[k].cast<cplx>();
  }
  const CMatrix Bi = B.inverse();
  return Bi * var.sigma.cast<cplx>() * Bi.adjoint();
}

double closed_loop_radius(const IssModel& iss) { return spectral_radius(iss.A - iss.K * iss.C); }

}  // namespace

// ---------------------------------------------------------------- FIR design

TEST(FirLowpass, HalfCutoffIsBypass) {
  const auto f = fir_lowpass(48, 0.5);
  EXPECT_TRUE(f.is_bypass());
  EXPECT_EQ(f.order(), 0u);
  EXPECT_EQ(f.taps, std::vector<double>{1.0});
}

TEST(FirLowpass, UnitGainAndExactSymmetry) {
  const auto f = fir_lowpass(48, 0.25);
  ASSERT_EQ(f.taps.size(), 49u);
  double sum = 0.0;
  for (double v : f.taps) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-15);
  for (std::size_t k = 0; k <= 48; ++k) EXPECT_EQ(f.taps[k], f.taps[48 - k]) << k;
}

TEST(FirLowpass, StopbandAttenuationAtScaleTwelve) {
  const auto f = fir_lowpass(48, scale_cutoff(12));
  cplx h = 0.0;
  for (std::size_t k = 0; k < f.taps.size(); ++k) h += f.taps[k] * std::polar(1.0, -2.0 * std::numbers::pi * 0.4 * k);
  EXPECT_LT(20.0 * std::log10(std::abs(h)), -40.0);
  EXPECT_NEAR(std::abs(frequency_response(f, 0.4)), std::abs(h), 1e-15);
  // Everything past the transition band stays down as well.
  for (double fr = 0.1; fr <= 0.5; fr += 0.005) EXPECT_LT(std::abs(frequency_response(f, fr)), 0.01) << fr;
}

TEST(FirLowpass, SincZerosAreExact) {
  // cutoff 1/4 puts every other tap on a zero of the sinc.
  const auto f = fir_lowpass(48, 0.25);
  for (std::size_t k = 0; k <= 48; ++k) {
    if ((k % 2 == 0) && k != 24) EXPECT_EQ(f.taps[k], 0.0) << k;
  }
}

TEST(FirLowpass, InvalidArguments) {
  for (auto [r, fc] : std::vector<std::pair<std::size_t, double>>{{0, 0.2}, {47, 0.2}, {48, 0.0}, {48, 0.6}, {48, -0.1}}) {
    try {
      fir_lowpass(r, fc);
      ADD_FAILURE() << r << " " << fc;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::argument);
    }
  }
}

// ------------------------------------------------------------ VARMA to ISS

TEST(VarmaToIss, BypassIsCompanionForm) {
  const auto var = benchmark_truncated(0.1, 0.25, 0.45);
  const auto iss = varma_to_iss(var, bypass());
  const Eigen::Index M = 3, m = 52;
  ASSERT_EQ(iss.state_dim(), static_cast<std::size_t>(M * m));
  for (Eigen::Index k = 0; k < m; ++k) EXPECT_EQ(iss.C.middleCols(k * M, M), var.coeffs[static_cast<std::size_t>(k)]);
  EXPECT_EQ(iss.A, companion(var.coeffs));
  EXPECT_EQ(iss.V, var.sigma);
  Matrix K = Matrix::Zero(M * m, M);
  K.topRows(M).setIdentity();
  EXPECT_EQ(iss.K, K);
}

TEST(VarmaToIss, StateDimension) {
  VarModel v;
  v.coeffs = {Matrix::Identity(3, 3) * 0.3, Matrix::Identity(3, 3) * 0.1};
  v.sigma = Matrix::Identity(3, 3);
  FilterSpec f;
  f.cutoff = 0.25;
  f.taps = {0.6, 0.4};
  const auto iss = varma_to_iss(v, f);
  EXPECT_EQ(iss.state_dim(), 9u);
  EXPECT_NEAR(iss.V(0, 0), 0.36, 1e-15);
}

TEST(VarmaToIss, FilteredAutocovarianceMatchesOracles) {
  const auto var = scalar_ar1(0.5);
  FilterSpec f;
  f.cutoff = 0.25;
  f.taps = {0.5, 0.5};
  const auto iss = varma_to_iss(var, f);
  const auto model_acov = iss_autocov(iss, 3);

  // Closed form from the AR(1) autocovariance.
  const auto x_acov = oracle::var_autocov(var, 10);
  const auto exact = oracle::filtered_decimated_autocov(x_acov, f.taps, 1, 3);
  for (std::size_t h = 0; h <= 3; ++h) EXPECT_NEAR(model_acov[h](0, 0), exact[h](0, 0), 1e-12) << h;

  // Long simulation, filtered.
  const Matrix x = simulate_var(var, 1000000, 17, 1000);
  std::vector<double> xs(x.data(), x.data() + x.size());
  const auto y = oracle::convolve(xs, f.taps);
  const double g1 = oracle::sample_autocov(y, 1);
  EXPECT_NEAR(model_acov[1](0, 0), g1, 0.005 * std::abs(model_acov[1](0, 0)));
}

TEST(VarmaToIss, UnstableVarRejected) {
  try {
    varma_to_iss(scalar_ar1(1.2), bypass());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::stability);
  }
}

TEST(VarmaToIss, ZeroEdgeTapsAreDropped) {
  // tau = 2, 3, 4, 6, 8, 12 all divide r / 2 = 24, so the outermost taps vanish.
  for (std::size_t tau : {2, 3, 4, 6, 8, 12}) {
    const auto f = fir_lowpass(48, scale_cutoff(tau));
    EXPECT_EQ(f.taps.front(), 0.0) << tau;
    const auto iss = varma_to_iss(scalar_ar1(0.5), f);
    EXPECT_LT(iss.state_dim(), 49u) << tau;
    EXPECT_GT(iss.V(0, 0), 0.0);
  }
}

TEST(VarmaToIss, FilteredDensityIsShapedByFilter) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    auto model = oracle::random_model(rng, 1, 1 + static_cast<std::size_t>(trial % 3), 0.45);
    const auto var = truncate_to_var(model, 10);
    for (std::size_t tau : {2, 3, 5}) {
      const auto f = fir_lowpass(48, scale_cutoff(tau));
      const auto iss = varma_to_iss(var, f);
      for (double fr = 0.0; fr <= 0.5; fr += 0.01) {
        const double s_filtered = iss_density(iss, fr)(0, 0).real();
        const double s_raw = var_density(var, fr)(0, 0).real();
        const double gain = std::norm(frequency_response(f, fr));
        EXPECT_NEAR(s_filtered, gain * s_raw, 1e-8 * std::max(1.0, s_raw)) << "trial " << trial << " tau " << tau << " f " << fr;
      }
    }
  }
}

// -------------------------------------------------------------------- DARE

TEST(Dare, ExistingInnovationsFormIsFixedPointAtZero) {
  const auto iss = varma_to_iss(benchmark_truncated(0.1, 0.25, 0.45), bypass());
  const Matrix KV = iss.K * iss.V;
  const auto sol = dare_innovations(iss.A, iss.C, KV * iss.K.transpose(), iss.V, KV);
  EXPECT_LT(sol.P.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((sol.K - iss.K).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((sol.V - iss.V).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dare, ScalarMatchesQuadraticRoot) {
  struct Case { double a, c, q, rho, s; };
  for (const auto& t : {Case{0.5, 1.0, 1.0, 1.0, 0.0}, Case{0.9, 1.0, 0.3, 2.0, 0.0}, Case{-0.7, 1.0, 2.0, 0.5, 0.0},
                        Case{0.8, 0.6, 1.5, 1.0, 0.4}, Case{0.0, 1.0, 1.0, 1.0, 0.0}}) {
    const Matrix A = Matrix::Constant(1, 1, t.a), C = Matrix::Constant(1, 1, t.c);
    const auto sol = dare_innovations(A, C, Matrix::Constant(1, 1, t.q), Matrix::Constant(1, 1, t.rho),
                                      Matrix::Constant(1, 1, t.s));
    const double P = oracle::scalar_dare(t.a, t.c, t.q, t.rho, t.s);
    EXPECT_NEAR(sol.P(0, 0), P, 1e-10 * std::max(1.0, P)) << t.a;
    EXPECT_NEAR(sol.V(0, 0), t.c * t.c * P + t.rho, 1e-10);
    EXPECT_NEAR(sol.K(0, 0), (t.a * P * t.c + t.s) / (t.c * t.c * P + t.rho), 1e-10);
    EXPECT_LT(sol.residual, 1e-10);
  }
}

TEST(Dare, UnstableTransitionDiverges) {
  try {
    dare_innovations(Matrix::Constant(1, 1, 1.2), Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                     Matrix::Identity(1, 1), Matrix::Zero(1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::riccati_divergence);
  }
}

TEST(Dare, IterationCapReported) {
  DareOptions opts;
  opts.max_iterations = 2;
  const auto iss = varma_to_iss(benchmark_truncated(0.1, 0.25, 0.45), fir_lowpass(48, scale_cutoff(5)));
  try {
    downsample_iss(iss, 5, opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::riccati_divergence);
  }
}

TEST(Dare, IndefiniteObservationNoiseIsIllPosed) {
  try {
    dare_innovations(Matrix::Constant(1, 1, 0.5), Matrix::Zero(1, 1), Matrix::Identity(1, 1),
                     Matrix::Constant(1, 1, -1.0), Matrix::Zero(1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ill_posed_model);
  }
}

TEST(Dare, ResidualFunctionAgreesWithSolution) {
  const auto iss = varma_to_iss(benchmark_truncated(0.1, 0.25, 0.45), fir_lowpass(48, scale_cutoff(3)));
  const auto ds = downsample_iss(iss, 3);
  EXPECT_LT(closed_loop_radius(ds), 1.0);
  // A second pass from the downsampled innovations form is a fixed point.
  const Matrix KV = ds.K * ds.V;
  const Matrix P0 = Matrix::Zero(ds.A.rows(), ds.A.rows());
  EXPECT_LT(riccati_residual(ds.A, ds.C, KV * ds.K.transpose(), ds.V, KV, P0), 1e-10);
}

// ------------------------------------------------------------- downsampling

TEST(Downsample, ScaleOneIsIdentity) {
  const auto iss = varma_to_iss(benchmark_truncated(0.1, 0.25, 0.45), bypass());
  const auto ds = downsample_iss(iss, 1);
  EXPECT_LT((ds.K - iss.K).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((ds.V - iss.V).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(ds.A, iss.A);
  EXPECT_EQ(ds.C, iss.C);
}

TEST(Downsample, ScalarAutoregressionClosedForm) {
  const auto iss = varma_to_iss(scalar_ar1(0.5), bypass());
  const auto ds = downsample_iss(iss, 2);
  EXPECT_NEAR(ds.A(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(ds.V(0, 0), 1.25, 1e-10);
  // x_{2n} = 0.25 x_{2n-2} + e: the one-step predictor coefficient is C K.
  EXPECT_NEAR((ds.C * ds.K)(0, 0), 0.25, 1e-10);
  EXPECT_NEAR(closed_loop_radius(ds), 0.0, 1e-10);
}

TEST(Downsample, ZeroScaleRejected) {
  const auto iss = varma_to_iss(scalar_ar1(0.5), bypass());
  EXPECT_THROW(downsample_iss(iss, 0), Error);
}

TEST(Downsample, BenchmarkAutocovarianceMatchesOracles) {
  const std::size_t tau = 5;
  const auto var = benchmark_truncated(0.1, 0.25, 0.45);
  const auto f = fir_lowpass(48, scale_cutoff(tau));
  const auto ds = downsample_iss(varma_to_iss(var, f), tau);
  EXPECT_LT(closed_loop_radius(ds), 1.0);
  const auto model_acov = iss_autocov(ds, 4);

  // Exact: filter and decimate the VAR autocovariance sequence.
  const auto x_acov = oracle::var_autocov(var, 4 * tau + 48 + 1);
  const auto exact = oracle::filtered_decimated_autocov(x_acov, f.taps, tau, 4);
  for (std::size_t h = 0; h <= 4; ++h) {
    EXPECT_LT((model_acov[h] - exact[h]).cwiseAbs().maxCoeff(), 1e-8 * exact[0].cwiseAbs().maxCoeff()) << h;
  }

  // Simulated: filter, decimate and estimate.
  const Matrix x = simulate_var(var, 2000000, 23, 5000);
  const Eigen::Index n_out = (x.cols() - 48) / static_cast<Eigen::Index>(tau);
  Matrix y = Matrix::Zero(3, n_out);
  for (Eigen::Index n = 0; n < n_out; ++n) {
    const Eigen::Index t = 48 + n * static_cast<Eigen::Index>(tau);
    for (std::size_t a = 0; a < f.taps.size(); ++a) y.col(n) += f.taps[a] * x.col(t - static_cast<Eigen::Index>(a));
  }
  for (std::size_t h = 0; h <= 2; ++h) {
    const auto H = static_cast<Eigen::Index>(h);
    const Matrix sample = y.rightCols(n_out - H) * y.leftCols(n_out - H).transpose() / static_cast<double>(n_out);
    for (Eigen::Index r = 0; r < 3; ++r) {
      const double scale = std::sqrt(model_acov[0](r, r));
      for (Eigen::Index c = 0; c < 3; ++c) {
        const double tol = 0.01 * scale * std::sqrt(model_acov[0](c, c));
        EXPECT_NEAR(sample(r, c), model_acov[h](r, c), tol) << "lag " << h << " (" << r << "," << c << ")";
      }
    }
  }
}

// --------------------------------------------------------- partial variance

TEST(PartialVariance, FullSubsetIsInnovationVariance) {
  const auto iss = downsample_iss(varma_to_iss(benchmark_truncated(0.1, 0.25, 0.45), fir_lowpass(48, scale_cutoff(4))), 4);
  const std::vector<std::size_t> all = {0, 1, 2};
  for (std::size_t j = 0; j < 3; ++j) {
    const auto J = static_cast<Eigen::Index>(j);
    EXPECT_NEAR(partial_variance(iss, all, j), iss.V(J, J), 1e-10);
  }
}

TEST(PartialVariance, DecoupledChannelsUseOwnVariance) {
  BenchmarkParams p;
  p.a_sr = p.a_hr = p.a_sh = p.a_hs = 0.0;
  auto model = benchmark_var(p);
  model.sigma.diagonal() << 1.0, 2.0, 0.5;
  const auto iss = varma_to_iss(truncate_to_var(model, 50), bypass());
  for (std::size_t j = 0; j < 3; ++j) {
    const std::vector<std::size_t> own = {j};
    EXPECT_NEAR(partial_variance(iss, own, j), model.sigma(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)), 1e-10);
  }
}

TEST(PartialVariance, TargetOutsideSubsetRejected) {
  const auto iss = varma_to_iss(benchmark_truncated(0, 0, 0), bypass());
  const std::vector<std::size_t> sub = {0, 1};
  try {
    partial_variance(iss, sub, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::argument);
  }
}

TEST(PartialVariance, UnivariateMatchesRegressionOracle) {
  const auto var = benchmark_truncated(0, 0, 0);
  const auto iss = varma_to_iss(var, bypass());
  const std::vector<std::size_t> h = {kChannelH};
  const double pv = partial_variance(iss, h, kChannelH);
  const Matrix x = simulate_var(var, 1000000, 29, 2000);
  const double ref = oracle::regression_residual_variance(x, h, kChannelH, 50);
  EXPECT_NEAR(pv, ref, 0.01 * ref);
  // Population version of the same regression.
  const double pop = oracle::prediction_error_variance(oracle::var_autocov(var, 201), h, kChannelH, 200);
  EXPECT_NEAR(pv, pop, 1e-8);
}

TEST(PartialVariance, MatchesPopulationPredictionAcrossScales) {
  const auto var = benchmark_truncated(0.1, 0.25, 0.45);
  for (std::size_t tau : {2, 5}) {
    const auto f = fir_lowpass(48, scale_cutoff(tau));
    const auto ds = downsample_iss(varma_to_iss(var, f), tau);
    const std::size_t order = 300;
    const auto y_acov = oracle::filtered_decimated_autocov(oracle::var_autocov(var, (order + 1) * tau + 49), f.taps,
                                                           tau, order + 1);
    for (const auto& subset : std::vector<std::vector<std::size_t>>{{2}, {1, 2}, {0, 2}}) {
      const double pv = partial_variance(ds, subset, 2);
      const double ref = oracle::prediction_error_variance(y_acov, subset, 2, order);
      EXPECT_NEAR(pv, ref, 1e-6 * ref) << "tau " << tau << " subset size " << subset.size();
    }
  }
}

TEST(PartialVariance, LargerConditioningSetNeverHurts) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 15; ++trial) {
    const auto model = oracle::random_model(rng, 3, 2, 0.45);
    const auto var = truncate_to_var(model, 20);
    for (std::size_t tau : {1, 3}) {
      const auto ds = downsample_iss(varma_to_iss(var, fir_lowpass(48, scale_cutoff(tau))), tau);
      for (std::size_t j = 0; j < 3; ++j) {
        const std::size_t o1 = (j + 1) % 3, o2 = (j + 2) % 3;
        const double pj = partial_variance(ds, std::vector<std::size_t>{j}, j);
        const double pj1 = partial_variance(ds, std::vector<std::size_t>{j, o1}, j);
        const double pj2 = partial_variance(ds, std::vector<std::size_t>{o2, j}, j);
        const double pall = partial_variance(ds, std::vector<std::size_t>{0, 1, 2}, j);
        EXPECT_GT(pall, 0.0);
        EXPECT_GE(pj, pj1 - 1e-10);
        EXPECT_GE(pj, pj2 - 1e-10);
        EXPECT_GE(pj1, pall - 1e-10);
        EXPECT_GE(pj2, pall - 1e-10);
      }
    }
  }
}
