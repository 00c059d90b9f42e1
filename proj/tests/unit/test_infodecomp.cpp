#include "msvarfi/error.hpp"
#include "msvarfi/infodecomp.hpp"
#include "msvarfi/simulate.hpp"
#include "msvarfi/state_space.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

using namespace msvarfi;

namespace {

IssModel scale_one(const VarModel& var) { return varma_to_iss(var, fir_lowpass(48, 0.5)); }

VarModel bivariate_example() {
  VarModel v;
  Matrix b(2, 2);
  b << 0.5, 0.4, 0.0, 0.5;
  v.coeffs = {b};
  v.sigma = Matrix::Identity(2, 2);
  return v;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(TransferEntropy, UncoupledModelIsZero) {
  BenchmarkParams p;
  p.a_sr = p.a_hr = p.a_sh = p.a_hs = 0.0;
  const auto iss = scale_one(truncate_to_var(benchmark_var(p), 50));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (i != j) EXPECT_NEAR(transfer_entropy(iss, i, j), 0.0, 1e-10);
    }
  }
}

TEST(TransferEntropy, BivariateMatchesRegressionOracle) {
  const auto var = bivariate_example();
  const auto iss = scale_one(var);
  const double te = transfer_entropy(iss, 1, 0);
  const Matrix x = simulate_var(var, 1000000, 61, 1000);
  const double own = oracle::regression_residual_variance(x, {0}, 0, 50);
  const double both = oracle::regression_residual_variance(x, {0, 1}, 0, 50);
  EXPECT_NEAR(te, 0.5 * std::log(own / both), 1e-3);
  EXPECT_NEAR(transfer_entropy(iss, 0, 1), 0.0, 1e-10);
}

TEST(TransferEntropy, SameChannelRejected) {
  const auto iss = scale_one(bivariate_example());
  EXPECT_THROW(transfer_entropy(iss, 1, 1), Error);
}

TEST(JointTe, UncoupledModelIsZero) {
  BenchmarkParams p;
  p.a_sr = p.a_hr = p.a_sh = p.a_hs = 0.0;
  const auto iss = scale_one(truncate_to_var(benchmark_var(p), 50));
  EXPECT_NEAR(joint_te(iss, kChannelS, kChannelR, kChannelH), 0.0, 1e-10);
}

TEST(JointTe, AtLeastEachIndividualTe) {
  const auto iss = scale_one(truncate_to_var(benchmark_var(BenchmarkParams{}), 50));
  const double joint = joint_te(iss, kChannelS, kChannelR, kChannelH);
  EXPECT_GE(joint, transfer_entropy(iss, kChannelS, kChannelH) - 1e-10);
  EXPECT_GE(joint, transfer_entropy(iss, kChannelR, kChannelH) - 1e-10);
}

TEST(JointTe, AutonomousTargetReceivesNothing) {
  BenchmarkParams p;
  p.a_hs = p.a_hr = p.a_sh = 0.0;
  const auto iss = scale_one(truncate_to_var(benchmark_var(p), 50));
  EXPECT_NEAR(joint_te(iss, kChannelS, kChannelR, kChannelH), 0.0, 1e-10);
  EXPECT_GT(transfer_entropy(iss, kChannelR, kChannelS), 0.01);
}

TEST(IidDecompose, Arithmetic) {
  EXPECT_NEAR(iid_decompose(0.3, 0.1, 0.5), 0.1, 1e-15);
  EXPECT_NEAR(iid_decompose(0.3, 0.2, 0.35), -0.15, 1e-15);
  EXPECT_EQ(iid_decompose(0.0, 0.0, 0.0), 0.0);
}

TEST(PidMmi, Examples) {
  auto a = pid_mmi(0.3, 0.1, 0.5);
  EXPECT_NEAR(a.unique_i, 0.2, 1e-15);
  EXPECT_EQ(a.unique_k, 0.0);
  EXPECT_NEAR(a.redundancy, 0.1, 1e-15);
  EXPECT_NEAR(a.synergy, 0.2, 1e-15);

  a = pid_mmi(0.2, 0.2, 0.2);
  EXPECT_EQ(a.unique_i, 0.0);
  EXPECT_EQ(a.unique_k, 0.0);
  EXPECT_NEAR(a.redundancy, 0.2, 1e-15);
  EXPECT_NEAR(a.synergy, 0.0, 1e-15);

  a = pid_mmi(0.3, 0.2, 0.35);
  EXPECT_NEAR(a.redundancy, 0.2, 1e-15);
  EXPECT_NEAR(a.unique_i, 0.1, 1e-15);
  EXPECT_EQ(a.unique_k, 0.0);
  EXPECT_NEAR(a.synergy, 0.05, 1e-15);
}

TEST(PidMmi, InconsistentInputsCarryValues) {
  try {
    pid_mmi(0.5, 0.1, 0.3);
    FAIL();
  } catch (const InconsistentMeasures& e) {
    EXPECT_EQ(e.code(), Errc::inconsistent_measures);
    EXPECT_EQ(e.te_i, 0.5);
    EXPECT_EQ(e.te_k, 0.1);
    EXPECT_EQ(e.te_joint, 0.3);
  }
}

TEST(PidMmi, RoundingSizedDeficitIsClamped) {
  const auto a = pid_mmi(0.3, 0.1, 0.3 - 5e-13);
  EXPECT_GE(a.synergy, 0.0);
  EXPECT_LE(a.synergy, 1e-12);
}

TEST(DecomposeMultiscale, UncoupledModelIsZeroEverywhere) {
  BenchmarkParams p;
  p.a_sr = p.a_hr = p.a_sh = p.a_hs = 0.0;
  p.d_r = 0.1, p.d_s = 0.25, p.d_h = 0.45;
  const auto prof = decompose_multiscale(benchmark_var(p), kChannelH, kChannelS, kChannelR);
  ASSERT_EQ(prof.measures.size(), 12u);
  for (const auto& m : prof.measures) {
    for (double v : {m.te_i, m.te_k, m.te_joint, m.interaction, m.redundancy, m.synergy, m.unique_i, m.unique_k}) {
      EXPECT_NEAR(v, 0.0, 1e-10) << "tau " << m.tau;
    }
  }
}

TEST(DecomposeMultiscale, ScaleOneEqualsDirectVarComputation) {
  const auto model = benchmark_var(BenchmarkParams{});
  DecomposeConfig cfg;
  cfg.scales = {1};
  const auto prof = decompose_multiscale(model, kChannelH, kChannelS, kChannelR, cfg);

  // Population prediction errors straight from the VAR(2) autocovariances.
  VarModel var{model.ar, model.sigma};
  const auto acov = oracle::var_autocov(var, 401);
  const double own = oracle::prediction_error_variance(acov, {2}, 2, 400);
  const double with_s = oracle::prediction_error_variance(acov, {1, 2}, 2, 400);
  const double with_r = oracle::prediction_error_variance(acov, {0, 2}, 2, 400);
  const auto& m = prof.measures[0];
  EXPECT_NEAR(m.te_i, 0.5 * std::log(own / with_s), 1e-10);
  EXPECT_NEAR(m.te_k, 0.5 * std::log(own / with_r), 1e-10);
  EXPECT_NEAR(m.te_joint, 0.5 * std::log(own / model.sigma(2, 2)), 1e-10);
}

TEST(DecomposeMultiscale, ScaleOrderAndProvenance) {
  BenchmarkParams p;
  p.d_r = 0.1, p.d_s = 0.25, p.d_h = 0.45;
  const auto model = benchmark_var(p);
  DecomposeConfig cfg;
  cfg.scales = {1, 3, 7};
  const auto prof = decompose_multiscale(model, kChannelH, kChannelS, kChannelR, cfg);
  EXPECT_EQ(prof.target, "H");
  EXPECT_EQ(prof.source_i, "S");
  EXPECT_EQ(prof.source_k, "R");
  EXPECT_EQ(prof.scales, cfg.scales);
  ASSERT_EQ(prof.measures.size(), 3u);
  for (std::size_t s = 0; s < 3; ++s) EXPECT_EQ(prof.measures[s].tau, cfg.scales[s]);
  EXPECT_EQ(prof.model_hash, fingerprint(model));
  EXPECT_EQ(prof.q, 50u);
  EXPECT_EQ(prof.r, 48u);
}

TEST(DecomposeMultiscale, InvalidScalesRejected) {
  const auto model = benchmark_var(BenchmarkParams{});
  DecomposeConfig cfg;
  for (const auto& scales : std::vector<std::vector<std::size_t>>{{}, {0, 1}, {2, 2}, {3, 1}}) {
    cfg.scales = scales;
    EXPECT_THROW(decompose_multiscale(model, kChannelH, kChannelS, kChannelR, cfg), Error);
  }
}

TEST(DecomposeMultiscale, FailingScaleIsNamed) {
  BenchmarkParams p;
  p.d_r = 0.1, p.d_s = 0.25, p.d_h = 0.45;
  DecomposeConfig cfg;
  cfg.scales = {6};
  cfg.dare.max_iterations = 3;
  try {
    decompose_multiscale(benchmark_var(p), kChannelH, kChannelS, kChannelR, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::riccati_divergence);
    EXPECT_NE(std::string(e.what()).find("tau=6"), std::string::npos) << e.what();
  }
}

TEST(DecomposeMultiscale, SourceExchangeSymmetry) {
  BenchmarkParams p;
  p.d_r = 0.1, p.d_s = 0.25, p.d_h = 0.45;
  const auto model = benchmark_var(p);
  DecomposeConfig cfg;
  cfg.scales = {1, 2, 5, 9};
  const auto a = decompose_multiscale(model, kChannelH, kChannelS, kChannelR, cfg);
  const auto b = decompose_multiscale(model, kChannelH, kChannelR, kChannelS, cfg);
  for (std::size_t s = 0; s < cfg.scales.size(); ++s) {
    const auto& x = a.measures[s];
    const auto& y = b.measures[s];
    EXPECT_EQ(x.te_i, y.te_k);
    EXPECT_EQ(x.te_k, y.te_i);
    EXPECT_EQ(x.unique_i, y.unique_k);
    EXPECT_EQ(x.unique_k, y.unique_i);
    EXPECT_EQ(x.te_joint, y.te_joint);
    EXPECT_EQ(x.redundancy, y.redundancy);
    EXPECT_EQ(x.synergy, y.synergy);
    EXPECT_EQ(x.interaction, y.interaction);
  }
}

TEST(DecomposeMultiscale, Deterministic) {
  BenchmarkParams p;
  p.d_r = 0.2, p.d_s = 0.3, p.d_h = 0.4;
  const auto model = benchmark_var(p);
  DecomposeConfig cfg;
  cfg.scales = {1, 4, 11};
  const auto a = decompose_multiscale(model, kChannelH, kChannelS, kChannelR, cfg);
  const auto b = decompose_multiscale(model, kChannelH, kChannelS, kChannelR, cfg);
  for (std::size_t s = 0; s < cfg.scales.size(); ++s) {
    EXPECT_TRUE(bit_equal(a.measures[s].te_i, b.measures[s].te_i));
    EXPECT_TRUE(bit_equal(a.measures[s].te_k, b.measures[s].te_k));
    EXPECT_TRUE(bit_equal(a.measures[s].te_joint, b.measures[s].te_joint));
  }
}

TEST(DecomposeMultiscale, AgreesWithRegressionOnSimulatedData) {
  // Small instance of the definitional check: a bivariate-coupled trivariate VAR.
  VarModel v;
  Matrix b(3, 3);
  b << 0.5, 0.0, 0.0,
       0.3, 0.4, 0.0,
       0.2, 0.3, 0.3;
  v.coeffs = {b};
  v.sigma = Matrix::Identity(3, 3);
  VarfiModel model;
  model.ar = v.coeffs;
  model.d = Vector::Zero(3);
  model.sigma = v.sigma;
  DecomposeConfig cfg;
  cfg.scales = {1};
  const auto m = decompose_multiscale(model, 2, 1, 0, cfg).measures[0];
  const Matrix x = simulate_var(v, 1000000, 71, 1000);
  const double own = oracle::regression_residual_variance(x, {2}, 2, 30);
  EXPECT_NEAR(m.te_i, 0.5 * std::log(own / oracle::regression_residual_variance(x, {1, 2}, 2, 30)), 1e-2);
  EXPECT_NEAR(m.te_k, 0.5 * std::log(own / oracle::regression_residual_variance(x, {0, 2}, 2, 30)), 1e-2);
  EXPECT_NEAR(m.te_joint, 0.5 * std::log(own / oracle::regression_residual_variance(x, {0, 1, 2}, 2, 30)), 1e-2);
}
