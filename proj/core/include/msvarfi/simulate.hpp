#pragma once

#include "msvarfi/infodecomp.hpp"
#include "msvarfi/model.hpp"
#include "msvarfi/timeseries.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace msvarfi {

/// Short-term structure of the three-channel cardiorespiratory benchmark.
/// Channel order is (R, S, H).
struct BenchmarkParams {
  double rho_r = 0.9, f_r = 0.25;
  double rho_s = 0.8, f_s = 0.1;
  double rho_h = 0.8, f_h = 0.1;
  double a_sr = 1.0;  ///< R_{n-1} -> S_n
  double a_hr = 1.0;  ///< R_{n-1} -> H_n
  double a_sh = 0.1;  ///< H_{n-2} -> S_n
  double a_hs = 0.4;  ///< S_{n-1} -> H_n
  double d_r = 0.0, d_s = 0.0, d_h = 0.0;
};

inline constexpr std::size_t kChannelR = 0;
inline constexpr std::size_t kChannelS = 1;
inline constexpr std::size_t kChannelH = 2;

/// VARFI(2, d) with unit innovation covariance.
VarfiModel benchmark_var(const BenchmarkParams& params);

/// Name of the RNG stream recorded in simulated metadata.
inline constexpr const char* kGeneratorName = "mt19937_64+std::normal_distribution";

/// Realization of the truncated VAR(p + q) recursion from zero history;
/// the first burn_in samples are discarded.
TimeSeriesSet simulate_realization(const VarfiModel& model, std::size_t samples, std::uint64_t seed,
                                   std::size_t q = 50, std::size_t burn_in = 10000);

/// Same recursion for an already finite VAR.
Matrix simulate_var(const VarModel& var, std::size_t samples, std::uint64_t seed,
                    std::size_t burn_in = 10000);

enum class Experiment { source_memory = 1, target_memory = 2 };

struct SweepConfig {
  std::size_t points = 20;
  double d_max = 0.7;
  DecomposeConfig decompose;
  BenchmarkParams base;  ///< short-term part; the fixed d values are set per experiment
};

struct SweepResult {
  Experiment experiment = Experiment::source_memory;
  std::string swept;                 ///< "d_s" or "d_h"
  std::vector<double> values;        ///< swept exponents, ascending
  std::vector<VarfiModel> models;
  std::vector<DecompositionProfile> profiles;
};

/// Experiment 1 fixes d_r = 0.1, d_h = 0.45 and sweeps d_s; experiment 2
/// fixes d_r = 0.1, d_s = 0.25 and sweeps d_h. Both over [0, d_max]
/// inclusive, target H, sources (S, R).
SweepResult sweep_experiment(Experiment which, const SweepConfig& config = {});

}  // namespace msvarfi
