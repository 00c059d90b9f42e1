#pragma once

#include "msvarfi/model.hpp"
#include "msvarfi/state_space.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace msvarfi {

/// Information measures (nats) from sources (i, k) to target j at one scale.
struct ScaleMeasures {
  std::size_t tau = 1;
  double te_i = 0.0;         ///< T_{i->j}
  double te_k = 0.0;         ///< T_{k->j}
  double te_joint = 0.0;     ///< T_{ik->j}
  double interaction = 0.0;  ///< I_{ik->j}, signed
  double redundancy = 0.0;   ///< R_{ik->j}
  double synergy = 0.0;      ///< S_{ik->j}
  double unique_i = 0.0;     ///< U_{i->j}
  double unique_k = 0.0;     ///< U_{k->j}
};

struct PidAtoms {
  double unique_i = 0.0;
  double unique_k = 0.0;
  double redundancy = 0.0;
  double synergy = 0.0;
};

/// Values in [-kNegativeTolerance, 0) are rounding and reported as zero.
inline constexpr double kNegativeTolerance = 1e-12;

double transfer_entropy(const IssModel& iss, std::size_t source, std::size_t target,
                        const DareOptions& options = {});

/// Joint TE from (i, k) to j; the denominator is the full-model innovation variance.
double joint_te(const IssModel& iss, std::size_t source_i, std::size_t source_k,
                std::size_t target, const DareOptions& options = {});

/// Interaction TE: T_ik - T_i - T_k (positive means net synergy).
double iid_decompose(double te_i, double te_k, double te_joint);

/// Minimum-mutual-information PID. Throws InconsistentMeasures when an
/// individual TE exceeds the joint TE by more than kNegativeTolerance.
PidAtoms pid_mmi(double te_i, double te_k, double te_joint);

/// All measures for one state-space model (one scale).
ScaleMeasures measures_from_iss(const IssModel& iss, std::size_t target, std::size_t source_i,
                                std::size_t source_k, const DareOptions& options = {});

struct DecomposeConfig {
  std::vector<std::size_t> scales = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  std::size_t q = 50;  ///< fractional truncation lag
  std::size_t r = 48;  ///< FIR order
  DareOptions dare;
};

struct DecompositionProfile {
  std::string target;
  std::string source_i;
  std::string source_k;
  std::vector<std::size_t> scales;
  std::vector<ScaleMeasures> measures;  ///< one per scale, same order
  std::uint64_t model_hash = 0;
  std::size_t q = 0;
  std::size_t r = 0;
};

/// Truncates the model once, then for every scale: low-pass at 1/(2 tau),
/// state-space conversion, decimation, partial variances, TE, IID and PID.
DecompositionProfile decompose_multiscale(const VarfiModel& model, std::size_t target,
                                          std::size_t source_i, std::size_t source_k,
                                          const DecomposeConfig& config = {});

}  // namespace msvarfi
