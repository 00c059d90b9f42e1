#include "msvarfi/infodecomp.hpp"

#include "msvarfi/error.hpp"
#include "msvarfi/filter.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace msvarfi {

namespace {

double clamp_rounding(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw Error(Errc::inconsistent_measures, std::string(what) + " is not finite");
  }
  if (value >= 0.0) return value;
  if (value >= -kNegativeTolerance) return 0.0;
  std::ostringstream os;
  os.precision(17);
  os << what << " is negative beyond rounding: " << value;
  throw Error(Errc::inconsistent_measures, os.str());
}

double half_log_ratio(double numerator, double denominator, const char* what) {
  if (!(numerator > 0.0) || !(denominator > 0.0)) {
    throw Error(Errc::ill_posed_model, std::string(what) + ": partial variance is not positive");
  }
  return clamp_rounding(0.5 * std::log(numerator / denominator), what);
}

void check_distinct(std::size_t i, std::size_t k, std::size_t j, std::size_t channels) {
  if (i == j || k == j || i == k) {
    throw Error(Errc::argument, "sources and target must be distinct channels");
  }
  if (i >= channels || k >= channels || j >= channels) {
    throw Error(Errc::argument, "channel index out of range");
  }
}

}  // namespace

double transfer_entropy(const IssModel& iss, std::size_t source, std::size_t target,
                        const DareOptions& options) {
  if (source == target) throw Error(Errc::argument, "source and target must differ");
  const std::array<std::size_t, 1> own{target};
  const std::array<std::size_t, 2> pair{source, target};
  const double restricted = partial_variance(iss, own, target, options);
  const double full = partial_variance(iss, pair, target, options);
  return half_log_ratio(restricted, full, "transfer entropy");
}

double joint_te(const IssModel& iss, std::size_t source_i, std::size_t source_k,
                std::size_t target, const DareOptions& options) {
  check_distinct(source_i, source_k, target, iss.observed());
  const std::array<std::size_t, 1> own{target};
  const double restricted = partial_variance(iss, own, target, options);
  const auto j = static_cast<Eigen::Index>(target);
  return half_log_ratio(restricted, iss.V(j, j), "joint transfer entropy");
}

double iid_decompose(double te_i, double te_k, double te_joint) { return te_joint - (te_i + te_k); }

PidAtoms pid_mmi(double te_i, double te_k, double te_joint) {
  if (te_i > te_joint + kNegativeTolerance || te_k > te_joint + kNegativeTolerance) {
    throw InconsistentMeasures(te_i, te_k, te_joint);
  }
  PidAtoms atoms;
  atoms.redundancy = std::min(te_i, te_k);
  atoms.unique_i = te_i - atoms.redundancy;
  atoms.unique_k = te_k - atoms.redundancy;
  atoms.synergy = te_joint - (te_i + te_k) + atoms.redundancy;
  if (atoms.synergy < 0.0) atoms.synergy = 0.0;  // within tolerance by the check above
  return atoms;
}

ScaleMeasures measures_from_iss(const IssModel& iss, std::size_t target, std::size_t source_i,
                                std::size_t source_k, const DareOptions& options) {
  check_distinct(source_i, source_k, target, iss.observed());
  const std::array<std::size_t, 1> own{target};
  const std::array<std::size_t, 2> with_i{source_i, target};
  const std::array<std::size_t, 2> with_k{source_k, target};

  // The three submodels share nothing but the model; {j} feeds all three TEs.
  const double var_j = partial_variance(iss, own, target, options);
  const double var_ij = partial_variance(iss, with_i, target, options);
  const double var_kj = partial_variance(iss, with_k, target, options);
  const auto jj = static_cast<Eigen::Index>(target);
  const double var_full = iss.V(jj, jj);

  ScaleMeasures out;
  out.te_i = half_log_ratio(var_j, var_ij, "transfer entropy (source i)");
  out.te_k = half_log_ratio(var_j, var_kj, "transfer entropy (source k)");
  out.te_joint = half_log_ratio(var_j, var_full, "joint transfer entropy");
  out.interaction = iid_decompose(out.te_i, out.te_k, out.te_joint);
  const auto atoms = pid_mmi(out.te_i, out.te_k, out.te_joint);
  out.redundancy = atoms.redundancy;
  out.synergy = atoms.synergy;
  out.unique_i = atoms.unique_i;
  out.unique_k = atoms.unique_k;
  return out;
}

DecompositionProfile decompose_multiscale(const VarfiModel& model, std::size_t target,
                                          std::size_t source_i, std::size_t source_k,
                                          const DecomposeConfig& config) {
  validate(model);
  check_distinct(source_i, source_k, target, model.channels());
  if (config.scales.empty()) throw Error(Errc::argument, "at least one scale is required");
  for (std::size_t k = 0; k < config.scales.size(); ++k) {
    if (config.scales[k] < 1 || (k > 0 && config.scales[k] <= config.scales[k - 1])) {
      throw Error(Errc::argument, "scales must be positive and strictly increasing");
    }
  }

  const VarModel var = truncate_to_var(model, config.q);

  auto label = [&](std::size_t c) {
    return c < model.labels.size() ? model.labels[c] : "X" + std::to_string(c + 1);
  };
  DecompositionProfile profile;
  profile.target = label(target);
  profile.source_i = label(source_i);
  profile.source_k = label(source_k);
  profile.scales = config.scales;
  profile.model_hash = fingerprint(model);
  profile.q = config.q;
  profile.r = config.r;
  profile.measures.reserve(config.scales.size());

  for (std::size_t idx = 0; idx < config.scales.size(); ++idx) {
    const std::size_t tau = config.scales[idx];
    try {
      const FilterSpec filter = fir_lowpass(config.r, scale_cutoff(tau));
      const IssModel iss = varma_to_iss(var, filter);
      const IssModel scaled = downsample_iss(iss, tau, config.dare);
      ScaleMeasures m = measures_from_iss(scaled, target, source_i, source_k, config.dare);
      m.tau = tau;
      profile.measures.push_back(m);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "scale index " << idx << " (tau=" << tau << "): " << e.what();
      throw Error(e.code(), os.str());
    }
  }
  return profile;
}

}  // namespace msvarfi
