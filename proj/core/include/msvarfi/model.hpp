#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace msvarfi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// VARFI(p, d): A(L) diag((1-L)^d) X_n = E_n with A(L) = I - sum_i A_i L^i.
struct VarfiModel {
  std::vector<Matrix> ar;  ///< A_1 ... A_p, each M x M
  Vector d;                ///< per-channel fractional exponents
  Matrix sigma;            ///< innovation covariance
  std::vector<std::string> labels;

  std::size_t channels() const { return static_cast<std::size_t>(sigma.rows()); }
  std::size_t order() const { return ar.size(); }
};

/// Finite VAR(m): B(L) X_n = E_n with B(L) = I - sum_k B_k L^k.
struct VarModel {
  std::vector<Matrix> coeffs;  ///< B_1 ... B_m
  Matrix sigma;

  std::size_t channels() const { return static_cast<std::size_t>(sigma.rows()); }
  std::size_t order() const { return coeffs.size(); }
};

/// Models whose companion spectral radius reaches this are treated as unstable.
inline constexpr double kStabilityThreshold = 1.0 - 1e-10;

/// Coefficients G_0..G_q of the expansion of (1 - L)^d, for -0.5 < d < 1.
std::vector<double> fracdiff_coeffs(double d, std::size_t q);

/// Same recursion without the model-parameter range check. Valid for any
/// real exponent; used by filters that need d = 1 or negative inverses.
std::vector<double> binomial_expansion(double d, std::size_t q);

/// Truncates the fractional part at lag q >= p and returns the VAR(p + q)
/// whose coefficients are those of A(L) G(L).
VarModel truncate_to_var(const VarfiModel& model, std::size_t q);

enum class MemoryClass { stationary, mean_reverting };

struct StationarityReport {
  double spectral_radius = 0.0;
  bool stable = true;
  std::vector<MemoryClass> memory;  ///< empty for VarModel
};

StationarityReport check_stationarity(const VarfiModel& model);
StationarityReport check_stationarity(const VarModel& model);

/// Block companion matrix of a VAR coefficient sequence (M*p square).
Matrix companion(std::span<const Matrix> coeffs);
double spectral_radius(const Matrix& square);

/// Throws Error(domain|argument) if shapes, d range or covariance are invalid.
void validate(const VarfiModel& model);
void validate(const VarModel& model);

/// FNV-1a over the bit patterns of every parameter and label.
std::uint64_t fingerprint(const VarfiModel& model);

}  // namespace msvarfi
