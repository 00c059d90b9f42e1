#pragma once

#include "msvarfi/model.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace msvarfi {

inline constexpr std::size_t kMinSeriesLength = 64;

struct Periodogram {
  std::vector<double> frequency;  ///< lambda_k = 2 pi k / N, k = 1 .. floor(N/2)
  std::vector<double> power;      ///< |sum_n x_n e^{-i lambda_k n}|^2 / (2 pi N)
};

/// Periodogram of the mean-removed series. Requires N >= 64.
Periodogram periodogram(std::span<const double> x);

struct WhittleEstimate {
  double d = 0.0;
  std::size_t bandwidth = 0;          ///< number of Fourier frequencies used
  bool nonstationary_warning = false; ///< estimate sits on the upper bound
};

inline constexpr double kWhittleLower = -0.5;
inline constexpr double kWhittleUpper = 1.0 - 1e-6;

/// Local Whittle objective R(d) over the first `bandwidth` frequencies.
double whittle_objective(const Periodogram& pg, std::size_t bandwidth, double d);

/// Local Whittle estimate of d with bandwidth floor(N^bandwidth_exponent).
WhittleEstimate whittle_local_d(std::span<const double> x, double bandwidth_exponent = 0.65);
WhittleEstimate whittle_local_d(const Periodogram& pg, std::size_t bandwidth);

/// y_n = sum_{k=0}^{min(n,q)} G_k x_{n-k} with G the expansion of (1-L)^d.
/// Accepts -1 <= d <= 1 so that first differences and inverse filters work.
std::vector<double> fractional_filter(std::span<const double> x, double d, std::size_t q);

struct VarFit {
  std::vector<Matrix> coeffs;  ///< B_1 .. B_p
  Matrix residual_cov;         ///< residual cross-products / (N - p)
};

/// Least-squares VAR(p) on channels x samples data (no intercept).
VarFit ols_var_fit(const Matrix& x, std::size_t p);

struct BicSelection {
  std::size_t order = 1;
  std::vector<double> criteria;  ///< criteria[k] belongs to order first_order + k
  std::size_t first_order = 1;
};

/// argmin over p in [1, p_max] (or [0, p_max] with allow_zero) of
/// N log det(Sigma_p) + p M^2 log N; ties go to the smaller order.
BicSelection bic_select(const Matrix& x, std::size_t p_max, bool allow_zero = false);

struct FitOptions {
  std::size_t q = 50;
  std::size_t p_max = 20;
  double bandwidth_exponent = 0.65;
  double max_d = 0.95;  ///< any estimate at or above this rejects the subject
};

struct FitResult {
  VarfiModel model;
  std::vector<WhittleEstimate> whittle;
  std::size_t q = 0;
  std::size_t burn_in = 0;  ///< leading filtered samples built from partial history
  std::vector<double> bic;
};

/// Per-channel local Whittle d, fractional pre-filtering, BIC order
/// selection and OLS fit on the filtered data.
FitResult fit_varfi(const Matrix& x, const std::vector<std::string>& labels,
                    const FitOptions& options = {});

}  // namespace msvarfi
