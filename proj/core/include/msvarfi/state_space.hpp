#pragma once

#include "msvarfi/filter.hpp"
#include "msvarfi/model.hpp"

#include <cstddef>
#include <functional>
#include <span>

namespace msvarfi {

/// Innovations form: Z_{n+1} = A Z_n + K E_n,  X_n = C Z_n + E_n,  cov(E_n) = V.
struct IssModel {
  Matrix A;
  Matrix C;
  Matrix K;
  Matrix V;

  std::size_t state_dim() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t observed() const { return static_cast<std::size_t>(C.rows()); }
};

struct DareSolution {
  Matrix K;
  Matrix V;
  Matrix P;
  std::size_t iterations = 0;
  double residual = 0.0;  ///< max-abs Riccati residual at P
};

struct DareOptions {
  double tolerance = 1e-12;           ///< max-abs change between iterates
  std::size_t max_iterations = 10000;
  double residual_limit = 1e-10;      ///< accepted solutions satisfy this
  /// Called with every accepted solution (diagnostics only).
  std::function<void(const DareSolution&)> observer;
};

/// Solves P = A P A' + Q - (A P C' + S)(C P C' + R)^-1 (A P C' + S)' by the
/// Riccati fixed-point iteration started at P = Q. Returns the innovation
/// gain K = (A P C' + S) V^-1 and covariance V = C P C' + R.
///
/// The iterates are advanced in low-rank (Chandrasekhar) form: successive
/// differences P_{k+1} - P_k stay within the rank of the first one, so each
/// step costs O(n^2 r) instead of O(n^3). A dense residual check runs on the
/// result, with plain dense iterations as a polish if it is not met.
///
/// Throws riccati_divergence if A is unstable, the iteration cap is reached
/// or the residual cannot be brought under the limit; ill_posed_model if an
/// innovation covariance is not positive definite.
DareSolution dare_innovations(const Matrix& A, const Matrix& C, const Matrix& Q,
                              const Matrix& R, const Matrix& S,
                              const DareOptions& options = {});

/// Max-abs entry of the Riccati map residual f(P) - P.
double riccati_residual(const Matrix& A, const Matrix& C, const Matrix& Q, const Matrix& R,
                        const Matrix& S, const Matrix& P);

/// State-space form of B(L) X^(r)_n = D(L) E_n, state
/// [X_{n-1} .. X_{n-m}, E_{n-1} .. E_{n-r}].
///
/// Exactly-zero leading or trailing taps are dropped first; a pure delay does
/// not change a stationary process and D_0 must be invertible. Throws
/// stability for an unstable VAR.
///
/// The result is a valid generative model but is minimum phase only when
/// D(z) has no zeros outside the unit circle; downsample_iss restores the
/// innovations form.
IssModel varma_to_iss(const VarModel& var, const FilterSpec& filter);

/// Decimation by tau >= 1 followed by a DARE to recover the innovations form.
IssModel downsample_iss(const IssModel& iss, std::size_t tau, const DareOptions& options = {});

/// Innovation covariance of the observation subset (in the given order).
Matrix submodel_innovation_cov(const IssModel& iss, std::span<const std::size_t> subset,
                               const DareOptions& options = {});

/// Prediction-error variance of channel `target` given the pasts of `subset`.
double partial_variance(const IssModel& iss, std::span<const std::size_t> subset,
                        std::size_t target, const DareOptions& options = {});

}  // namespace msvarfi
