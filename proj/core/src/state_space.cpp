#include "msvarfi/state_space.hpp"

#include "msvarfi/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace msvarfi {

namespace {

constexpr std::size_t kPolishIterations = 200;
constexpr double kGrowthLimit = 1e12;

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Eigen::LLT<Matrix> factor_innovation(const Matrix& re, const char* where) {
  Eigen::LLT<Matrix> llt(re);
  if (llt.info() != Eigen::Success || !re.allFinite()) {
    throw Error(Errc::ill_posed_model,
                std::string("innovation covariance is not positive definite (") + where + ")");
  }
  return llt;
}

// One dense application of the Riccati map.
Matrix riccati_map(const Matrix& A, const Matrix& C, const Matrix& Q, const Matrix& R,
                   const Matrix& S, const Matrix& P) {
  const Matrix PCt = P * C.transpose();
  const Matrix re = symmetrize(C * PCt + R);
  const Matrix kbar = A * PCt + S;
  const auto llt = factor_innovation(re, "dense iteration");
  return symmetrize(A * P * A.transpose() + Q - kbar * llt.solve(kbar.transpose()));
}

// Orthonormal re-factorization of L M L' with negligible directions dropped.
void compress(Matrix& L, Matrix& M) {
  if (L.cols() == 0) return;
  Eigen::HouseholderQR<Matrix> qr(L);
  const Eigen::Index r = std::min(L.rows(), L.cols());
  const Matrix basis = qr.householderQ() * Matrix::Identity(L.rows(), r);
  const Matrix tri = qr.matrixQR().topRows(r).template triangularView<Eigen::Upper>();
  const Matrix core = symmetrize(tri * M * tri.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(core);
  const Vector& lambda = eig.eigenvalues();
  const double scale = lambda.size() ? lambda.cwiseAbs().maxCoeff() : 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (std::abs(lambda(i)) > 1e-15 * scale && std::abs(lambda(i)) > 0.0) keep.push_back(i);
  }
  Matrix newL(L.rows(), static_cast<Eigen::Index>(keep.size()));
  Vector diag(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    newL.col(col) = basis * eig.eigenvectors().col(keep[c]);
    diag(col) = lambda(keep[c]);
  }
  L = std::move(newL);
  M = diag.asDiagonal();
}

// Square-root factor F with F F' = Q for a PSD matrix.
Matrix psd_factor(const Matrix& Q) {
  if (Q.rows() == 0) return Matrix(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(Q));
  const Vector& lambda = eig.eigenvalues();
  const double scale = std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);
  if (lambda.minCoeff() < -1e-10 * std::max(1.0, scale)) {
    throw Error(Errc::argument, "state noise covariance is not positive semi-definite");
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > 1e-15 * scale) keep.push_back(i);
  }
  Matrix F(Q.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    F.col(static_cast<Eigen::Index>(c)) = eig.eigenvectors().col(keep[c]) * std::sqrt(lambda(keep[c]));
  }
  return F;
}

void check_dimensions(const Matrix& A, const Matrix& C, const Matrix& R, const Matrix& S,
                      Eigen::Index q_rows) {
  const Eigen::Index n = A.rows();
  const Eigen::Index p = C.rows();
  if (A.cols() != n || C.cols() != n || q_rows != n || R.rows() != p || R.cols() != p ||
      S.rows() != n || S.cols() != p) {
    throw Error(Errc::argument, "inconsistent state-space dimensions");
  }
}

// Riccati fixed point from P0 = F F'. See dare_innovations for the contract.
DareSolution solve_factored(const Matrix& A, const Matrix& C, const Matrix& F, const Matrix& R,
                            const Matrix& S, const DareOptions& options) {
  check_dimensions(A, C, R, S, F.rows());
  const Eigen::Index n = A.rows();
  const Matrix Q = F * F.transpose();

  DareSolution out;
  if (n == 0) {
    out.V = symmetrize(R);
    factor_innovation(out.V, "static model");
    out.K = Matrix(0, C.rows());
    out.P = Matrix(0, 0);
    if (options.observer) options.observer(out);
    return out;
  }

  Matrix P = Q;
  Matrix re = symmetrize(C * P * C.transpose() + R);
  Matrix kbar = A * P * C.transpose() + S;
  auto llt = factor_innovation(re, "initial iterate");
  const double re_scale = 1.0 + max_abs(re);

  // P_1 - P_0 = A Q A' - kbar re^-1 kbar'
  Matrix L(n, F.cols() + C.rows());
  L << A * F, kbar;
  Matrix M = Matrix::Zero(L.cols(), L.cols());
  M.topLeftCorner(F.cols(), F.cols()).setIdentity();
  M.bottomRightCorner(C.rows(), C.rows()) = -llt.solve(Matrix::Identity(C.rows(), C.rows()));
  compress(L, M);

  bool converged = false;
  std::size_t iter = 0;
  while (iter < options.max_iterations) {
    ++iter;
    // |(L M L')_ij| <= ||M||_F * max_i ||L_i||^2
    const double row_norm = L.cols() ? L.rowwise().squaredNorm().maxCoeff() : 0.0;
    const double bound = M.norm() * row_norm;
    const Matrix LM = L * M;
    P.noalias() += LM * L.transpose();
    if (bound < options.tolerance) {
      converged = true;
      break;
    }

    const Matrix CL = C * L;
    const Matrix AL = A * L;
    const Matrix MCLt = M * CL.transpose();
    const Matrix gain = llt.solve(kbar.transpose()).transpose();  // kbar re^-1
    L = AL - gain * CL;
    re = symmetrize(re + CL * MCLt);
    kbar += AL * MCLt;
    llt = factor_innovation(re, "iteration");
    M = symmetrize(M - MCLt * llt.solve(MCLt.transpose()));

    if (!L.allFinite() || max_abs(re) > kGrowthLimit * re_scale) {
      std::ostringstream os;
      os << "Riccati iteration diverged after " << iter << " steps";
      throw Error(Errc::riccati_divergence, os.str());
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "Riccati iteration did not converge within " << options.max_iterations << " steps";
    throw Error(Errc::riccati_divergence, os.str());
  }

  P = symmetrize(P);
  double residual = riccati_residual(A, C, Q, R, S, P);
  for (std::size_t k = 0; k < kPolishIterations && residual >= options.residual_limit; ++k) {
    P = riccati_map(A, C, Q, R, S, P);
    residual = riccati_residual(A, C, Q, R, S, P);
  }
  if (!(residual < options.residual_limit)) {
    std::ostringstream os;
    os << "Riccati residual " << residual << " exceeds " << options.residual_limit;
    throw Error(Errc::riccati_divergence, os.str());
  }

  const Matrix PCt = P * C.transpose();
  out.V = symmetrize(C * PCt + R);
  const auto final_llt = factor_innovation(out.V, "solution");
  out.K = final_llt.solve((A * PCt + S).transpose()).transpose();
  out.P = std::move(P);
  out.iterations = iter;
  out.residual = residual;
  if (options.observer) options.observer(out);
  return out;
}

// Square-root factor of V; throws ill_posed_model when V is not PD.
Matrix chol_lower(const Matrix& V) {
  return factor_innovation(symmetrize(V), "model").matrixL();
}

}  // namespace

double riccati_residual(const Matrix& A, const Matrix& C, const Matrix& Q, const Matrix& R,
                        const Matrix& S, const Matrix& P) {
  if (A.rows() == 0) return 0.0;
  return max_abs(riccati_map(A, C, Q, R, S, P) - P);
}

DareSolution dare_innovations(const Matrix& A, const Matrix& C, const Matrix& Q,
                              const Matrix& R, const Matrix& S, const DareOptions& options) {
  check_dimensions(A, C, R, S, Q.rows());
  if (Q.cols() != Q.rows()) throw Error(Errc::argument, "state noise covariance must be square");
  const double radius = spectral_radius(A);
  if (!(radius < kStabilityThreshold)) {
    std::ostringstream os;
    os << "state transition has spectral radius " << radius
       << "; the Riccati iteration is only defined for stable A";
    throw Error(Errc::riccati_divergence, os.str());
  }
  return solve_factored(A, C, psd_factor(Q), R, S, options);
}

IssModel varma_to_iss(const VarModel& var, const FilterSpec& filter) {
  validate(var);
  const auto report = check_stationarity(var);
  if (!report.stable) {
    std::ostringstream os;
    os << "VAR model is unstable (spectral radius " << report.spectral_radius << ")";
    throw Error(Errc::stability, os.str());
  }

  auto first = std::find_if(filter.taps.begin(), filter.taps.end(), [](double t) { return t != 0.0; });
  auto last = std::find_if(filter.taps.rbegin(), filter.taps.rend(), [](double t) { return t != 0.0; });
  if (first == filter.taps.end()) throw Error(Errc::argument, "filter has no nonzero taps");
  const std::vector<double> taps(first, last.base());

  const Eigen::Index M = var.sigma.rows();
  const auto m = static_cast<Eigen::Index>(var.order());
  const auto r = static_cast<Eigen::Index>(taps.size()) - 1;
  const Eigen::Index n = M * (m + r);
  const double d0 = taps.front();

  IssModel iss;
  iss.C = Matrix::Zero(M, n);
  for (Eigen::Index k = 0; k < m; ++k) iss.C.block(0, k * M, M, M) = var.coeffs[static_cast<std::size_t>(k)];
  for (Eigen::Index k = 1; k <= r; ++k) {
    iss.C.block(0, (m + k - 1) * M, M, M) = taps[static_cast<std::size_t>(k)] * Matrix::Identity(M, M);
  }

  iss.A = Matrix::Zero(n, n);
  iss.K = Matrix::Zero(n, M);
  if (m > 0) {
    iss.A.topRows(M) = iss.C;
    iss.K.topRows(M).setIdentity();
    for (Eigen::Index k = 1; k < m; ++k) iss.A.block(k * M, (k - 1) * M, M, M).setIdentity();
  }
  if (r > 0) {
    iss.K.block(m * M, 0, M, M) = (1.0 / d0) * Matrix::Identity(M, M);
    for (Eigen::Index k = 1; k < r; ++k) iss.A.block((m + k) * M, (m + k - 1) * M, M, M).setIdentity();
  }
  iss.V = d0 * d0 * var.sigma;
  return iss;
}

IssModel downsample_iss(const IssModel& iss, std::size_t tau, const DareOptions& options) {
  if (tau < 1) throw Error(Errc::argument, "scale factor must be at least 1");
  const Eigen::Index n = iss.A.rows();
  const Eigen::Index M = iss.V.rows();

  // Q_tau = sum_i A^i K V K' A^i' = F F' with F = [W, A W, ..., A^{tau-1} W], W = K chol(V).
  const Matrix W = iss.K * chol_lower(iss.V);
  Matrix F(n, M * static_cast<Eigen::Index>(tau));
  Matrix power = Matrix::Identity(n, n);  // A^i
  Matrix block = W;
  for (std::size_t i = 0; i < tau; ++i) {
    F.middleCols(static_cast<Eigen::Index>(i) * M, M) = block;
    if (i + 1 < tau) {
      block = iss.A * block;
      power = iss.A * power;
    }
  }
  const Matrix S = power * iss.K * iss.V;  // A^{tau-1} K V
  const Matrix A_tau = tau == 1 ? iss.A : Matrix(iss.A * power);

  const auto solution = solve_factored(A_tau, iss.C, F, iss.V, S, options);
  return IssModel{A_tau, iss.C, solution.K, solution.V};
}

Matrix submodel_innovation_cov(const IssModel& iss, std::span<const std::size_t> subset,
                               const DareOptions& options) {
  const auto M = iss.observed();
  if (subset.empty()) throw Error(Errc::argument, "channel subset is empty");
  std::vector<std::size_t> seen;
  for (std::size_t c : subset) {
    if (c >= M) {
      std::ostringstream os;
      os << "channel index " << c << " out of range for " << M << " observed channels";
      throw Error(Errc::argument, os.str());
    }
    if (std::find(seen.begin(), seen.end(), c) != seen.end()) {
      throw Error(Errc::argument, "channel subset contains duplicates");
    }
    seen.push_back(c);
  }

  const auto a = static_cast<Eigen::Index>(subset.size());
  Matrix Ca(a, iss.C.cols());
  Matrix Vaa(a, a);
  Matrix KVa(iss.K.rows(), a);
  const Matrix KV = iss.K * iss.V;
  for (Eigen::Index r = 0; r < a; ++r) {
    const auto cr = static_cast<Eigen::Index>(subset[static_cast<std::size_t>(r)]);
    Ca.row(r) = iss.C.row(cr);
    KVa.col(r) = KV.col(cr);
    for (Eigen::Index c = 0; c < a; ++c) {
      Vaa(r, c) = iss.V(cr, static_cast<Eigen::Index>(subset[static_cast<std::size_t>(c)]));
    }
  }
  const Matrix W = iss.K * chol_lower(iss.V);
  return solve_factored(iss.A, Ca, W, Vaa, KVa, options).V;
}

double partial_variance(const IssModel& iss, std::span<const std::size_t> subset,
                        std::size_t target, const DareOptions& options) {
  const auto pos = std::find(subset.begin(), subset.end(), target);
  if (pos == subset.end()) {
    std::ostringstream os;
    os << "target channel " << target << " is not part of the conditioning subset";
    throw Error(Errc::argument, os.str());
  }
  const Matrix cov = submodel_innovation_cov(iss, subset, options);
  const auto idx = static_cast<Eigen::Index>(pos - subset.begin());
  return cov(idx, idx);
}

}  // namespace msvarfi
