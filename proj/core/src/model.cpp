#include "msvarfi/model.hpp"

#include "msvarfi/error.hpp"

#include <bit>
#include <cmath>
#include <sstream>

namespace msvarfi {

namespace {

void check_covariance(const Matrix& sigma) {
  if (sigma.rows() == 0 || sigma.rows() != sigma.cols()) {
    throw Error(Errc::argument, "innovation covariance must be a non-empty square matrix");
  }
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if (!sigma.allFinite() || (sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(Errc::domain, "innovation covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw Error(Errc::domain, "innovation covariance is not positive definite");
  }
}

void check_coefficients(std::span<const Matrix> coeffs, Eigen::Index m, const char* what) {
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k].rows() != m || coeffs[k].cols() != m || !coeffs[k].allFinite()) {
      std::ostringstream os;
      os << what << " coefficient at lag " << k + 1 << " must be a finite " << m << "x" << m
         << " matrix";
      throw Error(Errc::argument, os.str());
    }
  }
}

// Column scaling A * diag(g).
Matrix scale_columns(const Matrix& a, const Vector& g) { return a * g.asDiagonal(); }

}  // namespace

std::vector<double> binomial_expansion(double d, std::size_t q) {
  std::vector<double> g(q + 1);
  g[0] = 1.0;
  for (std::size_t k = 1; k <= q; ++k) {
    const double kk = static_cast<double>(k);
    g[k] = g[k - 1] * (kk - 1.0 - d) / kk;
  }
  return g;
}

std::vector<double> fracdiff_coeffs(double d, std::size_t q) {
  if (!(d > -0.5 && d < 1.0)) {
    std::ostringstream os;
    os << "fractional exponent " << d << " outside (-0.5, 1)";
    throw Error(Errc::domain, os.str());
  }
  return binomial_expansion(d, q);
}

VarModel truncate_to_var(const VarfiModel& model, std::size_t q) {
  const std::size_t p = model.order();
  const auto m = static_cast<Eigen::Index>(model.channels());
  if (q < p) {
    std::ostringstream os;
    os << "truncation lag q=" << q << " must be at least the AR order p=" << p;
    throw Error(Errc::argument, os.str());
  }
  if (model.d.size() != m) {
    throw Error(Errc::argument, "fractional exponent vector length differs from channel count");
  }

  // diag(G_k) stored as one vector per lag.
  std::vector<Vector> g(q + 1, Vector(m));
  for (Eigen::Index c = 0; c < m; ++c) {
    const auto coeffs = fracdiff_coeffs(model.d(c), q);
    for (std::size_t k = 0; k <= q; ++k) g[k](c) = coeffs[k];
  }
  const auto& a = model.ar;  // a[i - 1] is A_i

  VarModel out;
  out.sigma = model.sigma;
  out.coeffs.assign(p + q, Matrix::Zero(m, m));
  for (std::size_t k = 1; k <= p; ++k) {
    Matrix b = Matrix((-g[k]).asDiagonal());
    for (std::size_t i = 1; i <= k; ++i) b += scale_columns(a[i - 1], g[k - i]);
    out.coeffs[k - 1] = std::move(b);
  }
  for (std::size_t k = p + 1; k <= q; ++k) {
    Matrix b = Matrix((-g[k]).asDiagonal());
    for (std::size_t i = 1; i <= p; ++i) b += scale_columns(a[i - 1], g[k - i]);
    out.coeffs[k - 1] = std::move(b);
  }
  for (std::size_t k = q + 1; k <= q + p; ++k) {
    Matrix b = Matrix::Zero(m, m);
    for (std::size_t i = 0; i <= p + q - k; ++i) b += scale_columns(a[i + k - q - 1], g[q - i]);
    out.coeffs[k - 1] = std::move(b);
  }
  return out;
}

Matrix companion(std::span<const Matrix> coeffs) {
  if (coeffs.empty()) return Matrix(0, 0);
  const Eigen::Index m = coeffs.front().rows();
  const auto p = static_cast<Eigen::Index>(coeffs.size());
  Matrix c = Matrix::Zero(m * p, m * p);
  for (Eigen::Index k = 0; k < p; ++k) c.block(0, k * m, m, m) = coeffs[static_cast<std::size_t>(k)];
  if (p > 1) c.block(m, 0, m * (p - 1), m * (p - 1)).setIdentity();
  return c;
}

double spectral_radius(const Matrix& square) {
  if (square.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> eig(square, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

StationarityReport check_stationarity(const VarModel& model) {
  StationarityReport report;
  report.spectral_radius = spectral_radius(companion(model.coeffs));
  report.stable = report.spectral_radius < kStabilityThreshold;
  return report;
}

StationarityReport check_stationarity(const VarfiModel& model) {
  StationarityReport report;
  report.spectral_radius = spectral_radius(companion(model.ar));
  report.stable = report.spectral_radius < kStabilityThreshold;
  report.memory.reserve(static_cast<std::size_t>(model.d.size()));
  for (Eigen::Index i = 0; i < model.d.size(); ++i) {
    report.memory.push_back(model.d(i) < 0.5 ? MemoryClass::stationary : MemoryClass::mean_reverting);
  }
  return report;
}

void validate(const VarfiModel& model) {
  check_covariance(model.sigma);
  const Eigen::Index m = model.sigma.rows();
  check_coefficients(model.ar, m, "AR");
  if (model.d.size() != m) {
    throw Error(Errc::argument, "fractional exponent vector length differs from channel count");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(model.d(i) > -0.5 && model.d(i) < 1.0)) {
      std::ostringstream os;
      os << "fractional exponent d[" << i << "]=" << model.d(i) << " outside (-0.5, 1)";
      throw Error(Errc::domain, os.str());
    }
  }
  if (!model.labels.empty() && model.labels.size() != static_cast<std::size_t>(m)) {
    throw Error(Errc::argument, "label count differs from channel count");
  }
}

void validate(const VarModel& model) {
  check_covariance(model.sigma);
  check_coefficients(model.coeffs, model.sigma.rows(), "VAR");
}

std::uint64_t fingerprint(const VarfiModel& model) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix_bytes = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  auto mix_double = [&](double x) { mix_bytes(std::bit_cast<std::uint64_t>(x)); };
  mix_bytes(model.channels());
  mix_bytes(model.order());
  for (const auto& a : model.ar) {
    for (Eigen::Index i = 0; i < a.size(); ++i) mix_double(a.data()[i]);
  }
  for (Eigen::Index i = 0; i < model.d.size(); ++i) mix_double(model.d(i));
  for (Eigen::Index i = 0; i < model.sigma.size(); ++i) mix_double(model.sigma.data()[i]);
  for (const auto& label : model.labels) {
    for (unsigned char ch : label) mix_bytes(ch);
    mix_bytes(0xff);
  }
  return h;
}

}  // namespace msvarfi
