#include "msvarfi/estimation.hpp"

#include "msvarfi/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

namespace msvarfi {

namespace {

// FFTW's planner is not re-entrant; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void require_length(std::size_t n) {
  if (n < kMinSeriesLength) {
    std::ostringstream os;
    os << "series of length " << n << " is shorter than " << kMinSeriesLength;
    throw Error(Errc::insufficient_data, os.str());
  }
}

std::string channel_name(const std::vector<std::string>& labels, std::size_t c) {
  return c < labels.size() ? labels[c] : "channel " + std::to_string(c);
}

}  // namespace

Periodogram periodogram(std::span<const double> x) {
  const std::size_t n = x.size();
  require_length(n);

  // Shifting by the first sample first makes constant series center exactly.
  std::vector<double> centered(x.begin(), x.end());
  const double first = centered.front();
  for (double& v : centered) v -= first;
  const double mean = std::accumulate(centered.begin(), centered.end(), 0.0) / static_cast<double>(n);
  for (double& v : centered) v -= mean;

  const std::size_t bins = n / 2 + 1;
  std::unique_ptr<fftw_complex[], decltype(&fftw_free)> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)), &fftw_free);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), centered.data(), out.get(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }

  Periodogram pg;
  const std::size_t half = n / 2;
  pg.frequency.resize(half);
  pg.power.resize(half);
  const double norm = 2.0 * std::numbers::pi * static_cast<double>(n);
  for (std::size_t k = 1; k <= half; ++k) {
    const double re = out[k][0];
    const double im = out[k][1];
    pg.frequency[k - 1] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    pg.power[k - 1] = (re * re + im * im) / norm;
  }
  return pg;
}

double whittle_objective(const Periodogram& pg, std::size_t bandwidth, double d) {
  // log(mean(lambda^{2d} I)) - 2d mean(log lambda), with log-sum-exp for range.
  double peak = -std::numeric_limits<double>::infinity();
  double mean_log = 0.0;
  for (std::size_t k = 0; k < bandwidth; ++k) {
    const double log_lambda = std::log(pg.frequency[k]);
    mean_log += log_lambda;
    if (pg.power[k] > 0.0) peak = std::max(peak, 2.0 * d * log_lambda + std::log(pg.power[k]));
  }
  mean_log /= static_cast<double>(bandwidth);
  double acc = 0.0;
  for (std::size_t k = 0; k < bandwidth; ++k) {
    if (pg.power[k] > 0.0) {
      acc += std::exp(2.0 * d * std::log(pg.frequency[k]) + std::log(pg.power[k]) - peak);
    }
  }
  return peak + std::log(acc / static_cast<double>(bandwidth)) - 2.0 * d * mean_log;
}

WhittleEstimate whittle_local_d(const Periodogram& pg, std::size_t bandwidth) {
  if (bandwidth < 1 || bandwidth > pg.power.size()) {
    throw Error(Errc::argument, "Whittle bandwidth outside [1, N/2]");
  }
  const bool any_power =
      std::any_of(pg.power.begin(), pg.power.begin() + static_cast<std::ptrdiff_t>(bandwidth),
                  [](double v) { return v > 0.0; });
  if (!any_power) throw Error(Errc::degenerate_input, "periodogram is zero over the Whittle band");

  constexpr double kTolerance = 1e-6;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = kWhittleLower;
  double hi = kWhittleUpper;
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = whittle_objective(pg, bandwidth, x1);
  double f2 = whittle_objective(pg, bandwidth, x2);
  while (hi - lo > kTolerance) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = whittle_objective(pg, bandwidth, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = whittle_objective(pg, bandwidth, x2);
    }
  }
  WhittleEstimate est;
  est.d = 0.5 * (lo + hi);
  est.bandwidth = bandwidth;
  est.nonstationary_warning = est.d >= kWhittleUpper - 2.0 * kTolerance;
  return est;
}

WhittleEstimate whittle_local_d(std::span<const double> x, double bandwidth_exponent) {
  require_length(x.size());
  if (!(bandwidth_exponent > 0.0 && bandwidth_exponent < 1.0)) {
    throw Error(Errc::argument, "Whittle bandwidth exponent must lie in (0, 1)");
  }
  const auto pg = periodogram(x);
  const auto m = static_cast<std::size_t>(
      std::floor(std::pow(static_cast<double>(x.size()), bandwidth_exponent)));
  return whittle_local_d(pg, std::clamp<std::size_t>(m, 1, pg.power.size()));
}

std::vector<double> fractional_filter(std::span<const double> x, double d, std::size_t q) {
  if (!(d >= -1.0 && d <= 1.0)) {
    std::ostringstream os;
    os << "filter exponent " << d << " outside [-1, 1]";
    throw Error(Errc::domain, os.str());
  }
  if (q < 1) throw Error(Errc::argument, "fractional filter truncation lag must be at least 1");
  const auto g = binomial_expansion(d, q);
  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const std::size_t kmax = std::min(n, q);
    double acc = 0.0;
    for (std::size_t k = 0; k <= kmax; ++k) acc += g[k] * x[n - k];
    y[n] = acc;
  }
  return y;
}

VarFit ols_var_fit(const Matrix& x, std::size_t p) {
  const auto M = x.rows();
  const auto N = x.cols();
  const auto P = static_cast<Eigen::Index>(p);
  if (N <= M * P + 10) {
    std::ostringstream os;
    os << "VAR(" << p << ") on " << M << " channels needs more than " << M * P + 10
       << " samples, got " << N;
    throw Error(Errc::insufficient_data, os.str());
  }

  VarFit fit;
  if (p == 0) {
    fit.residual_cov = x * x.transpose() / static_cast<double>(N);
    return fit;
  }

  const Matrix xt = x.transpose();  // samples x channels
  const Eigen::Index rows = N - P;
  Matrix z(rows, M * P);
  for (Eigen::Index k = 1; k <= P; ++k) z.middleCols((k - 1) * M, M) = xt.middleRows(P - k, rows);
  const Matrix y = xt.bottomRows(rows);

  Matrix gram = Matrix::Zero(M * P, M * P);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Vector& lambda = eig.eigenvalues();
  const double top = lambda.cwiseAbs().maxCoeff();
  if (!(top > 0.0) || lambda.minCoeff() <= 1e-12 * top) {
    std::vector<bool> offending(static_cast<std::size_t>(M), false);
    for (Eigen::Index e = 0; e < lambda.size(); ++e) {
      if (lambda(e) > 1e-12 * top && top > 0.0) continue;
      for (Eigen::Index i = 0; i < M * P; ++i) {
        if (std::abs(eig.eigenvectors()(i, e)) > 0.1) offending[static_cast<std::size_t>(i % M)] = true;
      }
    }
    std::ostringstream os;
    os << "regressor matrix is rank deficient; collinear channels:";
    for (std::size_t c = 0; c < offending.size(); ++c) {
      if (offending[c]) os << ' ' << c;
    }
    throw Error(Errc::singular_fit, os.str());
  }

  const Matrix solution = gram.llt().solve(z.transpose() * y);  // (M p) x M
  fit.coeffs.reserve(p);
  for (Eigen::Index k = 0; k < P; ++k) fit.coeffs.push_back(solution.middleRows(k * M, M).transpose());
  const Matrix resid = y - z * solution;
  fit.residual_cov = resid.transpose() * resid / static_cast<double>(rows);
  fit.residual_cov = 0.5 * (fit.residual_cov + fit.residual_cov.transpose());
  return fit;
}

BicSelection bic_select(const Matrix& x, std::size_t p_max, bool allow_zero) {
  if (p_max < 1) throw Error(Errc::argument, "maximum VAR order must be at least 1");
  const double n = static_cast<double>(x.cols());
  const double m2 = static_cast<double>(x.rows() * x.rows());
  BicSelection sel;
  sel.first_order = allow_zero ? 0 : 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t p = sel.first_order; p <= p_max; ++p) {
    const auto fit = ols_var_fit(x, p);
    Eigen::LLT<Matrix> llt(fit.residual_cov);
    if (llt.info() != Eigen::Success) {
      throw Error(Errc::singular_fit, "residual covariance is not positive definite");
    }
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double crit = n * logdet + static_cast<double>(p) * m2 * std::log(n);
    sel.criteria.push_back(crit);
    if (crit < best) {
      best = crit;
      sel.order = p;
    }
  }
  return sel;
}

FitResult fit_varfi(const Matrix& x, const std::vector<std::string>& labels,
                    const FitOptions& options) {
  const auto M = static_cast<std::size_t>(x.rows());
  if (!labels.empty() && labels.size() != M) {
    throw Error(Errc::argument, "label count differs from channel count");
  }
  if (!x.allFinite()) throw Error(Errc::argument, "fit input contains missing or non-finite samples");
  if (options.q < 1) throw Error(Errc::argument, "truncation lag q must be at least 1");

  FitResult result;
  result.q = options.q;
  result.burn_in = options.q;
  result.model.d.resize(static_cast<Eigen::Index>(M));

  Matrix filtered(x.rows(), x.cols());
  for (std::size_t c = 0; c < M; ++c) {
    const Vector series = x.row(static_cast<Eigen::Index>(c)).transpose();
    const std::span<const double> view(series.data(), static_cast<std::size_t>(series.size()));
    const auto est = whittle_local_d(view, options.bandwidth_exponent);
    if (est.d >= options.max_d) {
      std::ostringstream os;
      os << "estimated d=" << est.d << " for " << channel_name(labels, c) << " is at or above "
         << options.max_d << "; series is not stationary";
      throw Error(Errc::nonstationary_subject, os.str());
    }
    result.whittle.push_back(est);
    result.model.d(static_cast<Eigen::Index>(c)) = est.d;
    const auto y = fractional_filter(view, est.d, options.q);
    filtered.row(static_cast<Eigen::Index>(c)) = Eigen::Map<const Vector>(y.data(), series.size()).transpose();
  }

  try {
    const auto selection = bic_select(filtered, options.p_max);
    result.bic = selection.criteria;
    auto fit = ols_var_fit(filtered, selection.order);
    result.model.ar = std::move(fit.coeffs);
    result.model.sigma = std::move(fit.residual_cov);
  } catch (const Error& e) {
    if (e.code() != Errc::singular_fit || labels.empty()) throw;
    // Replace channel indices by labels in the message.
    std::string msg = e.what();
    std::ostringstream os;
    os << msg << " (labels:";
    for (std::size_t c = 0; c < labels.size(); ++c) os << ' ' << c << '=' << labels[c];
    os << ')';
    throw Error(Errc::singular_fit, os.str());
  }
  result.model.labels = labels;
  return result;
}

}  // namespace msvarfi
