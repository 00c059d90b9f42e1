#include "msvarfi/filter.hpp"

#include "msvarfi/error.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace msvarfi {

namespace {

// sinc(x) = sin(pi x) / (pi x), exactly zero at nonzero integers.
double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double nearest = std::round(x);
  if (nearest != 0.0 && std::abs(x - nearest) < 1e-12) return 0.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

FilterSpec fir_lowpass(std::size_t order, double cutoff) {
  if (!(cutoff > 0.0 && cutoff <= 0.5)) {
    std::ostringstream os;
    os << "cutoff " << cutoff << " outside (0, 0.5]";
    throw Error(Errc::argument, os.str());
  }
  if (cutoff == 0.5) return FilterSpec{0.5, {1.0}};
  if (order < 2 || order % 2 != 0) {
    std::ostringstream os;
    os << "filter order " << order << " must be even and at least 2";
    throw Error(Errc::argument, os.str());
  }

  const double half = static_cast<double>(order) / 2.0;
  const double denom = static_cast<double>(order);
  std::vector<double> taps(order + 1);
  for (std::size_t k = 0; k <= order; ++k) {
    const double window =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / denom);
    taps[k] = sinc(2.0 * cutoff * (static_cast<double>(k) - half)) * window;
  }
  // Mirror so that D_k == D_{r-k} holds bit-for-bit.
  for (std::size_t k = 0; k < order / 2; ++k) taps[order - k] = taps[k];
  const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (double& t : taps) t /= sum;
  return FilterSpec{cutoff, std::move(taps)};
}

std::complex<double> frequency_response(const FilterSpec& filter, double f) {
  std::complex<double> h{0.0, 0.0};
  for (std::size_t k = 0; k < filter.taps.size(); ++k) {
    h += filter.taps[k] * std::polar(1.0, -2.0 * std::numbers::pi * f * static_cast<double>(k));
  }
  return h;
}

}  // namespace msvarfi
