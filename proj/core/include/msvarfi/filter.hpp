#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace msvarfi {

/// Linear-phase low-pass FIR applied identically to every channel.
struct FilterSpec {
  double cutoff = 0.5;        ///< normalized, cycles/sample
  std::vector<double> taps;   ///< D_0 ... D_r

  std::size_t order() const { return taps.empty() ? 0 : taps.size() - 1; }
  bool is_bypass() const { return taps.size() == 1 && taps.front() == 1.0; }
};

/// Hamming-windowed sinc of even order r >= 2 with unit DC gain.
/// A cutoff of 0.5 removes nothing and returns the bypass filter D = [1].
FilterSpec fir_lowpass(std::size_t order, double cutoff);

/// Cutoff used to represent a process at decimation factor tau.
inline double scale_cutoff(std::size_t tau) { return 1.0 / (2.0 * static_cast<double>(tau)); }

/// D(e^{-i 2 pi f}) for normalized frequency f.
std::complex<double> frequency_response(const FilterSpec& filter, double f);

}  // namespace msvarfi
