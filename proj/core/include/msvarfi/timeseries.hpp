#pragma once

#include "msvarfi/model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace msvarfi {

/// Inclusive run of samples [first, last] that were filled by interpolation.
struct InterpolatedRange {
  std::size_t channel = 0;
  std::size_t first = 0;
  std::size_t last = 0;
};

struct SeriesMeta {
  std::string source;
  bool normalized = false;
  std::vector<InterpolatedRange> interpolated;
  std::optional<std::uint64_t> seed;
  std::string generator;  ///< RNG description for simulated data
};

/// Labeled multichannel series; data is channels x samples, NaN marks a missing value.
struct TimeSeriesSet {
  std::vector<std::string> labels;
  Matrix data;
  SeriesMeta meta;

  std::size_t channels() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t samples() const { return static_cast<std::size_t>(data.cols()); }

  /// Index of a label, or nullopt.
  std::optional<std::size_t> index_of(const std::string& label) const;
};

}  // namespace msvarfi
