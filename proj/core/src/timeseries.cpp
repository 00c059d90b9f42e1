#include "msvarfi/timeseries.hpp"

#include <algorithm>

namespace msvarfi {

std::optional<std::size_t> TimeSeriesSet::index_of(const std::string& label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

}  // namespace msvarfi
