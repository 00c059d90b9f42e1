#include "msvarfi/error.hpp"

#include <sstream>

namespace msvarfi {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::domain: return "domain";
    case Errc::argument: return "argument";
    case Errc::stability: return "stability";
    case Errc::riccati_divergence: return "riccati_divergence";
    case Errc::ill_posed_model: return "ill_posed_model";
    case Errc::insufficient_data: return "insufficient_data";
    case Errc::degenerate_input: return "degenerate_input";
    case Errc::singular_fit: return "singular_fit";
    case Errc::nonstationary_subject: return "nonstationary_subject";
    case Errc::inconsistent_measures: return "inconsistent_measures";
    case Errc::parse: return "parse";
    case Errc::channel_count: return "channel_count";
    case Errc::data_quality: return "data_quality";
    case Errc::degenerate_channel: return "degenerate_channel";
    case Errc::io: return "io";
    case Errc::config: return "config";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

namespace {

std::string describe(double te_i, double te_k, double te_joint) {
  std::ostringstream os;
  os.precision(17);
  os << "individual transfer entropy exceeds joint: T_i=" << te_i
     << " T_k=" << te_k << " T_joint=" << te_joint;
  return os.str();
}

}  // namespace

InconsistentMeasures::InconsistentMeasures(double i, double k, double joint)
    : Error(Errc::inconsistent_measures, describe(i, k, joint)),
      te_i(i),
      te_k(k),
      te_joint(joint) {}

}  // namespace msvarfi
