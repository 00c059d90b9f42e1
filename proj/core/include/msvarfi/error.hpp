#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace msvarfi {

/// Machine-readable failure categories. The CLI prints these verbatim.
enum class Errc {
  domain,
  argument,
  stability,
  riccati_divergence,
  ill_posed_model,
  insufficient_data,
  degenerate_input,
  singular_fit,
  nonstationary_subject,
  inconsistent_measures,
  parse,
  channel_count,
  data_quality,
  degenerate_channel,
  io,
  config,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised by pid_mmi when an individual TE exceeds the joint TE.
class InconsistentMeasures : public Error {
 public:
  InconsistentMeasures(double te_i, double te_k, double te_joint);

  double te_i;
  double te_k;
  double te_joint;
};

}  // namespace msvarfi
