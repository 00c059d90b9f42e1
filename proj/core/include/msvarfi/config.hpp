#pragma once

#include "msvarfi/estimation.hpp"
#include "msvarfi/infodecomp.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace msvarfi {

enum class Unit { nats, bits };

std::string_view to_string(Unit unit) noexcept;
Unit parse_unit(std::string_view text);
/// Display conversion; everything is computed in nats.
double convert(double nats, Unit unit);

/// Analysis parameters shared by the CLI commands. Precedence when loading:
/// command-line flags, then MSVARFI_* environment variables, then a JSON
/// config file, then these defaults.
struct AnalysisConfig {
  std::size_t q = 50;
  std::size_t r = 48;
  std::vector<std::size_t> scales = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  std::size_t p_max = 20;
  double bandwidth_exponent = 0.65;
  double dare_tolerance = 1e-12;
  std::size_t dare_max_iterations = 10000;
  Unit unit = Unit::nats;
  std::string target = "H";
  std::vector<std::string> sources = {"S", "R"};

  /// Throws Error(config) naming the first field out of range.
  void validate() const;

  DecomposeConfig decompose() const;
  FitOptions fit() const;
  /// Hex FNV-1a of the canonical JSON form.
  std::string hash() const;
  std::string to_json() const;
};

/// Overrides fields present in a JSON object; unknown keys are rejected.
void apply_json(AnalysisConfig& config, std::string_view json_text);

using EnvLookup = std::function<const char*(const char*)>;

/// Environment variable names, in the same order as AnalysisConfig fields.
inline constexpr std::string_view kEnvPrefix = "MSVARFI_";
std::vector<std::string> env_variable_names();

/// Applies MSVARFI_Q, MSVARFI_R, MSVARFI_SCALES, MSVARFI_P_MAX,
/// MSVARFI_BANDWIDTH_EXPONENT, MSVARFI_DARE_TOLERANCE,
/// MSVARFI_DARE_MAX_ITERATIONS, MSVARFI_UNIT, MSVARFI_TARGET, MSVARFI_SOURCES.
void apply_env(AnalysisConfig& config, const EnvLookup& lookup);

/// "12" means 1..12, "3-8" a closed range, "1,2,5,12" an explicit list.
std::vector<std::size_t> parse_scales(std::string_view text);
std::vector<std::string> split_list(std::string_view text);

}  // namespace msvarfi
