#include "msvarfi/config.hpp"

#include "msvarfi/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace msvarfi {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) { throw Error(Errc::config, what); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t parse_count(std::string_view text, const char* field) {
  const std::string t = trim(text);
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    config_error(std::string(field) + ": expected a non-negative integer, got '" + t + "'");
  }
  return value;
}

double parse_real(std::string_view text, const char* field) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty() || !std::isfinite(value)) {
    config_error(std::string(field) + ": expected a number, got '" + t + "'");
  }
  return value;
}

}  // namespace

std::string_view to_string(Unit unit) noexcept { return unit == Unit::bits ? "bits" : "nats"; }

Unit parse_unit(std::string_view text) {
  if (text == "nats") return Unit::nats;
  if (text == "bits") return Unit::bits;
  config_error("unit must be 'nats' or 'bits', got '" + std::string(text) + "'");
}

double convert(double nats, Unit unit) { return unit == Unit::bits ? nats / std::log(2.0) : nats; }

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    out.push_back(trim(text.substr(start, end - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::size_t> parse_scales(std::string_view text) {
  const std::string t = trim(text);
  if (t.empty()) config_error("scales: empty value");
  std::vector<std::size_t> scales;
  if (t.find(',') != std::string::npos) {
    for (const auto& item : split_list(t)) {
      scales.push_back(parse_count(item, "scales"));
      if (scales.back() < 1 || (scales.size() > 1 && scales.back() <= scales[scales.size() - 2])) {
        config_error("scales: list must be positive and strictly increasing");
      }
    }
  } else if (const auto dash = t.find('-'); dash != std::string::npos) {
    const auto lo = parse_count(std::string_view(t).substr(0, dash), "scales");
    const auto hi = parse_count(std::string_view(t).substr(dash + 1), "scales");
    if (lo < 1 || hi < lo) config_error("scales: invalid range '" + t + "'");
    for (std::size_t s = lo; s <= hi; ++s) scales.push_back(s);
  } else {
    const auto count = parse_count(t, "scales");
    if (count < 1) config_error("scales: count must be at least 1");
    for (std::size_t s = 1; s <= count; ++s) scales.push_back(s);
  }
  return scales;
}

void AnalysisConfig::validate() const {
  if (q < 1 || q > 5000) config_error("q must lie in [1, 5000]");
  if (r < 2 || r % 2 != 0 || r > 1000) config_error("r must be even and lie in [2, 1000]");
  if (scales.empty()) config_error("scales must not be empty");
  for (std::size_t k = 0; k < scales.size(); ++k) {
    if (scales[k] < 1 || (k > 0 && scales[k] <= scales[k - 1])) {
      config_error("scales must be positive and strictly increasing");
    }
  }
  if (p_max < 1 || p_max > 200) config_error("p_max must lie in [1, 200]");
  if (!(bandwidth_exponent > 0.0 && bandwidth_exponent < 1.0)) {
    config_error("bandwidth_exponent must lie in (0, 1)");
  }
  if (!(dare_tolerance > 0.0 && dare_tolerance < 1e-3)) config_error("dare_tolerance must lie in (0, 1e-3)");
  if (dare_max_iterations < 1) config_error("dare_max_iterations must be at least 1");
  if (target.empty()) config_error("target label must not be empty");
  if (sources.size() != 2 || sources[0].empty() || sources[1].empty()) {
    config_error("exactly two non-empty source labels are required");
  }
  if (sources[0] == sources[1] || sources[0] == target || sources[1] == target) {
    config_error("target and source labels must be distinct");
  }
}

DecomposeConfig AnalysisConfig::decompose() const {
  DecomposeConfig out;
  out.scales = scales;
  out.q = q;
  out.r = r;
  out.dare.tolerance = dare_tolerance;
  out.dare.max_iterations = dare_max_iterations;
  return out;
}

FitOptions AnalysisConfig::fit() const {
  FitOptions out;
  out.q = q;
  out.p_max = p_max;
  out.bandwidth_exponent = bandwidth_exponent;
  return out;
}

std::string AnalysisConfig::to_json() const {
  json j;
  j["q"] = q;
  j["r"] = r;
  j["scales"] = scales;
  j["p_max"] = p_max;
  j["bandwidth_exponent"] = bandwidth_exponent;
  j["dare_tolerance"] = dare_tolerance;
  j["dare_max_iterations"] = dare_max_iterations;
  j["unit"] = std::string(to_string(unit));
  j["target"] = target;
  j["sources"] = sources;
  return j.dump();
}

std::string AnalysisConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : to_json()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void apply_json(AnalysisConfig& config, std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    config_error(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("config file must hold a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "q") config.q = value.get<std::size_t>();
      else if (key == "r") config.r = value.get<std::size_t>();
      else if (key == "scales") {
        config.scales = value.is_string() ? parse_scales(value.get<std::string>())
                                          : value.get<std::vector<std::size_t>>();
      } else if (key == "p_max") config.p_max = value.get<std::size_t>();
      else if (key == "bandwidth_exponent") config.bandwidth_exponent = value.get<double>();
      else if (key == "dare_tolerance") config.dare_tolerance = value.get<double>();
      else if (key == "dare_max_iterations") config.dare_max_iterations = value.get<std::size_t>();
      else if (key == "unit") config.unit = parse_unit(value.get<std::string>());
      else if (key == "target") config.target = value.get<std::string>();
      else if (key == "sources") {
        config.sources = value.is_string() ? split_list(value.get<std::string>())
                                           : value.get<std::vector<std::string>>();
      } else {
        config_error("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    config_error(std::string("config value has the wrong type: ") + e.what());
  }
}

std::vector<std::string> env_variable_names() {
  return {"MSVARFI_Q",          "MSVARFI_R",
          "MSVARFI_SCALES",     "MSVARFI_P_MAX",
          "MSVARFI_BANDWIDTH_EXPONENT", "MSVARFI_DARE_TOLERANCE",
          "MSVARFI_DARE_MAX_ITERATIONS", "MSVARFI_UNIT",
          "MSVARFI_TARGET",     "MSVARFI_SOURCES"};
}

void apply_env(AnalysisConfig& config, const EnvLookup& lookup) {
  auto get = [&lookup](const char* name) -> const char* {
    const char* v = lookup(name);
    return (v != nullptr && *v != '\0') ? v : nullptr;
  };
  if (const char* v = get("MSVARFI_Q")) config.q = parse_count(v, "MSVARFI_Q");
  if (const char* v = get("MSVARFI_R")) config.r = parse_count(v, "MSVARFI_R");
  if (const char* v = get("MSVARFI_SCALES")) config.scales = parse_scales(v);
  if (const char* v = get("MSVARFI_P_MAX")) config.p_max = parse_count(v, "MSVARFI_P_MAX");
  if (const char* v = get("MSVARFI_BANDWIDTH_EXPONENT")) {
    config.bandwidth_exponent = parse_real(v, "MSVARFI_BANDWIDTH_EXPONENT");
  }
  if (const char* v = get("MSVARFI_DARE_TOLERANCE")) {
    config.dare_tolerance = parse_real(v, "MSVARFI_DARE_TOLERANCE");
  }
  if (const char* v = get("MSVARFI_DARE_MAX_ITERATIONS")) {
    config.dare_max_iterations = parse_count(v, "MSVARFI_DARE_MAX_ITERATIONS");
  }
  if (const char* v = get("MSVARFI_UNIT")) config.unit = parse_unit(v);
  if (const char* v = get("MSVARFI_TARGET")) config.target = trim(v);
  if (const char* v = get("MSVARFI_SOURCES")) config.sources = split_list(v);
}

}  // namespace msvarfi
