#pragma once

#include "msvarfi/config.hpp"
#include "msvarfi/infodecomp.hpp"
#include "msvarfi/simulate.hpp"
#include "msvarfi/timeseries.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace msvarfi {

/// Library version written into model documents.
std::string_view version() noexcept;

// --- input series -----------------------------------------------------------

/// Comma-separated, header row of labels, one sample per row, empty cell =
/// missing. Lines starting with '#' are skipped.
TimeSeriesSet parse_csv(std::istream& in, const std::string& source = "<stream>");
TimeSeriesSet load_csv(const std::filesystem::path& path);
void write_series_csv(std::ostream& out, const TimeSeriesSet& series);

struct PreprocessOptions {
  double max_missing_fraction = 0.05;
};

/// Linear interpolation of missing samples (edges take the nearest valid
/// value), then per-channel zero mean and unit sample variance.
TimeSeriesSet preprocess(const TimeSeriesSet& series, const PreprocessOptions& options = {});

// --- model documents ----------------------------------------------------------

struct ModelDocument {
  VarfiModel model;
  std::size_t q = 50;
  std::string config_hash;
  std::string version;
};

std::string model_to_json(const ModelDocument& doc);
ModelDocument model_from_json(std::string_view text);
ModelDocument load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const ModelDocument& doc);

// --- profiles -----------------------------------------------------------------

inline constexpr std::array<std::string_view, 9> kProfileColumns = {
    "tau", "T_i", "T_k", "T_joint", "I", "R", "S", "U_i", "U_k"};

/// The eight measures in column order.
std::array<double, 8> measure_values(const ScaleMeasures& m);

void write_profile_csv(std::ostream& out, const DecompositionProfile& profile, Unit unit);
void write_profile_json(std::ostream& out, const DecompositionProfile& profile, Unit unit,
                        const std::string& config_hash = {});
void write_sweep_csv(std::ostream& out, const SweepResult& sweep, Unit unit);

/// Numeric CSV with '#' comment lines, as written by the functions above.
struct Table {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::ptrdiff_t column(std::string_view name) const;
};

Table read_table(std::istream& in);
Table load_table(const std::filesystem::path& path);

/// %.12g
std::string format_number(double value);

// --- charts -------------------------------------------------------------------

struct PlotOptions {
  std::string title;
  std::string measure = "T_i";  ///< y column when the table is a sweep
};

/// Minimal SVG line chart. A profile table gets one polyline per measure
/// column; a sweep table (first column "d") gets one polyline per swept value.
std::string render_svg(const Table& table, const PlotOptions& options = {});

}  // namespace msvarfi
