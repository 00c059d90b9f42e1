#include "msvarfi/io.hpp"

#include "msvarfi/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#ifndef MSVARFI_VERSION
#define MSVARFI_VERSION "0.0.0"
#endif

namespace msvarfi {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_double(const std::string& cell, double& value) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc{} && ptr == last && std::isfinite(value);
}

bool is_skippable(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t.front() == '#';
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_row(std::ostream& out, std::initializer_list<double> lead, const ScaleMeasures& m, Unit unit) {
  bool first = true;
  for (double v : lead) {
    if (!first) out << ',';
    out << format_number(v);
    first = false;
  }
  for (double v : measure_values(m)) out << ',' << format_number(convert(v, unit));
  out << '\n';
}

}  // namespace

std::string_view version() noexcept { return MSVARFI_VERSION; }

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

TimeSeriesSet parse_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    header = split_cells(line);
    break;
  }
  if (header.empty()) throw Error(Errc::parse, source + ": missing header row");
  if (header.size() < 2) {
    throw Error(Errc::channel_count,
                source + ": at least 2 channels are required, found " + std::to_string(header.size()));
  }
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].empty()) throw Error(Errc::parse, source + ": empty label in column " + std::to_string(c + 1));
    if (std::find(header.begin(), header.begin() + static_cast<std::ptrdiff_t>(c), header[c]) !=
        header.begin() + static_cast<std::ptrdiff_t>(c)) {
      throw Error(Errc::parse, source + ": duplicate label '" + header[c] + "'");
    }
  }

  std::vector<std::vector<double>> columns(header.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    ++row;
    const auto cells = split_cells(line);
    if (cells.size() != header.size()) {
      std::ostringstream os;
      os << source << ": row " << row << " (line " << line_no << ") has " << cells.size()
         << " cells, expected " << header.size();
      throw Error(Errc::parse, os.str());
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double value = std::numeric_limits<double>::quiet_NaN();
      if (!cells[c].empty() && !parse_double(cells[c], value)) {
        std::ostringstream os;
        os << source << ": row " << row << " (line " << line_no << "), column " << c + 1 << " ('"
           << header[c] << "'): cannot parse '" << cells[c] << "' as a number";
        throw Error(Errc::parse, os.str());
      }
      columns[c].push_back(value);
    }
  }

  TimeSeriesSet ts;
  ts.labels = header;
  ts.data.resize(static_cast<Eigen::Index>(header.size()), static_cast<Eigen::Index>(row));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (std::size_t n = 0; n < row; ++n) {
      ts.data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(n)) = columns[c][n];
    }
  }
  ts.meta.source = source;
  return ts;
}

TimeSeriesSet load_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_csv(in, path.string());
}

void write_series_csv(std::ostream& out, const TimeSeriesSet& series) {
  if (series.meta.seed) {
    out << "# seed=" << *series.meta.seed << " generator=" << series.meta.generator << '\n';
  }
  for (std::size_t c = 0; c < series.labels.size(); ++c) out << (c ? "," : "") << series.labels[c];
  out << '\n';
  for (Eigen::Index n = 0; n < series.data.cols(); ++n) {
    for (Eigen::Index c = 0; c < series.data.rows(); ++c) {
      if (c) out << ',';
      const double v = series.data(c, n);
      if (std::isfinite(v)) out << format_number(v);
    }
    out << '\n';
  }
}

TimeSeriesSet preprocess(const TimeSeriesSet& series, const PreprocessOptions& options) {
  TimeSeriesSet out = series;
  const Eigen::Index N = series.data.cols();
  for (Eigen::Index c = 0; c < series.data.rows(); ++c) {
    const std::string name =
        static_cast<std::size_t>(c) < series.labels.size() ? series.labels[static_cast<std::size_t>(c)]
                                                           : std::to_string(c);
    auto row = out.data.row(c);
    std::vector<Eigen::Index> valid;
    for (Eigen::Index n = 0; n < N; ++n) {
      if (std::isfinite(row(n))) valid.push_back(n);
    }
    const double missing = N ? static_cast<double>(N - static_cast<Eigen::Index>(valid.size())) / static_cast<double>(N) : 0.0;
    if (valid.empty() || missing > options.max_missing_fraction) {
      std::ostringstream os;
      os << "channel '" << name << "' has " << missing * 100.0 << "% missing samples (limit "
         << options.max_missing_fraction * 100.0 << "%)";
      throw Error(Errc::data_quality, os.str());
    }

    // Fill each gap between consecutive valid samples (and both edges).
    Eigen::Index prev = -1;
    for (std::size_t v = 0; v <= valid.size(); ++v) {
      const Eigen::Index next = v < valid.size() ? valid[v] : N;
      if (next - prev > 1) {
        for (Eigen::Index n = prev + 1; n < next; ++n) {
          if (prev < 0) {
            row(n) = row(next);
          } else if (next >= N) {
            row(n) = row(prev);
          } else {
            const double w = static_cast<double>(n - prev) / static_cast<double>(next - prev);
            row(n) = (1.0 - w) * row(prev) + w * row(next);
          }
        }
        out.meta.interpolated.push_back({static_cast<std::size_t>(c), static_cast<std::size_t>(prev + 1),
                                         static_cast<std::size_t>(next - 1)});
      }
      prev = next;
    }

    const double mean = row.mean();
    row.array() -= mean;
    const double var = N > 1 ? row.squaredNorm() / static_cast<double>(N - 1) : 0.0;
    if (!(var > 0.0) || std::sqrt(var) <= 1e-12 * std::max(1.0, std::abs(mean))) {
      throw Error(Errc::degenerate_channel, "channel '" + name + "' has zero variance");
    }
    row /= std::sqrt(var);
  }
  out.meta.normalized = true;
  return out;
}

std::string model_to_json(const ModelDocument& doc) {
  const auto& m = doc.model;
  json j;
  j["format"] = "msvarfi-model";
  j["version"] = doc.version.empty() ? std::string(version()) : doc.version;
  j["M"] = m.channels();
  j["p"] = m.order();
  j["q"] = doc.q;
  std::vector<double> d(static_cast<std::size_t>(m.d.size()));
  for (Eigen::Index i = 0; i < m.d.size(); ++i) d[static_cast<std::size_t>(i)] = m.d(i);
  j["d"] = d;
  auto matrix = [](const Matrix& a) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(a.rows()));
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      for (Eigen::Index c = 0; c < a.cols(); ++c) rows[static_cast<std::size_t>(r)].push_back(a(r, c));
    }
    return rows;
  };
  json lags = json::array();
  for (const auto& a : m.ar) lags.push_back(matrix(a));
  j["A"] = lags;
  j["SigmaE"] = matrix(m.sigma);
  j["labels"] = m.labels;
  j["config_hash"] = doc.config_hash;
  return j.dump(2);
}

ModelDocument model_from_json(std::string_view text) {
  ModelDocument doc;
  try {
    const json j = json::parse(text);
    const auto M = j.at("M").get<std::size_t>();
    const auto p = j.at("p").get<std::size_t>();
    doc.q = j.at("q").get<std::size_t>();
    doc.version = j.value("version", std::string{});
    doc.config_hash = j.value("config_hash", std::string{});
    const auto mi = static_cast<Eigen::Index>(M);
    auto matrix = [mi](const json& rows, const std::string& what) {
      if (!rows.is_array() || rows.size() != static_cast<std::size_t>(mi)) {
        throw Error(Errc::parse, "model JSON: " + what + " must have M rows");
      }
      Matrix a(mi, mi);
      for (Eigen::Index r = 0; r < mi; ++r) {
        const auto& row = rows.at(static_cast<std::size_t>(r));
        if (!row.is_array() || row.size() != static_cast<std::size_t>(mi)) {
          throw Error(Errc::parse, "model JSON: " + what + " must have M columns");
        }
        for (Eigen::Index c = 0; c < mi; ++c) a(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
      }
      return a;
    };
    const auto& lags = j.at("A");
    if (!lags.is_array() || lags.size() != p) throw Error(Errc::parse, "model JSON: A must hold p matrices");
    for (std::size_t k = 0; k < p; ++k) doc.model.ar.push_back(matrix(lags.at(k), "A[" + std::to_string(k) + "]"));
    doc.model.sigma = matrix(j.at("SigmaE"), "SigmaE");
    const auto d = j.at("d").get<std::vector<double>>();
    if (d.size() != M) throw Error(Errc::parse, "model JSON: d must have M entries");
    doc.model.d = Eigen::Map<const Vector>(d.data(), mi);
    doc.model.labels = j.value("labels", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("model JSON: ") + e.what());
  }
  validate(doc.model);
  return doc;
}

ModelDocument load_model(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

void save_model(const std::filesystem::path& path, const ModelDocument& doc) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot open '" + path.string() + "' for writing");
  out << model_to_json(doc) << '\n';
}

std::array<double, 8> measure_values(const ScaleMeasures& m) {
  return {m.te_i, m.te_k, m.te_joint, m.interaction, m.redundancy, m.synergy, m.unique_i, m.unique_k};
}

void write_profile_csv(std::ostream& out, const DecompositionProfile& profile, Unit unit) {
  out << "# target=" << profile.target << " sources=" << profile.source_i << ',' << profile.source_k
      << " unit=" << to_string(unit) << '\n';
  for (std::size_t c = 0; c < kProfileColumns.size(); ++c) out << (c ? "," : "") << kProfileColumns[c];
  out << '\n';
  for (const auto& m : profile.measures) write_row(out, {static_cast<double>(m.tau)}, m, unit);
}

void write_profile_json(std::ostream& out, const DecompositionProfile& profile, Unit unit,
                        const std::string& config_hash) {
  json j;
  j["target"] = profile.target;
  j["sources"] = {profile.source_i, profile.source_k};
  j["unit"] = std::string(to_string(unit));
  j["scales"] = profile.scales;
  json rows = json::array();
  for (const auto& m : profile.measures) {
    json row;
    row["tau"] = m.tau;
    const auto values = measure_values(m);
    for (std::size_t c = 0; c < values.size(); ++c) {
      row[std::string(kProfileColumns[c + 1])] = convert(values[c], unit);
    }
    rows.push_back(row);
  }
  j["measures"] = rows;
  j["provenance"] = {{"model_hash", hex64(profile.model_hash)},
                     {"q", profile.q},
                     {"r", profile.r},
                     {"config_hash", config_hash},
                     {"version", std::string(version())}};
  out << j.dump(2) << '\n';
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep, Unit unit) {
  const auto& first = sweep.profiles.empty() ? DecompositionProfile{} : sweep.profiles.front();
  out << "# experiment=" << static_cast<int>(sweep.experiment) << " swept=" << sweep.swept
      << " target=" << first.target << " sources=" << first.source_i << ',' << first.source_k
      << " unit=" << to_string(unit) << '\n';
  out << 'd';
  for (const auto& col : kProfileColumns) out << ',' << col;
  out << '\n';
  for (std::size_t k = 0; k < sweep.profiles.size(); ++k) {
    for (const auto& m : sweep.profiles[k].measures) {
      write_row(out, {sweep.values[k], static_cast<double>(m.tau)}, m, unit);
    }
  }
}

std::ptrdiff_t Table::column(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  return it == columns.end() ? -1 : it - columns.begin();
}

Table read_table(std::istream& in) {
  Table t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      t.comments.push_back(trim(std::string_view(s).substr(1)));
      continue;
    }
    if (t.columns.empty()) {
      t.columns = split_cells(s);
      continue;
    }
    const auto cells = split_cells(s);
    if (cells.size() != t.columns.size()) {
      throw Error(Errc::parse, "table line " + std::to_string(line_no) + " has the wrong number of cells");
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_double(cells[c], row[c])) {
        throw Error(Errc::parse, "table line " + std::to_string(line_no) + ": cannot parse '" + cells[c] + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw Error(Errc::parse, "table has no header row");
  return t;
}

Table load_table(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_table(in);
}

}  // namespace msvarfi
