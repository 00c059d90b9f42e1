#include "msvarfi/error.hpp"
#include "msvarfi/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace msvarfi {

namespace {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<Series> profile_series(const Table& t) {
  const auto tau = t.column("tau");
  if (tau < 0) throw Error(Errc::parse, "plot: table has no 'tau' column");
  std::vector<Series> out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (static_cast<std::ptrdiff_t>(c) == tau) continue;
    Series s{t.columns[c], {}};
    for (const auto& row : t.rows) s.points.emplace_back(row[static_cast<std::size_t>(tau)], row[c]);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Series> sweep_series(const Table& t, const std::string& measure) {
  const auto d = t.column("d");
  const auto tau = t.column("tau");
  const auto y = t.column(measure);
  if (tau < 0) throw Error(Errc::parse, "plot: table has no 'tau' column");
  if (y < 0) throw Error(Errc::argument, "plot: table has no column '" + measure + "'");
  std::map<double, Series> groups;
  for (const auto& row : t.rows) {
    auto& s = groups[row[static_cast<std::size_t>(d)]];
    if (s.name.empty()) s.name = "d=" + format_number(row[static_cast<std::size_t>(d)]);
    s.points.emplace_back(row[static_cast<std::size_t>(tau)], row[static_cast<std::size_t>(y)]);
  }
  std::vector<Series> out;
  for (auto& [key, s] : groups) out.push_back(std::move(s));
  return out;
}

}  // namespace

std::string render_svg(const Table& table, const PlotOptions& options) {
  const bool sweep = table.column("d") >= 0;
  const auto series = sweep ? sweep_series(table, options.measure) : profile_series(table);

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  y0 = std::min(y0, 0.0);

  constexpr double W = 720, H = 440, left = 70, right = 170, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::string title = options.title;
  if (title.empty()) title = sweep ? options.measure + " vs tau" : "measures vs tau";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
     << "</text>\n";

  os << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n"
     << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
     << "\"/>\n"
     << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n"
     << "</g>\n";
  os << "<g class=\"ticks\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
       << format_number(std::round(xv * 100) / 100) << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
       << format_number(std::round(yv * 1000) / 1000) << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">tau</text>\n";
  os << "</g>\n";

  os << "<g class=\"series\" fill=\"none\" stroke-width=\"1.5\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    os << "<polyline stroke=\"" << kPalette[i % kPalette.size()] << "\" points=\"";
    bool first = true;
    for (const auto& [x, y] : series[i].points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      os << (first ? "" : " ") << format_number(px(x)) << ',' << format_number(py(y));
      first = false;
    }
    os << "\"><title>" << escape(series[i].name) << "</title></polyline>\n";
  }
  os << "</g>\n";

  os << "<g class=\"legend\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = top + 10 + 16.0 * static_cast<double>(i);
    os << "<line x1=\"" << left + pw + 16 << "\" y1=\"" << y << "\" x2=\"" << left + pw + 36 << "\" y2=\"" << y
       << "\" stroke=\"" << kPalette[i % kPalette.size()] << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 42 << "\" y=\"" << y + 4 << "\">" << escape(series[i].name) << "</text>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace msvarfi
