#include "msvarfi/cli.hpp"

#include "msvarfi/config.hpp"
#include "msvarfi/error.hpp"
#include "msvarfi/estimation.hpp"
#include "msvarfi/io.hpp"
#include "msvarfi/simulate.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace msvarfi {

namespace {

constexpr std::size_t kShortSeriesWarning = 400;

std::string quote(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out;
}

int report(std::ostream& err, std::string_view code, std::string_view message, int status) {
  err << "error: code=" << code << " message=\"" << quote(message) << "\"\n";
  return status;
}

// Writes to the named file, or to `fallback` when the name is empty or "-".
void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& write) {
  if (path.empty() || path == "-") {
    write(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw Error(Errc::io, "cannot open '" + path + "' for writing");
  write(file);
  if (!file) throw Error(Errc::io, "failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<double> parse_reals(std::string_view text, std::size_t expected, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(Errc::argument, what + ": '" + item + "' is not a number");
    }
  }
  if (out.size() != expected) {
    throw Error(Errc::argument, what + " needs " + std::to_string(expected) + " comma-separated values");
  }
  return out;
}

/// Analysis flags shared by several subcommands; applied after file and env.
struct AnalysisFlags {
  std::size_t q = 0, r = 0, p_max = 0;
  std::string scales, unit, target, sources;
  std::vector<std::pair<CLI::Option*, std::function<void(AnalysisConfig&)>>> options;

  void add_model_flags(CLI::App& cmd) {
    options.emplace_back(cmd.add_option("--q", q, "fractional truncation lag"),
                         [this](AnalysisConfig& c) { c.q = q; });
  }
  void add_fit_flags(CLI::App& cmd) {
    options.emplace_back(cmd.add_option("--p-max", p_max, "largest VAR order tried by BIC"),
                         [this](AnalysisConfig& c) { c.p_max = p_max; });
  }
  void add_decompose_flags(CLI::App& cmd, bool roles) {
    options.emplace_back(cmd.add_option("--r", r, "FIR filter order"), [this](AnalysisConfig& c) { c.r = r; });
    options.emplace_back(cmd.add_option("--scales", scales, "N (1..N), a-b, or a comma list"),
                         [this](AnalysisConfig& c) { c.scales = parse_scales(scales); });
    options.emplace_back(cmd.add_option("--unit", unit, "nats or bits"),
                         [this](AnalysisConfig& c) { c.unit = parse_unit(unit); });
    if (!roles) return;
    options.emplace_back(cmd.add_option("--target", target, "target channel label"),
                         [this](AnalysisConfig& c) { c.target = target; });
    options.emplace_back(cmd.add_option("--sources", sources, "two source labels, e.g. S,R"),
                         [this](AnalysisConfig& c) { c.sources = split_list(sources); });
  }
  void apply(AnalysisConfig& config) const {
    for (const auto& [opt, set] : options) {
      if (opt->count() > 0) set(config);
    }
  }
};

std::size_t channel_index(const std::vector<std::string>& labels, const std::string& label) {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    std::string known;
    for (const auto& l : labels) known += (known.empty() ? "" : ",") + l;
    throw Error(Errc::argument, "unknown channel label '" + label + "' (model has " + known + ")");
  }
  return static_cast<std::size_t>(it - labels.begin());
}

VarfiModel benchmark_model(const std::string& d_text) {
  BenchmarkParams params;
  if (!d_text.empty()) {
    const auto d = parse_reals(d_text, 3, "--d");
    params.d_r = d[0], params.d_s = d[1], params.d_h = d[2];
  }
  return benchmark_var(params);
}

void print_fit_report(std::ostream& os, const FitResult& fit) {
  const auto& m = fit.model;
  const auto st = check_stationarity(m);
  os << "order p: " << m.order() << " (BIC)\n";
  for (std::size_t c = 0; c < m.channels(); ++c) {
    const auto& w = fit.whittle[c];
    os << "channel " << m.labels[c] << ": d=" << format_number(w.d) << " bandwidth=" << w.bandwidth
       << " memory=" << (st.memory[c] == MemoryClass::stationary ? "stationary" : "mean_reverting")
       << (w.nonstationary_warning ? " (estimate at upper bound)" : "") << '\n';
  }
  os << "spectral radius: " << format_number(st.spectral_radius) << (st.stable ? " (stable)" : " (unstable)")
     << '\n';
}

FitResult fit_from_csv(const std::string& path, const AnalysisConfig& config, std::ostream& err) {
  const auto series = preprocess(load_csv(path));
  if (series.samples() < kShortSeriesWarning) {
    err << "warning: " << series.samples() << " samples is short for long-memory estimation (recommended >= "
        << kShortSeriesWarning << ")\n";
  }
  for (const auto& range : series.meta.interpolated) {
    err << "note: channel " << series.labels[range.channel] << " samples " << range.first << ".." << range.last
        << " interpolated\n";
  }
  return fit_varfi(series.data, series.labels, config.fit());
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiscale information decomposition for VARFI processes", "msvarfi"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  std::string config_path;
  app.add_option("--config", config_path, "JSON analysis configuration");

  AnalysisFlags flags;

  // simulate
  auto* sim = app.add_subcommand("simulate", "write a realization of a model as CSV");
  std::string sim_model, sim_d, sim_output;
  std::size_t sim_samples = 1000, sim_burn_in = 10000;
  std::uint64_t sim_seed = 1;
  auto* sim_model_opt = sim->add_option("--model", sim_model, "model JSON");
  auto* sim_bench_opt = sim->add_flag("--benchmark", "use the built-in (R, S, H) benchmark model");
  sim_model_opt->excludes(sim_bench_opt);
  sim->add_option("--d", sim_d, "benchmark exponents d_r,d_s,d_h")->needs(sim_bench_opt);
  sim->add_option("--samples,-n", sim_samples, "number of samples")->check(CLI::Range(64ul, 100000000ul));
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--burn-in", sim_burn_in, "discarded leading samples");
  sim->add_option("--output,-o", sim_output, "output CSV (default stdout)");
  flags.add_model_flags(*sim);

  // fit
  auto* fit = app.add_subcommand("fit", "estimate a VARFI model from CSV data");
  std::string fit_data, fit_output;
  fit->add_option("--data", fit_data, "input CSV")->required();
  fit->add_option("--output,-o", fit_output, "model JSON (default stdout)");
  flags.add_model_flags(*fit);
  flags.add_fit_flags(*fit);

  // decompose
  auto* dec = app.add_subcommand("decompose", "multiscale transfer entropy decomposition");
  std::string dec_model, dec_data, dec_output, dec_format = "csv";
  auto* dec_model_opt = dec->add_option("--model", dec_model, "model JSON");
  auto* dec_data_opt = dec->add_option("--data", dec_data, "CSV data, fitted first");
  dec_model_opt->excludes(dec_data_opt);
  dec->add_option("--format", dec_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  dec->add_option("--output,-o", dec_output, "profile file (default stdout)");
  flags.add_model_flags(*dec);
  flags.add_fit_flags(*dec);
  flags.add_decompose_flags(*dec, true);

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "d-sweep experiments on the benchmark model");
  int experiment = 1;
  std::size_t points = 20;
  std::string bench_output;
  bench->add_option("--experiment", experiment, "1 sweeps d_s, 2 sweeps d_h")->required()->check(CLI::IsMember({1, 2}));
  bench->add_option("--points", points, "number of swept values")->check(CLI::Range(2ul, 1000ul));
  bench->add_option("--output,-o", bench_output, "sweep CSV (default stdout)");
  flags.add_decompose_flags(*bench, false);

  // plot
  auto* plot = app.add_subcommand("plot", "SVG chart of a profile or sweep CSV");
  std::string plot_input, plot_output, plot_measure = "T_i", plot_title;
  plot->add_option("--input", plot_input, "profile or sweep CSV")->required();
  plot->add_option("--output,-o", plot_output, "SVG file (default stdout)");
  plot->add_option("--measure", plot_measure, "column plotted for sweep tables");
  plot->add_option("--title", plot_title, "chart title");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return report(err, "usage", e.what(), 2);
  }

  try {
    AnalysisConfig config;
    if (!config_path.empty()) apply_json(config, read_file(config_path));
    apply_env(config, [](const char* name) { return std::getenv(name); });
    flags.apply(config);
    config.validate();

    if (sim->parsed()) {
      if (sim_model.empty() && !sim_bench_opt->count()) {
        throw Error(Errc::argument, "simulate needs --model or --benchmark");
      }
      const VarfiModel model = sim_model.empty() ? benchmark_model(sim_d) : load_model(sim_model).model;
      const auto series = simulate_realization(model, sim_samples, sim_seed, config.q, sim_burn_in);
      emit(sim_output, out, [&](std::ostream& os) { write_series_csv(os, series); });
    } else if (fit->parsed()) {
      const auto result = fit_from_csv(fit_data, config, err);
      ModelDocument doc{result.model, result.q, config.hash(), std::string(version())};
      const bool to_stdout = fit_output.empty() || fit_output == "-";
      print_fit_report(to_stdout ? err : out, result);
      emit(fit_output, out, [&](std::ostream& os) { os << model_to_json(doc) << '\n'; });
    } else if (dec->parsed()) {
      if (dec_model.empty() && dec_data.empty()) throw Error(Errc::argument, "decompose needs --model or --data");
      VarfiModel model;
      std::size_t q = config.q;
      if (!dec_model.empty()) {
        auto doc = load_model(dec_model);
        model = std::move(doc.model);
        q = doc.q;
      } else {
        model = fit_from_csv(dec_data, config, err).model;
      }
      if (model.labels.empty()) {
        for (std::size_t c = 0; c < model.channels(); ++c) model.labels.push_back(std::to_string(c));
      }
      if (config.sources.size() != 2) throw Error(Errc::argument, "exactly two source labels are required");
      const auto target = channel_index(model.labels, config.target);
      const auto si = channel_index(model.labels, config.sources[0]);
      const auto sk = channel_index(model.labels, config.sources[1]);
      auto dc = config.decompose();
      dc.q = q;
      const auto profile = decompose_multiscale(model, target, si, sk, dc);
      emit(dec_output, out, [&](std::ostream& os) {
        if (dec_format == "json") {
          write_profile_json(os, profile, config.unit, config.hash());
        } else {
          write_profile_csv(os, profile, config.unit);
        }
      });
    } else if (bench->parsed()) {
      SweepConfig sc;
      sc.points = points;
      sc.decompose = config.decompose();
      const auto sweep =
          sweep_experiment(experiment == 1 ? Experiment::source_memory : Experiment::target_memory, sc);
      emit(bench_output, out, [&](std::ostream& os) { write_sweep_csv(os, sweep, config.unit); });
    } else if (plot->parsed()) {
      const auto table = load_table(plot_input);
      const auto svg = render_svg(table, PlotOptions{plot_title, plot_measure});
      emit(plot_output, out, [&](std::ostream& os) { os << svg; });
    }
  } catch (const Error& e) {
    return report(err, to_string(e.code()), e.what(), 1);
  } catch (const std::exception& e) {
    return report(err, "internal", e.what(), 1);
  }
  return 0;
}

}  // namespace msvarfi
