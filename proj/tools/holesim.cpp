#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "holesim/config.hpp"
#include "holesim/plot.hpp"
#include "holesim/results.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

holesim::ProtocolKind parse_protocol(const std::string& s) {
  if (s == "proposed") return holesim::ProtocolKind::Proposed;
  if (s == "baseline") return holesim::ProtocolKind::Baseline;
  throw UsageError("unknown protocol '" + s + "' (expected proposed or baseline)");
}

// Writes to `path`, or stdout for "-".
template <class F>
void emit(const std::string& path, F&& body) {
  if (path == "-") {
    body(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  body(out);
  if (!out) throw std::runtime_error("error writing " + path);
}

int default_jobs() {
  if (const char* env = std::getenv("HOLESIM_JOBS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    std::cerr << "holesim: ignoring invalid HOLESIM_JOBS='" << env << "'\n";
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"holesim: coverage-hole recovery simulator for wireless sensor networks"};
  app.require_subcommand(1);

  std::string config_path, out_path = "-", trace_path, protocol;
  std::optional<std::uint64_t> seed;
  auto* run_cmd = app.add_subcommand("run", "run one scenario and print its CSV row");
  run_cmd->add_option("config", config_path, "scenario file")->required();
  run_cmd->add_option("--seed", seed, "override scenario.seed");
  run_cmd->add_option("--protocol", protocol, "override protocol.kind (proposed|baseline)");
  run_cmd->add_option("--out", out_path, "CSV output path, - for stdout");
  run_cmd->add_option("--trace", trace_path, "write a JSON-lines event log here");

  std::vector<int> nodes;
  std::vector<double> failures;
  int seeds = 25;
  std::vector<std::string> protocols{"proposed", "baseline"};
  int jobs = default_jobs();
  auto* sweep_cmd = app.add_subcommand("sweep", "run the Cartesian product of sweep axes, seeds and protocols");
  sweep_cmd->add_option("config", config_path, "scenario file")->required();
  sweep_cmd->add_option("--nodes", nodes, "node counts")->delimiter(',');
  sweep_cmd->add_option("--failures", failures, "failure percentages, applied at duration/2")->delimiter(',');
  sweep_cmd->add_option("--seeds", seeds, "seeds per point")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--protocols", protocols, "protocols")->delimiter(',');
  sweep_cmd->add_option("--jobs", jobs, "worker threads (default $HOLESIM_JOBS or 1)")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seed", seed, "first seed (default scenario.seed)");
  sweep_cmd->add_option("--out", out_path, "CSV output path, - for stdout");

  std::string csv_path, metric, x_axis = "nodes", svg_path;
  auto* plot_cmd = app.add_subcommand("plot", "plot a metric from a results CSV as SVG");
  plot_cmd->add_option("csv", csv_path, "results CSV")->required();
  plot_cmd->add_option("--metric", metric, "column to plot")->required();
  plot_cmd->add_option("--x", x_axis, "x axis: nodes or failures");
  plot_cmd->add_option("--out", svg_path, "SVG output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run_cmd) {
      holesim::ScenarioFile file = holesim::load_scenario_file(config_path);
      if (seed) file.scenario.seed = *seed;
      if (!protocol.empty()) file.scenario.protocol.kind = parse_protocol(protocol);
      file.scenario.record_trace = !trace_path.empty();
      const holesim::RunResult result = holesim::run(file.scenario);
      const holesim::ResultRow row = holesim::make_row(result);
      emit(out_path, [&](std::ostream& os) { holesim::write_csv(os, std::span(&row, 1)); });
      if (!trace_path.empty())
        emit(trace_path, [&](std::ostream& os) { holesim::write_trace(os, result, holesim::config_echo(file)); });
    } else if (*sweep_cmd) {
      holesim::SweepSpec spec;
      spec.base = holesim::load_scenario_file(config_path);
      if (seed) spec.base.scenario.seed = *seed;
      spec.nodes = nodes.empty() && failures.empty() ? spec.base.sweep_nodes : nodes;
      spec.failures = nodes.empty() && failures.empty() ? spec.base.sweep_failures : failures;
      if (spec.nodes.empty() && spec.failures.empty())
        throw UsageError("sweep needs --nodes or --failures (or sweep.nodes / sweep.failures in the file)");
      for (int n : spec.nodes)
        if (n < 0) throw UsageError("--nodes entries must be >= 0");
      for (double f : spec.failures)
        if (!(f >= 0.0 && f <= 100.0)) throw UsageError("--failures entries must be in [0, 100]");
      spec.seeds = seeds;
      spec.jobs = jobs;
      spec.protocols.clear();
      for (const auto& p : protocols) spec.protocols.push_back(parse_protocol(p));
      for (const auto& s : holesim::expand_sweep(spec))
        if (auto v = s.violations(); !v.empty()) throw holesim::ValidationError(std::move(v));
      const auto rows = holesim::run_sweep(spec);
      emit(out_path, [&](std::ostream& os) { holesim::write_csv(os, rows); });
    } else if (*plot_cmd) {
      std::ifstream in(csv_path, std::ios::binary);
      if (!in) throw std::runtime_error("cannot read " + csv_path);
      const holesim::CsvTable table = holesim::read_csv(in);
      std::string svg;
      try {
        svg = holesim::render_plot(table, metric, x_axis);
      } catch (const holesim::PlotError& e) {
        throw UsageError(e.what());
      }
      emit(svg_path, [&](std::ostream& os) { os << svg; });
    }
  } catch (const holesim::ValidationError& e) {
    std::cerr << "holesim: " << e.what() << "\n";
    return kExitValidation;
  } catch (const holesim::ConfigError& e) {
    std::cerr << "holesim: " << e.what() << "\n";
    return kExitValidation;
  } catch (const UsageError& e) {
    std::cerr << "holesim: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "holesim: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
