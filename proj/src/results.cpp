#include "holesim/results.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

namespace holesim {

namespace {

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

std::string fixed(const std::optional<double>& v) { return v ? fixed(*v) : "NA"; }

std::string describe(const Scenario& s) {
  std::ostringstream os;
  os << s.id << " protocol=" << to_string(s.protocol.kind) << " nodes=" << s.node_count()
     << " failures=" << s.failure_percent_total() << " seed=" << s.seed;
  return os.str();
}

}  // namespace

ResultRow make_row(const RunResult& result) {
  return {result.scenario_id, result.seed, result.protocol, result.n_nodes, result.failure_pct,
          compute_metrics(result)};
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "scenario_id",     "seed",          "protocol",           "n_nodes",
      "failure_pct",     "avg_energy_j",  "load_balance",       "hole_cov_lifetime_s",
      "recovery_time_s", "network_lifetime_s", "holes_total",   "holes_unrecovered",
      "final_coverage_ratio"};
  return cols;
}

std::string csv_header() {
  std::string out = "# " + std::string(kCsvVersion) + " prng=" + std::string(Rng::kAlgorithm) + "\n";
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  return out + "\n";
}

std::string csv_row(const ResultRow& r) {
  const RunMetrics& m = r.metrics;
  std::string out;
  out += r.scenario_id + ",";
  out += std::to_string(r.seed) + ",";
  out += std::string(to_string(r.protocol)) + ",";
  out += std::to_string(r.n_nodes) + ",";
  out += fixed(r.failure_pct) + ",";
  out += fixed(m.avg_energy_consumed) + ",";
  out += fixed(m.load_balance) + ",";
  out += fixed(m.hole_coverage_lifetime) + ",";
  out += fixed(m.mean_recovery_time) + ",";
  out += fixed(m.network_lifetime) + ",";
  out += std::to_string(m.holes_total) + ",";
  out += std::to_string(m.holes_unrecovered) + ",";
  out += fixed(m.final_coverage_ratio);
  return out + "\n";
}

void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    const auto pa = to_string(a.protocol), pb = to_string(b.protocol);
    if (pa != pb) return pa < pb;
    if (a.n_nodes != b.n_nodes) return a.n_nodes < b.n_nodes;
    if (a.failure_pct != b.failure_pct) return a.failure_pct < b.failure_pct;
    if (a.seed != b.seed) return a.seed < b.seed;
    return a.scenario_id < b.scenario_id;
  });
}

void write_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << csv_header();
  for (const ResultRow& r : rows) out << csv_row(r);
}

std::vector<Scenario> expand_sweep(const SweepSpec& spec) {
  if (spec.seeds < 1) throw std::invalid_argument("sweep needs at least one seed");
  if (spec.protocols.empty()) throw std::invalid_argument("sweep needs at least one protocol");
  const Scenario& base = spec.base.scenario;
  std::vector<int> nodes = spec.nodes;
  if (nodes.empty()) nodes.push_back(base.nodes.count);
  std::vector<std::optional<double>> failures;
  for (double f : spec.failures) failures.emplace_back(f);
  if (failures.empty()) failures.emplace_back(std::nullopt);

  std::vector<Scenario> out;
  for (ProtocolKind p : spec.protocols)
    for (int n : nodes)
      for (const auto& f : failures)
        for (int i = 0; i < spec.seeds; ++i) {
          Scenario s = base;
          s.protocol.kind = p;
          s.nodes.count = n;
          if (f) s.failure_plan = {{base.duration_s / 2.0, *f}};
          s.seed = base.seed + static_cast<std::uint64_t>(i);
          out.push_back(std::move(s));
        }
  std::stable_sort(out.begin(), out.end(), [](const Scenario& a, const Scenario& b) {
    const auto pa = to_string(a.protocol.kind), pb = to_string(b.protocol.kind);
    if (pa != pb) return pa < pb;
    if (a.node_count() != b.node_count()) return a.node_count() < b.node_count();
    if (a.failure_percent_total() != b.failure_percent_total())
      return a.failure_percent_total() < b.failure_percent_total();
    return a.seed < b.seed;
  });
  return out;
}

std::vector<ResultRow> run_sweep(const SweepSpec& spec) {
  const std::vector<Scenario> scenarios = expand_sweep(spec);
  std::vector<std::optional<ResultRow>> rows(scenarios.size());
  std::vector<std::string> errors(scenarios.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= scenarios.size() || failed.load()) return;
      try {
        rows[i] = make_row(run(scenarios[i]));
      } catch (const std::exception& e) {
        errors[i] = e.what();
        failed.store(true);
      }
    }
  };
  const int jobs = std::clamp(spec.jobs, 1, static_cast<int>(std::max<std::size_t>(1, scenarios.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < scenarios.size(); ++i)
    if (!errors[i].empty()) throw SweepError("run failed for " + describe(scenarios[i]) + ": " + errors[i]);

  std::vector<ResultRow> out;
  out.reserve(rows.size());
  for (auto& r : rows) out.push_back(std::move(*r));
  sort_rows(out);
  return out;
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  return std::nullopt;
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (t.columns.empty()) {
      t.columns = split(line);
      continue;
    }
    auto cells = split(line);
    if (cells.size() != t.columns.size())
      throw std::runtime_error("csv row has " + std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(t.columns.size()));
    t.rows.push_back(std::move(cells));
  }
  if (t.columns.empty()) throw std::runtime_error("csv has no header");
  return t;
}

void write_trace(std::ostream& out, const RunResult& result, const nlohmann::json& config) {
  nlohmann::json meta{{"type", "meta"},
                      {"format", std::string(kCsvVersion)},
                      {"scenario_id", result.scenario_id},
                      {"seed", result.seed},
                      {"protocol", std::string(to_string(result.protocol))},
                      {"config", config}};
  out << meta.dump() << "\n";
  for (const TraceEntry& e : result.trace) {
    nlohmann::json j{{"t", e.time}, {"event", e.event}};
    if (e.node >= 0) j["node"] = e.node;
    if (e.hole >= 0) j["hole"] = e.hole;
    if (e.cluster >= 0) j["cluster"] = e.cluster;
    if (e.value != 0.0) j["value"] = e.value;
    if (!e.detail.empty()) j["detail"] = e.detail;
    out << j.dump() << "\n";
  }
}

}  // namespace holesim
