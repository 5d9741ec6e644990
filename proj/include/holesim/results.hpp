#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "holesim/config.hpp"
#include "holesim/metrics.hpp"

namespace holesim {

inline constexpr std::string_view kCsvVersion = "holesim-results v1";

struct ResultRow {
  std::string scenario_id;
  std::uint64_t seed = 0;
  ProtocolKind protocol = ProtocolKind::Proposed;
  int n_nodes = 0;
  double failure_pct = 0.0;
  RunMetrics metrics;
};

ResultRow make_row(const RunResult& result);

/// Column names in output order.
const std::vector<std::string>& csv_columns();
/// Comment line with the format version and PRNG, then the header line.
std::string csv_header();
/// One data line; absent values are written as NA.
std::string csv_row(const ResultRow& row);
/// Canonical order: (protocol, n_nodes, failure_pct, seed, scenario_id).
void sort_rows(std::vector<ResultRow>& rows);
void write_csv(std::ostream& out, std::span<const ResultRow> rows);

struct SweepSpec {
  ScenarioFile base;
  std::vector<int> nodes;        // empty: keep the base node count
  std::vector<double> failures;  // empty: keep the base failure plan
  int seeds = 25;                // seeds base.seed, base.seed + 1, ...
  std::vector<ProtocolKind> protocols{ProtocolKind::Proposed, ProtocolKind::Baseline};
  int jobs = 1;
};

/// Every scenario of the Cartesian product, in canonical row order.
std::vector<Scenario> expand_sweep(const SweepSpec& spec);

class SweepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs all scenarios on up to `spec.jobs` threads and returns sorted rows.
/// The first failing scenario (in canonical order) aborts the sweep.
std::vector<ResultRow> run_sweep(const SweepSpec& spec);

/// A parsed results file: column name -> values per row ("NA" kept as text).
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in);

/// JSON-lines event log: a metadata line echoing `config`, then one line per
/// trace entry.
void write_trace(std::ostream& out, const RunResult& result, const nlohmann::json& config);

}  // namespace holesim
