#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stochdispatch/coremodel.hpp"
#include "stochdispatch/dispatch.hpp"
#include "stochdispatch/harness.hpp"

namespace stochdispatch {

// Optional experiment settings read from a [run] section; CLI flags win.
struct RunSettings {
  std::optional<std::filesystem::path> timeseries;  // resolved against the config dir
  std::vector<Provenance> strategies;
  std::vector<int> scenario_counts;
  std::vector<std::uint64_t> seeds;
  std::optional<int> grid_nodes;
  std::optional<double> kernel_tau;
  std::optional<double> kernel_l;
};

struct RunConfig {
  std::filesystem::path system_config;
  std::filesystem::path timeseries;
  std::vector<Provenance> strategies{Provenance::kMonteCarlo, Provenance::kImportance,
                                     Provenance::kQuadrature};
  std::vector<int> scenario_counts{5, 10, 20, 50};
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output_dir = "results";
  int grid_nodes = 2001;
  std::optional<double> kernel_tau;
  std::optional<double> kernel_l;

  // Throws InputError when strategies or counts are empty or paths are missing.
  void validate() const;
};

Provenance parse_provenance(const std::string& name);  // "mc" | "is" | "bq"

// ISO-8601 "YYYY-MM-DDTHH:MM[:SS][Z]" (UTC) to epoch seconds and back.
std::int64_t parse_iso8601(const std::string& text);
std::string format_iso8601(std::int64_t epoch_seconds);

// Header `timestamp,load_mw,wind_mw`; columns may appear in any order.
// Throws ParseError carrying the 1-based line number.
Timeseries load_timeseries_csv(const std::filesystem::path& path);
void write_timeseries_csv(const Timeseries& ts, const std::filesystem::path& path);

// Sections [generator], [wind], [load] may repeat; keys are `key = value`,
// `#` starts a comment. Throws ParseError naming the key path.
struct SystemConfig {
  SystemModel system;
  RunSettings run;
};
SystemConfig load_system_config_full(const std::filesystem::path& path);
SystemModel load_system_config(const std::filesystem::path& path);

struct WrittenFiles {
  std::vector<std::filesystem::path> paths;
};

// costs_total.csv, costs_stage1.csv, costs_stage2.csv plus one
// timeseries_<strategy>_<N>[_seed<k>].csv per run. Values use %.12g.
WrittenFiles write_report(const CostSummary& summary, const ResultGrid& results,
                          const std::filesystem::path& outdir);

// Parsed form of a costs_*.csv table.
struct CostTable {
  std::vector<std::string> columns;  // strategy names
  std::vector<int> counts;
  std::vector<std::vector<double>> values;  // [row][column]
};
CostTable read_cost_table(const std::filesystem::path& path);

std::string format_number(double v);  // %.12g

}  // namespace stochdispatch
