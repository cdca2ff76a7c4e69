#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stochdispatch/coremodel.hpp"
#include "stochdispatch/dispatch.hpp"
#include "stochdispatch/forecastdist.hpp"
#include "stochdispatch/scenarios.hpp"

namespace stochdispatch {

// Actuals on a 5-minute grid. Timestamps are seconds since the Unix epoch (UTC).
struct Timeseries {
  std::vector<std::int64_t> timestamps;
  std::vector<double> load;  // MW, aggregate
  std::vector<double> wind;  // MW, aggregate plant

  std::size_t size() const { return timestamps.size(); }
  double mean_load() const;
};

inline constexpr std::int64_t kStepSeconds = 300;

// Throws InputError naming the first offending row.
void validate_timeseries(const Timeseries& ts);

struct SimStep {
  std::int64_t timestamp = 0;
  double load = 0.0;
  double wind_forecast = 0.0;
  double realized_error = 0.0;
  std::vector<double> dispatch;
  double first_stage_cost = 0.0;
  double second_stage_cost = 0.0;  // realized at the actual error
  double expected_recourse = 0.0;  // in-sample SAA estimate
  double loss_of_load = 0.0;       // MW
};

struct SimResult {
  Provenance strategy = Provenance::kMonteCarlo;
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<SimStep> steps;
  double total_first_stage = 0.0;
  double total_second_stage = 0.0;
  double total_expected_recourse = 0.0;

  double total() const { return total_first_stage + total_second_stage; }
};

struct CostBreakdown {
  double wind = 0.0;
  double spill = 0.0;
  double loss_of_load = 0.0;
  double excess = 0.0;
  double total = 0.0;  // equals the recourse loss
};

CostBreakdown evaluate_realized_cost(std::span<const double> dispatch,
                                     std::span<const double> realized_error,
                                     const SystemModel& sys, const TimestepInput& step);

// Builds the dispatch input for step t: demand split evenly over buses,
// persistence wind forecast (actual at t-1; actual at t for t = 0).
TimestepInput make_step(const SystemModel& sys, const Timeseries& ts, std::size_t t,
                        std::optional<std::vector<double>> prev);

// Replays the series. Step 0 is seeded by a deterministic solve; steps
// 1..T-1 solve the stochastic dispatch and are charged their realized
// second-stage cost. BQ scenarios may be supplied precomputed, otherwise
// they are built once here.
SimResult run_rolling_horizon(const SystemModel& sys, const Timeseries& ts,
                              const StrategyConfig& strat, const ErrorDistribution& p,
                              const WeightedScenarioSet* bq_scenarios = nullptr);

// Mean over runs in each (strategy, n) cell.
struct CostSummary {
  std::vector<int> counts;                 // table rows
  std::vector<Provenance> strategies;      // table columns
  // [row][column]; NaN where no run exists.
  std::vector<std::vector<double>> total, first_stage, second_stage;
};

using ResultGrid = std::map<Provenance, std::map<int, std::vector<SimResult>>>;

CostSummary summarize(const ResultGrid& results);

struct ExperimentConfig {
  std::vector<Provenance> strategies{Provenance::kMonteCarlo, Provenance::kImportance,
                                     Provenance::kQuadrature};
  std::vector<int> scenario_counts{5, 10, 20, 50};
  std::vector<std::uint64_t> seeds{1};
  int grid_nodes = ErrorDistribution::kDefaultNodes;
  std::optional<double> kernel_tau;  // defaults from default_kernel
  std::optional<double> kernel_l;
};

struct ExperimentOutput {
  TParams fit;  // scale 0 marks a point mass (constant persistence errors)
  KernelConfig kernel;
  ResultGrid results;
  CostSummary summary;
};

// Fits p once on the persistence errors of the whole wind series, then
// runs every (strategy, N, seed). BQ runs are computed once per N and
// reused for every seed.
ExperimentOutput run_experiment(const SystemModel& sys, const Timeseries& ts,
                                const ExperimentConfig& cfg);

}  // namespace stochdispatch
