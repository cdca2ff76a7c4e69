#pragma once

#include <optional>
#include <string>
#include <vector>

namespace stochdispatch {

struct ThermalGenerator {
  std::string id;
  double cost = 0.0;       // currency per MW
  double x_min = 0.0;      // MW
  double x_max = 0.0;      // MW
  double ramp_up = 0.0;    // MW per step
  double ramp_down = 0.0;  // MW per step
};

struct WindPlant {
  std::string id;
  double cost = 0.0;        // dispatch cost per MW
  double spill_cost = 0.0;  // per MW spilled
};

struct LoadBus {
  std::string id;
  double c_plus = 0.0;   // loss-of-load cost per MW
  double c_minus = 0.0;  // excess-capacity cost per MW
};

// Flattened single-bus system. Per-bus records are kept so the data model
// can grow a network later; only the aggregate power balance is modeled.
struct SystemModel {
  std::vector<ThermalGenerator> generators;
  std::vector<WindPlant> wind;
  std::vector<LoadBus> loads;

  double total_capacity() const;
};

// Data for one dispatch interval. `prev_dispatch` is absent for the very
// first interval of a horizon, in which case no ramp limits apply.
struct TimestepInput {
  std::vector<double> demand;         // MW per load bus
  std::vector<double> wind_forecast;  // MW per wind plant
  std::optional<std::vector<double>> prev_dispatch;  // MW per generator

  double total_demand() const;
};

struct Violation {
  std::string field;  // e.g. "generators[1].x_min"
  std::string message;
};

using ValidationReport = std::vector<Violation>;

ValidationReport validate_system(const SystemModel& model);

// Checks a step against the system it will be solved on (dimensions,
// signs, prev_dispatch inside the generator boxes).
ValidationReport validate_step(const SystemModel& model,
                               const TimestepInput& step);

std::string format_report(const ValidationReport& report);

// Throws InputError carrying the formatted report when it is nonempty.
void require_valid(const ValidationReport& report, const std::string& what);

// Defaults: c_w = 0, c_spl = 0, c_plus = 1000, c_minus = 50.
inline constexpr double kDefaultLossOfLoadCost = 1000.0;
inline constexpr double kDefaultExcessCost = 50.0;

}  // namespace stochdispatch
