#pragma once

#include <span>
#include <vector>

#include "stochdispatch/coremodel.hpp"
#include "stochdispatch/linprog.hpp"
#include "stochdispatch/recourse.hpp"

namespace stochdispatch {

enum class Provenance { kMonteCarlo, kImportance, kQuadrature };

const char* to_string(Provenance p);

// Scenario points (one error vector per scenario, one entry per wind
// plant) with their SAA weights. Weights need not sum to one.
struct WeightedScenarioSet {
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
  Provenance provenance = Provenance::kMonteCarlo;

  std::size_t size() const { return points.size(); }
  double weight_sum() const;
};

struct DispatchSolution {
  std::vector<double> dispatch;  // MW per generator
  double first_stage_cost = 0.0;
  double expected_recourse = 0.0;  // sum_i weight_i * loss_i
  std::vector<RecourseOutcome> outcomes;  // one per scenario
  double objective = 0.0;
  int lp_iterations = 0;
};

// Effective per-generator bounds: the [x_min, x_max] box intersected with
// the ramp window around prev_dispatch when one is given. Throws
// InputError when the intersection is empty.
struct DispatchBounds {
  std::vector<double> lower, upper;
};
DispatchBounds dispatch_bounds(const SystemModel& sys, const TimestepInput& step);

// min sum c_g x_g + L(x, 0): first stage plus one recourse block at zero error.
DispatchSolution solve_deterministic(const SystemModel& sys,
                                     const TimestepInput& step);

// Block LP: generator columns first, then one recourse block per scenario
// with its objective scaled by the scenario weight. Negative or non-finite
// weights are rejected.
lp::StandardFormLP assemble_extensive_form(const SystemModel& sys,
                                           const TimestepInput& step,
                                           const WeightedScenarioSet& scen);

DispatchSolution solve_stochastic(const SystemModel& sys,
                                  const TimestepInput& step,
                                  const WeightedScenarioSet& scen);

double first_stage_cost(const SystemModel& sys, std::span<const double> dispatch);

}  // namespace stochdispatch
