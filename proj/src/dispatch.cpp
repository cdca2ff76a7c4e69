#include "stochdispatch/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "stochdispatch/errors.hpp"

namespace stochdispatch {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::kMonteCarlo:
      return "mc";
    case Provenance::kImportance:
      return "is";
    case Provenance::kQuadrature:
      return "bq";
  }
  return "unknown";
}

double WeightedScenarioSet::weight_sum() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

double first_stage_cost(const SystemModel& sys, std::span<const double> dispatch) {
  double cost = 0.0;
  for (std::size_t g = 0; g < sys.generators.size(); ++g) {
    cost += sys.generators[g].cost * dispatch[g];
  }
  return cost;
}

DispatchBounds dispatch_bounds(const SystemModel& sys, const TimestepInput& step) {
  require_valid(validate_step(sys, step), "timestep");
  const std::size_t ng = sys.generators.size();
  DispatchBounds b;
  b.lower.resize(ng);
  b.upper.resize(ng);
  for (std::size_t g = 0; g < ng; ++g) {
    const auto& gen = sys.generators[g];
    double lo = gen.x_min, hi = gen.x_max;
    if (step.prev_dispatch) {
      const double prev = (*step.prev_dispatch)[g];
      lo = std::max(lo, prev - gen.ramp_down);
      hi = std::min(hi, prev + gen.ramp_up);
    }
    if (lo > hi) {
      // Within LP tolerance of each other: collapse to a point.
      if (lo - hi <= 1e-7 * (1.0 + gen.x_max)) {
        lo = hi;
      } else {
        throw InputError("generator '" + gen.id + "': ramp window does not meet [x_min, x_max]");
      }
    }
    b.lower[g] = lo;
    b.upper[g] = hi;
  }
  return b;
}

namespace {

lp::StandardFormLP assemble(const SystemModel& sys, const TimestepInput& step,
                            const std::vector<std::vector<double>>& points,
                            const std::vector<double>& weights) {
  const DispatchBounds box = dispatch_bounds(sys, step);
  const int ng = static_cast<int>(sys.generators.size());
  const int bv = detail::recourse_block_vars(sys);
  const int br = detail::recourse_block_rows(sys);
  const int nblocks = static_cast<int>(points.size());
  const int nvars = ng + nblocks * bv;
  const int nrows = nblocks * br;

  lp::StandardFormLP problem;
  problem.objective.assign(nvars, 0.0);
  problem.lower.assign(nvars, 0.0);
  problem.upper.assign(nvars, lp::kInf);
  problem.b_eq.assign(nrows, 0.0);
  problem.labels.reserve(nvars);
  for (int g = 0; g < ng; ++g) {
    problem.objective[g] = sys.generators[g].cost;
    problem.lower[g] = box.lower[g];
    problem.upper[g] = box.upper[g];
    problem.labels.push_back("x:" + sys.generators[g].id);
  }

  lp::SparseBuilder a(nrows, nvars);
  const double demand = step.total_demand();
  for (int i = 0; i < nblocks; ++i) {
    const std::vector<double> avail = available_wind(step, points[i]);
    detail::append_recourse_block(a, problem, ng + i * bv, i * br, 0, demand,
                                  avail, sys, weights[i]);
    const std::string tag = "[" + std::to_string(i) + "]";
    for (const auto& w : sys.wind) problem.labels.push_back("wind:" + w.id + tag);
    for (const auto& w : sys.wind) problem.labels.push_back("spill:" + w.id + tag);
    for (const auto& q : sys.loads) problem.labels.push_back("y_plus:" + q.id + tag);
    for (const auto& q : sys.loads) problem.labels.push_back("y_minus:" + q.id + tag);
  }
  problem.a_eq = a.build();
  return problem;
}

DispatchSolution solve_assembled(const SystemModel& sys, const TimestepInput& step,
                                 const lp::StandardFormLP& problem,
                                 const std::vector<std::vector<double>>& points,
                                 const std::vector<double>& weights) {
  const lp::LPSolution sol = lp::solve_lp(problem);
  if (sol.status != lp::Status::kOptimal) {
    throw NumericalError(std::string("dispatch LP not optimal: ") + lp::to_string(sol.status),
                         sol.x);
  }
  const int ng = static_cast<int>(sys.generators.size());
  const int bv = detail::recourse_block_vars(sys);

  DispatchSolution out;
  out.dispatch.assign(sol.x.begin(), sol.x.begin() + ng);
  for (int g = 0; g < ng; ++g) {
    out.dispatch[g] = std::clamp(out.dispatch[g], problem.lower[g], problem.upper[g]);
  }
  out.first_stage_cost = first_stage_cost(sys, out.dispatch);
  out.objective = sol.objective;
  out.lp_iterations = sol.iterations;
  out.outcomes.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (weights[i] > 0.0) {
      out.outcomes.push_back(detail::extract_outcome(sol.x, ng + static_cast<int>(i) * bv, sys));
    } else {
      // A zero-weight block is only feasible, not optimal; re-solve it.
      out.outcomes.push_back(eval_loss_lp(out.dispatch, points[i], sys, step));
    }
    out.expected_recourse += weights[i] * out.outcomes.back().loss;
  }
  return out;
}

}  // namespace

DispatchSolution solve_deterministic(const SystemModel& sys,
                                     const TimestepInput& step) {
  require_valid(validate_system(sys), "system");
  const std::vector<std::vector<double>> zero{std::vector<double>(sys.wind.size(), 0.0)};
  const std::vector<double> one{1.0};
  const lp::StandardFormLP problem = assemble(sys, step, zero, one);
  return solve_assembled(sys, step, problem, zero, one);
}

lp::StandardFormLP assemble_extensive_form(const SystemModel& sys,
                                           const TimestepInput& step,
                                           const WeightedScenarioSet& scen) {
  require_valid(validate_system(sys), "system");
  if (scen.points.empty()) throw InputError("scenario set is empty");
  if (scen.points.size() != scen.weights.size()) {
    throw InputError("scenario set has mismatched points and weights");
  }
  for (std::size_t i = 0; i < scen.size(); ++i) {
    if (!std::isfinite(scen.weights[i]) || scen.weights[i] < 0.0) {
      throw InputError("scenario " + std::to_string(i) +
                       " has a negative or non-finite weight");
    }
    if (scen.points[i].size() != sys.wind.size()) {
      throw InputError("scenario " + std::to_string(i) +
                       " does not have one error per wind plant");
    }
  }
  return assemble(sys, step, scen.points, scen.weights);
}

DispatchSolution solve_stochastic(const SystemModel& sys,
                                  const TimestepInput& step,
                                  const WeightedScenarioSet& scen) {
  const lp::StandardFormLP problem = assemble_extensive_form(sys, step, scen);
  return solve_assembled(sys, step, problem, scen.points, scen.weights);
}

}  // namespace stochdispatch
