#include "stochdispatch/harness.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "stochdispatch/errors.hpp"
#include "stochdispatch/recourse.hpp"

namespace stochdispatch {

double Timeseries::mean_load() const {
  if (load.empty()) return 0.0;
  return std::accumulate(load.begin(), load.end(), 0.0) / static_cast<double>(load.size());
}

void validate_timeseries(const Timeseries& ts) {
  if (ts.load.size() != ts.size() || ts.wind.size() != ts.size()) {
    throw InputError("timeseries columns have different lengths");
  }
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i > 0 && ts.timestamps[i] <= ts.timestamps[i - 1]) {
      throw InputError("timestamps not strictly increasing at row " + std::to_string(i));
    }
    if (!(ts.wind[i] >= 0.0) || !std::isfinite(ts.wind[i])) {
      throw InputError("negative wind at row " + std::to_string(i));
    }
    if (!(ts.load[i] >= 0.0) || !std::isfinite(ts.load[i])) {
      throw InputError("negative load at row " + std::to_string(i));
    }
  }
}

CostBreakdown evaluate_realized_cost(std::span<const double> dispatch,
                                     std::span<const double> realized_error,
                                     const SystemModel& sys, const TimestepInput& step) {
  const RecourseOutcome out = eval_loss_lp(dispatch, realized_error, sys, step);
  CostBreakdown c;
  for (std::size_t w = 0; w < sys.wind.size(); ++w) {
    c.wind += sys.wind[w].cost * out.wind[w];
    c.spill += sys.wind[w].spill_cost * out.spill[w];
  }
  for (std::size_t q = 0; q < sys.loads.size(); ++q) {
    c.loss_of_load += sys.loads[q].c_plus * out.y_plus[q];
    c.excess += sys.loads[q].c_minus * out.y_minus[q];
  }
  c.total = out.loss;
  return c;
}

TimestepInput make_step(const SystemModel& sys, const Timeseries& ts, std::size_t t,
                        std::optional<std::vector<double>> prev) {
  TimestepInput step;
  const double share = ts.load[t] / static_cast<double>(sys.loads.size());
  step.demand.assign(sys.loads.size(), share);
  step.wind_forecast = {ts.wind[t == 0 ? 0 : t - 1]};
  step.prev_dispatch = std::move(prev);
  return step;
}

SimResult run_rolling_horizon(const SystemModel& sys, const Timeseries& ts,
                              const StrategyConfig& strat, const ErrorDistribution& p,
                              const WeightedScenarioSet* bq_scenarios) {
  require_valid(validate_system(sys), "system");
  validate_timeseries(ts);
  if (ts.size() < 2) throw InputError("rolling horizon needs at least two steps");
  if (sys.wind.size() != 1) {
    throw InputError("rolling horizon expects one aggregate wind plant");
  }
  if (strat.n < 1) throw InputError("scenario count must be >= 1");

  SimResult result;
  result.strategy = strat.kind;
  result.n = strat.n;
  result.seed = strat.seed;

  WeightedScenarioSet bq;
  if (strat.kind == Provenance::kQuadrature) {
    bq = bq_scenarios ? *bq_scenarios : generate_bq(p, strat.n, strat.kernel, strat.select);
  }
  Rng rng(strat.seed);

  std::vector<double> prev = solve_deterministic(sys, make_step(sys, ts, 0, std::nullopt)).dispatch;
  result.steps.reserve(ts.size() - 1);
  for (std::size_t t = 1; t < ts.size(); ++t) {
    try {
      const TimestepInput step = make_step(sys, ts, t, prev);
      WeightedScenarioSet scen;
      switch (strat.kind) {
        case Provenance::kMonteCarlo:
          scen = generate_mc(p, strat.n, rng);
          break;
        case Provenance::kImportance: {
          const ImportanceDistribution q = build_importance_distribution(sys, step, p);
          scen = generate_is(q.q, p, strat.n, rng, strat.self_normalize);
          break;
        }
        case Provenance::kQuadrature:
          scen = bq;
          break;
      }
      const DispatchSolution sol = solve_stochastic(sys, step, scen);
      const double xi = ts.wind[t] - step.wind_forecast[0];
      const RecourseOutcome realized =
          eval_loss_lp(sol.dispatch, std::span<const double>(&xi, 1), sys, step);

      SimStep s;
      s.timestamp = ts.timestamps[t];
      s.load = ts.load[t];
      s.wind_forecast = step.wind_forecast[0];
      s.realized_error = xi;
      s.dispatch = sol.dispatch;
      s.first_stage_cost = sol.first_stage_cost;
      s.second_stage_cost = realized.loss;
      s.expected_recourse = sol.expected_recourse;
      s.loss_of_load = realized.loss_of_load();
      result.total_first_stage += s.first_stage_cost;
      result.total_second_stage += s.second_stage_cost;
      result.total_expected_recourse += s.expected_recourse;
      prev = sol.dispatch;
      result.steps.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw NumericalError("rolling horizon failed at step " + std::to_string(t) + ": " +
                           e.what());
    }
  }
  spdlog::debug("run {} N={} seed={}: first {:.6g} second {:.6g}", to_string(strat.kind),
                strat.n, strat.seed, result.total_first_stage, result.total_second_stage);
  return result;
}

CostSummary summarize(const ResultGrid& results) {
  if (results.empty()) throw InputError("no results to summarize");
  CostSummary s;
  std::set<int> counts;
  for (const auto& [strategy, by_n] : results) {
    s.strategies.push_back(strategy);
    for (const auto& [n, runs] : by_n) counts.insert(n);
  }
  s.counts.assign(counts.begin(), counts.end());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::size_t rows = s.counts.size(), cols = s.strategies.size();
  s.total.assign(rows, std::vector<double>(cols, nan));
  s.first_stage = s.total;
  s.second_stage = s.total;
  for (std::size_t c = 0; c < cols; ++c) {
    const auto& by_n = results.at(s.strategies[c]);
    for (std::size_t r = 0; r < rows; ++r) {
      const auto it = by_n.find(s.counts[r]);
      if (it == by_n.end() || it->second.empty()) continue;
      double first = 0.0, second = 0.0;
      for (const SimResult& run : it->second) {
        first += run.total_first_stage;
        second += run.total_second_stage;
      }
      const double k = static_cast<double>(it->second.size());
      s.first_stage[r][c] = first / k;
      s.second_stage[r][c] = second / k;
      s.total[r][c] = (first + second) / k;
    }
  }
  return s;
}

ExperimentOutput run_experiment(const SystemModel& sys, const Timeseries& ts,
                                const ExperimentConfig& cfg) {
  if (cfg.strategies.empty() || cfg.scenario_counts.empty() || cfg.seeds.empty()) {
    throw InputError("experiment needs strategies, scenario counts and seeds");
  }
  validate_timeseries(ts);
  ExperimentOutput out;
  const std::vector<double> errors = persistence_errors(ts.wind);
  const bool perfect =
      std::all_of(errors.begin(), errors.end(), [&](double e) { return e == errors.front(); });
  std::optional<ErrorDistribution> fitted;
  if (perfect) {
    spdlog::info("persistence errors are constant; using a point mass at {}", errors.front());
    out.fit = {errors.front(), 0.0, 0.0};
    fitted = ErrorDistribution::point_mass(errors.front());
  } else {
    out.fit = fit_student_t(errors);
    fitted = ErrorDistribution::student_t(out.fit, cfg.grid_nodes);
  }
  const ErrorDistribution& p = *fitted;
  out.kernel = default_kernel(sys, ts.mean_load(), p);
  if (cfg.kernel_tau) out.kernel.tau = *cfg.kernel_tau;
  if (cfg.kernel_l) out.kernel.length = *cfg.kernel_l;
  spdlog::info("fit: location {:.6g} scale {:.6g} dof {:.6g}", out.fit.location, out.fit.scale,
               out.fit.dof);

  for (Provenance strategy : cfg.strategies) {
    for (int n : cfg.scenario_counts) {
      std::optional<WeightedScenarioSet> bq;
      if (strategy == Provenance::kQuadrature) bq = generate_bq(p, n, out.kernel);
      auto& runs = out.results[strategy][n];
      for (std::uint64_t seed : cfg.seeds) {
        StrategyConfig sc;
        sc.kind = strategy;
        sc.n = n;
        sc.seed = seed;
        sc.kernel = out.kernel;
        runs.push_back(run_rolling_horizon(sys, ts, sc, p, bq ? &*bq : nullptr));
        spdlog::info("{} N={} seed={}: total {:.6g}", to_string(strategy), n, seed,
                     runs.back().total());
      }
    }
  }
  out.summary = summarize(out.results);
  return out;
}

}  // namespace stochdispatch
