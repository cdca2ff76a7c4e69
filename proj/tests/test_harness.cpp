#include <gtest/gtest.h>

#include <cmath>

#include "stochdispatch/errors.hpp"
#include "stochdispatch/harness.hpp"
#include "stochdispatch/synth.hpp"
#include "support.hpp"

namespace sd = stochdispatch;

namespace {

sd::Timeseries flat_series(int steps, double load, double wind) {
  sd::Timeseries ts;
  for (int i = 0; i < steps; ++i) {
    ts.timestamps.push_back(1700000000 + i * sd::kStepSeconds);
    ts.load.push_back(load);
    ts.wind.push_back(wind);
  }
  return ts;
}

sd::StrategyConfig strategy(sd::Provenance kind, int n, std::uint64_t seed) {
  sd::StrategyConfig c;
  c.kind = kind;
  c.n = n;
  c.seed = seed;
  c.kernel = {1000.0, 5.0, 1e-10};
  return c;
}

sd::SystemModel ramped_fleet() {
  sd::SystemModel s;
  s.generators = {{"a", 10.0, 0.0, 80.0, 4.0, 4.0}, {"b", 25.0, 0.0, 60.0, 2.0, 2.0}};
  s.wind = {{"w", 0.0, 0.0}};
  s.loads = {{"d", 1000.0, 50.0}};
  return s;
}

const sd::ErrorDistribution& desk_p() {
  static const auto p = sd::ErrorDistribution::student_t({0.0, 3.0, 3.0}, 801);
  return p;
}

}  // namespace

TEST(EvaluateRealizedCost, ShortfallItemized) {
  const auto sys = testsupport::desk_system();
  const auto t = testsupport::desk_step();
  const std::vector<double> x{50.0, 30.0}, xi{-25.0};
  const auto c = sd::evaluate_realized_cost(x, xi, sys, t);
  EXPECT_NEAR(c.loss_of_load, 15000.0, 1e-8);
  EXPECT_NEAR(c.wind, 25.0, 1e-8);
  EXPECT_NEAR(c.wind + c.spill + c.loss_of_load + c.excess, c.total, 1e-8);
}

TEST(EvaluateRealizedCost, ExactBalanceAndOverDispatch) {
  const auto sys = testsupport::desk_system();
  const auto t = testsupport::desk_step();
  const std::vector<double> x{50.0, 30.0}, xi{-10.0};
  const auto balanced = sd::evaluate_realized_cost(x, xi, sys, t);
  EXPECT_NEAR(balanced.loss_of_load, 0.0, 1e-9);
  EXPECT_NEAR(balanced.excess, 0.0, 1e-9);
  const std::vector<double> over{70.0, 40.0}, none{-30.0};
  const auto o = sd::evaluate_realized_cost(over, none, sys, t);
  EXPECT_NEAR(o.excess, 500.0, 1e-8);
  EXPECT_NEAR(o.wind + o.spill + o.loss_of_load, 0.0, 1e-9);
}

TEST(RunRollingHorizon, ConstantInputsGiveConstantSecondStage) {
  const auto sys = testsupport::desk_system(5.0, 0.0);
  const auto ts = flat_series(6, 100.0, 30.0);
  for (auto kind : {sd::Provenance::kMonteCarlo, sd::Provenance::kImportance,
                    sd::Provenance::kQuadrature}) {
    const auto r = sd::run_rolling_horizon(sys, ts, strategy(kind, 5, 3), desk_p());
    ASSERT_EQ(r.steps.size(), 5u);
    for (const auto& s : r.steps) {
      EXPECT_EQ(s.realized_error, 0.0);
      double x = 0.0;
      for (double v : s.dispatch) x += v;
      // Only wind covers the gap left by thermal units at zero error.
      const double wind_used = std::clamp(100.0 - x, 0.0, 30.0);
      EXPECT_NEAR(s.second_stage_cost,
                  5.0 * wind_used + 1000.0 * std::max(100.0 - x - 30.0, 0.0) +
                      50.0 * std::max(x - 100.0, 0.0),
                  1e-7);
    }
    if (kind == sd::Provenance::kQuadrature) {
      for (const auto& s : r.steps) {
        EXPECT_NEAR(s.second_stage_cost, r.steps.front().second_stage_cost, 1e-8);
      }
    }
  }
}

TEST(RunRollingHorizon, TwoStepsComposeComponents) {
  const auto sys = ramped_fleet();
  sd::Timeseries ts = flat_series(2, 100.0, 20.0);
  ts.wind[1] = 14.0;
  const auto cfg = strategy(sd::Provenance::kMonteCarlo, 6, 11);
  const auto r = sd::run_rolling_horizon(sys, ts, cfg, desk_p());

  const auto first = sd::solve_deterministic(sys, sd::make_step(sys, ts, 0, std::nullopt));
  const auto step = sd::make_step(sys, ts, 1, first.dispatch);
  sd::Rng rng(cfg.seed);
  const auto scen = sd::generate_mc(desk_p(), cfg.n, rng);
  const auto sol = sd::solve_stochastic(sys, step, scen);
  const std::vector<double> xi{-6.0};
  const auto realized = sd::eval_loss_lp(sol.dispatch, xi, sys, step);

  ASSERT_EQ(r.steps.size(), 1u);
  EXPECT_EQ(r.steps[0].dispatch, sol.dispatch);
  EXPECT_EQ(r.steps[0].realized_error, -6.0);
  EXPECT_DOUBLE_EQ(r.total_first_stage, sol.first_stage_cost);
  EXPECT_DOUBLE_EQ(r.total_second_stage, realized.loss);
  EXPECT_DOUBLE_EQ(r.steps[0].loss_of_load, realized.loss_of_load());
}

TEST(RunRollingHorizon, SeedsMatterOnlyForRandomStrategies) {
  const auto sys = ramped_fleet();
  sd::SynthOptions o;
  o.steps = 30;
  o.load_mean = 110.0;
  o.load_amplitude = 10.0;
  o.wind_mean = 25.0;
  o.wind_capacity = 40.0;
  o.wind_noise = 2.0;
  o.ramp_day = 100;
  const auto ts = sd::synthesize_week(o);
  const auto mc1 = sd::run_rolling_horizon(sys, ts, strategy(sd::Provenance::kMonteCarlo, 5, 1), desk_p());
  const auto mc2 = sd::run_rolling_horizon(sys, ts, strategy(sd::Provenance::kMonteCarlo, 5, 2), desk_p());
  EXPECT_NE(mc1.total(), mc2.total());
  const auto bq1 = sd::run_rolling_horizon(sys, ts, strategy(sd::Provenance::kQuadrature, 5, 1), desk_p());
  const auto bq2 = sd::run_rolling_horizon(sys, ts, strategy(sd::Provenance::kQuadrature, 5, 2), desk_p());
  EXPECT_EQ(bq1.total(), bq2.total());
  for (std::size_t t = 0; t < bq1.steps.size(); ++t) {
    EXPECT_EQ(bq1.steps[t].dispatch, bq2.steps[t].dispatch);
  }
  const auto again = sd::run_rolling_horizon(sys, ts, strategy(sd::Provenance::kMonteCarlo, 5, 1), desk_p());
  EXPECT_EQ(again.total(), mc1.total());
}

TEST(RunRollingHorizon, RampsTotalsAndSigns) {
  const auto sys = ramped_fleet();
  sd::SynthOptions o;
  o.steps = 60;
  o.load_mean = 110.0;
  o.load_amplitude = 10.0;
  o.wind_mean = 25.0;
  o.wind_capacity = 40.0;
  o.wind_noise = 2.0;
  o.ramp_day = 100;
  const auto ts = sd::synthesize_week(o);
  for (auto kind : {sd::Provenance::kMonteCarlo, sd::Provenance::kImportance,
                    sd::Provenance::kQuadrature}) {
    const auto r = sd::run_rolling_horizon(sys, ts, strategy(kind, 5, 4), desk_p());
    std::vector<double> prev =
        sd::solve_deterministic(sys, sd::make_step(sys, ts, 0, std::nullopt)).dispatch;
    double first = 0.0, second = 0.0;
    for (const auto& s : r.steps) {
      for (std::size_t g = 0; g < prev.size(); ++g) {
        EXPECT_LE(s.dispatch[g] - prev[g], sys.generators[g].ramp_up + 1e-9);
        EXPECT_GE(s.dispatch[g] - prev[g], -sys.generators[g].ramp_down - 1e-9);
      }
      EXPECT_GE(s.first_stage_cost, 0.0);
      EXPECT_GE(s.second_stage_cost, -1e-9);
      first += s.first_stage_cost;
      second += s.second_stage_cost;
      prev = s.dispatch;
    }
    EXPECT_EQ(first, r.total_first_stage);
    EXPECT_EQ(second, r.total_second_stage);
    EXPECT_EQ(r.total(), r.total_first_stage + r.total_second_stage);
  }
}

TEST(RunRollingHorizon, RejectsSingleStepSeries) {
  EXPECT_THROW(sd::run_rolling_horizon(ramped_fleet(), flat_series(1, 1.0, 1.0),
                                       strategy(sd::Provenance::kMonteCarlo, 3, 1), desk_p()),
               sd::InputError);
}

TEST(RunRollingHorizon, PerfectForecastStrategiesAgree) {
  const auto sys = ramped_fleet();
  auto ts = flat_series(20, 110.0, 25.0);
  for (std::size_t i = 0; i < ts.size(); ++i) ts.load[i] = 105.0 + 6.0 * std::sin(0.3 * i);
  const auto p = sd::ErrorDistribution::point_mass(0.0);
  const auto mc = sd::run_rolling_horizon(sys, ts, strategy(sd::Provenance::kMonteCarlo, 10, 1), p);
  const auto is = sd::run_rolling_horizon(sys, ts, strategy(sd::Provenance::kImportance, 10, 2), p);
  const auto bq = sd::run_rolling_horizon(sys, ts, strategy(sd::Provenance::kQuadrature, 10, 3), p);
  for (const auto* other : {&is, &bq}) {
    EXPECT_NEAR(other->total_first_stage, mc.total_first_stage, 1e-8 * mc.total_first_stage);
    EXPECT_NEAR(other->total_second_stage, mc.total_second_stage, 1e-8 * (1.0 + mc.total_second_stage));
    for (std::size_t t = 0; t < mc.steps.size(); ++t) {
      for (std::size_t g = 0; g < mc.steps[t].dispatch.size(); ++g) {
        EXPECT_NEAR(other->steps[t].dispatch[g], mc.steps[t].dispatch[g], 1e-8);
      }
    }
  }
}

TEST(Summarize, SingleCellEchoesTotals) {
  sd::SimResult r;
  r.strategy = sd::Provenance::kImportance;
  r.n = 5;
  r.total_first_stage = 10.0;
  r.total_second_stage = 2.5;
  sd::ResultGrid grid;
  grid[r.strategy][5].push_back(r);
  const auto s = sd::summarize(grid);
  ASSERT_EQ(s.counts, std::vector<int>{5});
  ASSERT_EQ(s.strategies.size(), 1u);
  EXPECT_EQ(s.total[0][0], 12.5);
  EXPECT_EQ(s.first_stage[0][0], 10.0);
  EXPECT_EQ(s.second_stage[0][0], 2.5);
}

TEST(Summarize, DominatingRunIsCheaper) {
  sd::ResultGrid grid;
  sd::SimResult a, b;
  a.strategy = sd::Provenance::kMonteCarlo;
  b.strategy = sd::Provenance::kQuadrature;
  for (int t = 0; t < 4; ++t) {
    sd::SimStep sa, sb;
    sa.first_stage_cost = 1.0;
    sb.first_stage_cost = 1.5;
    a.steps.push_back(sa);
    b.steps.push_back(sb);
    a.total_first_stage += 1.0;
    b.total_first_stage += 1.5;
  }
  grid[a.strategy][10].push_back(a);
  grid[b.strategy][10].push_back(b);
  const auto s = sd::summarize(grid);
  EXPECT_LT(s.total[0][0], s.total[0][1]);
  EXPECT_THROW(sd::summarize({}), sd::InputError);
}

TEST(Summarize, AveragesSeedsAndMarksGaps) {
  sd::ResultGrid grid;
  for (double v : {1.0, 3.0}) {
    sd::SimResult r;
    r.total_first_stage = v;
    grid[sd::Provenance::kMonteCarlo][5].push_back(r);
  }
  sd::SimResult r;
  r.total_second_stage = 7.0;
  grid[sd::Provenance::kImportance][10].push_back(r);
  const auto s = sd::summarize(grid);
  ASSERT_EQ(s.counts, (std::vector<int>{5, 10}));
  EXPECT_EQ(s.first_stage[0][0], 2.0);
  EXPECT_TRUE(std::isnan(s.total[1][0]));
  EXPECT_TRUE(std::isnan(s.total[0][1]));
  EXPECT_EQ(s.total[1][1], 7.0);
}

TEST(RunExperiment, PerfectForecastFallsBackToPointMass) {
  const auto sys = ramped_fleet();
  const auto ts = flat_series(10, 100.0, 20.0);
  sd::ExperimentConfig cfg;
  cfg.scenario_counts = {3};
  const auto out = sd::run_experiment(sys, ts, cfg);
  EXPECT_EQ(out.fit.scale, 0.0);
  EXPECT_EQ(out.summary.strategies.size(), 3u);
  EXPECT_NEAR(out.summary.total[0][0], out.summary.total[0][2], 1e-8 * out.summary.total[0][0]);
}
