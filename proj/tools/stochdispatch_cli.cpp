// Command-line front end: fit, run, bq-nodes, validate, synth.
#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "stochdispatch/cliio.hpp"
#include "stochdispatch/errors.hpp"
#include "stochdispatch/forecastdist.hpp"
#include "stochdispatch/gpbq.hpp"
#include "stochdispatch/harness.hpp"
#include "stochdispatch/scenarios.hpp"
#include "stochdispatch/synth.hpp"

namespace sd = stochdispatch;
namespace fs = std::filesystem;

namespace {

constexpr int kUsageError = 2;

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("stochdispatch");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("STOCHDISPATCH_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<sd::Provenance> parse_strategies(const std::vector<std::string>& names) {
  std::vector<sd::Provenance> out;
  for (const std::string& n : names) {
    try {
      out.push_back(sd::parse_provenance(n));
    } catch (const sd::InputError& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

void print_table(const char* title, const sd::CostSummary& s,
                 const std::vector<std::vector<double>>& table) {
  std::printf("%s\n%8s", title, "N");
  for (sd::Provenance p : s.strategies) std::printf(" %16s", sd::to_string(p));
  std::printf("\n");
  for (std::size_t r = 0; r < s.counts.size(); ++r) {
    std::printf("%8d", s.counts[r]);
    for (double v : table[r]) std::printf(" %16.6e", v);
    std::printf("\n");
  }
}

struct RunFlags {
  std::string config, timeseries, out;
  std::vector<std::string> strategies;
  std::vector<int> counts;
  std::vector<std::uint64_t> seeds;
  std::optional<int> grid_nodes;
  std::optional<double> kernel_tau, kernel_l;
};

int cmd_run(const RunFlags& f) {
  const sd::SystemConfig file = sd::load_system_config_full(f.config);
  sd::RunConfig rc;
  rc.system_config = f.config;
  if (!f.timeseries.empty()) {
    rc.timeseries = f.timeseries;
  } else if (file.run.timeseries) {
    rc.timeseries = *file.run.timeseries;
  } else {
    throw UsageError("no timeseries given (--timeseries or [run] timeseries)");
  }
  if (!f.strategies.empty()) {
    rc.strategies = parse_strategies(f.strategies);
  } else if (!file.run.strategies.empty()) {
    rc.strategies = file.run.strategies;
  }
  if (!f.counts.empty()) {
    rc.scenario_counts = f.counts;
  } else if (!file.run.scenario_counts.empty()) {
    rc.scenario_counts = file.run.scenario_counts;
  }
  if (!f.seeds.empty()) {
    rc.seeds = f.seeds;
  } else if (!file.run.seeds.empty()) {
    rc.seeds = file.run.seeds;
  }
  rc.grid_nodes = f.grid_nodes.value_or(file.run.grid_nodes.value_or(rc.grid_nodes));
  rc.kernel_tau = f.kernel_tau ? f.kernel_tau : file.run.kernel_tau;
  rc.kernel_l = f.kernel_l ? f.kernel_l : file.run.kernel_l;
  rc.output_dir = f.out.empty() ? fs::path("results") : fs::path(f.out);
  rc.validate();

  const sd::Timeseries ts = sd::load_timeseries_csv(rc.timeseries);
  sd::ExperimentConfig ec;
  ec.strategies = rc.strategies;
  ec.scenario_counts = rc.scenario_counts;
  ec.seeds = rc.seeds;
  ec.grid_nodes = rc.grid_nodes;
  ec.kernel_tau = rc.kernel_tau;
  ec.kernel_l = rc.kernel_l;
  const sd::ExperimentOutput out = sd::run_experiment(file.system, ts, ec);
  const sd::WrittenFiles files = sd::write_report(out.summary, out.results, rc.output_dir);

  std::printf("t fit: location %.6g scale %.6g dof %.6g\n", out.fit.location, out.fit.scale,
              out.fit.dof);
  std::printf("kernel: tau %.6g length %.6g\n\n", out.kernel.tau, out.kernel.length);
  print_table("total cost", out.summary, out.summary.total);
  print_table("first-stage cost", out.summary, out.summary.first_stage);
  print_table("second-stage cost (realized)", out.summary, out.summary.second_stage);
  std::printf("\nwrote %zu files to %s\n", files.paths.size(), rc.output_dir.string().c_str());
  return 0;
}

int cmd_fit(const std::string& timeseries) {
  const sd::Timeseries ts = sd::load_timeseries_csv(timeseries);
  const std::vector<double> errors = sd::persistence_errors(ts.wind);
  const sd::FitTrace fit = sd::fit_student_t_traced(errors);
  std::printf("location %.12g\nscale %.12g\ndof %.12g\nlog_likelihood %.12g\n",
              fit.params.location, fit.params.scale, fit.params.dof,
              fit.log_likelihood.empty() ? 0.0 : fit.log_likelihood.back());
  std::printf("samples %zu\niterations %d\nconverged %s\n", errors.size(), fit.iterations,
              fit.converged ? "yes" : "no");
  return 0;
}

struct NodeFlags {
  int n = 5;
  std::string dist = "t";
  double loc = 0.0, scale = 1.0, dof = 4.0;
  std::string timeseries;
  int grid_nodes = sd::ErrorDistribution::kDefaultNodes;
  std::optional<double> kernel_tau, kernel_l;
};

int cmd_bq_nodes(const NodeFlags& f) {
  if (f.n < 1) throw UsageError("--n must be >= 1");
  sd::ErrorDistribution p = sd::ErrorDistribution::gaussian(0.0, 1.0, f.grid_nodes);
  if (!f.timeseries.empty()) {
    const sd::Timeseries ts = sd::load_timeseries_csv(f.timeseries);
    p = sd::ErrorDistribution::student_t(sd::fit_student_t(sd::persistence_errors(ts.wind)),
                                         f.grid_nodes);
  } else if (f.dist == "t") {
    p = sd::ErrorDistribution::student_t({f.loc, f.scale, f.dof}, f.grid_nodes);
  } else if (f.dist == "normal") {
    p = sd::ErrorDistribution::gaussian(f.loc, f.scale, f.grid_nodes);
  } else {
    throw UsageError("--dist must be t or normal");
  }
  sd::KernelConfig k;
  k.tau = f.kernel_tau.value_or(1.0);
  k.length = f.kernel_l.value_or(p.spread());
  const sd::QuadratureScenarios q = sd::build_bq_scenarios(p, f.n, k);
  std::printf("node,weight,raw_weight\n");
  for (std::size_t i = 0; i < q.rule.nodes.size(); ++i) {
    std::printf("%s,%s,%s\n", sd::format_number(q.rule.nodes[i]).c_str(),
                sd::format_number(q.set.weights[i]).c_str(),
                sd::format_number(q.rule.weights[i]).c_str());
  }
  std::printf("# posterior variance %.6g\n", q.rule.variance);
  return 0;
}

int cmd_validate(const std::string& config, const std::string& timeseries) {
  const sd::SystemConfig cfg = sd::load_system_config_full(config);
  std::printf("system ok: %zu generators, %zu wind plants, %zu load buses, capacity %.6g MW\n",
              cfg.system.generators.size(), cfg.system.wind.size(), cfg.system.loads.size(),
              cfg.system.total_capacity());
  const std::string ts_path =
      !timeseries.empty() ? timeseries
                          : (cfg.run.timeseries ? cfg.run.timeseries->string() : std::string());
  if (!ts_path.empty()) {
    const sd::Timeseries ts = sd::load_timeseries_csv(ts_path);
    std::printf("timeseries ok: %zu steps\n", ts.size());
  }
  return 0;
}

int cmd_synth(const std::string& out, std::uint64_t seed, int steps) {
  sd::SynthOptions o;
  o.seed = seed;
  o.steps = steps;
  const sd::Timeseries ts = sd::synthesize_week(o);
  const fs::path path(out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  sd::write_timeseries_csv(ts, path);
  std::printf("wrote %zu steps to %s\n", ts.size(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Stochastic economic dispatch with MC, IS and BQ scenario sets"};
  app.require_subcommand(1);

  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "Rolling-horizon experiment and cost tables");
  run_cmd->add_option("--config", run.config, "System config file")->required();
  run_cmd->add_option("--timeseries", run.timeseries, "Load/wind CSV");
  run_cmd->add_option("--strategies", run.strategies, "Comma list of mc,is,bq")->delimiter(',');
  run_cmd->add_option("--scenario-counts", run.counts, "Comma list of N")->delimiter(',');
  run_cmd->add_option("--seeds", run.seeds, "Comma list of seeds")->delimiter(',');
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--grid-nodes", run.grid_nodes, "Nodes on the error grid");
  run_cmd->add_option("--kernel-tau", run.kernel_tau, "GP output scale");
  run_cmd->add_option("--kernel-l", run.kernel_l, "GP length scale (MW)");

  std::string fit_ts;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a Student-t to persistence errors");
  fit_cmd->add_option("--timeseries", fit_ts, "Load/wind CSV")->required();

  NodeFlags nodes;
  auto* nodes_cmd = app.add_subcommand("bq-nodes", "Print BQ nodes and weights");
  nodes_cmd->add_option("--n", nodes.n, "Number of nodes")->required();
  nodes_cmd->add_option("--dist", nodes.dist, "t or normal");
  nodes_cmd->add_option("--loc", nodes.loc, "Location");
  nodes_cmd->add_option("--scale", nodes.scale, "Scale (sd for normal)");
  nodes_cmd->add_option("--dof", nodes.dof, "Degrees of freedom");
  nodes_cmd->add_option("--timeseries", nodes.timeseries, "Fit p from this CSV instead");
  nodes_cmd->add_option("--grid-nodes", nodes.grid_nodes, "Nodes on the error grid");
  nodes_cmd->add_option("--kernel-tau", nodes.kernel_tau, "GP output scale");
  nodes_cmd->add_option("--kernel-l", nodes.kernel_l, "GP length scale");

  std::string val_config, val_ts;
  auto* val_cmd = app.add_subcommand("validate", "Check a system config and timeseries");
  val_cmd->add_option("--config", val_config, "System config file")->required();
  val_cmd->add_option("--timeseries", val_ts, "Load/wind CSV");

  std::string synth_out;
  std::uint64_t synth_seed = sd::SynthOptions{}.seed;
  int synth_steps = sd::SynthOptions{}.steps;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic week of load and wind");
  synth_cmd->add_option("--out", synth_out, "Output CSV")->required();
  synth_cmd->add_option("--seed", synth_seed, "Generator seed");
  synth_cmd->add_option("--steps", synth_steps, "Number of 5-minute steps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    if (active == run_cmd) return cmd_run(run);
    if (active == fit_cmd) return cmd_fit(fit_ts);
    if (active == nodes_cmd) return cmd_bq_nodes(nodes);
    if (active == val_cmd) return cmd_validate(val_config, val_ts);
    if (active == synth_cmd) return cmd_synth(synth_out, synth_seed, synth_steps);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << active->help();
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
