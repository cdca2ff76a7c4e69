#include "stochdispatch/scenarios.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stochdispatch/errors.hpp"

namespace stochdispatch {

namespace {

// Every strategy reduces to N copies of the error at a point mass.
WeightedScenarioSet replicate(const ErrorDistribution& p, int n, Provenance kind) {
  WeightedScenarioSet s;
  s.provenance = kind;
  s.points.assign(n, {p.location()});
  s.weights.assign(n, 1.0 / n);
  return s;
}

}  // namespace

WeightedScenarioSet generate_mc(const ErrorDistribution& p, int n, Rng& rng) {
  if (n < 1) throw InputError("scenario count must be >= 1");
  WeightedScenarioSet s;
  s.provenance = Provenance::kMonteCarlo;
  s.points.reserve(n);
  for (int i = 0; i < n; ++i) s.points.push_back({p.sample(rng.uniform())});
  s.weights.assign(n, 1.0 / n);
  return s;
}

ImportanceDistribution build_importance_distribution(const SystemModel& sys,
                                                     const TimestepInput& step,
                                                     const ErrorDistribution& p) {
  if (sys.wind.size() != 1) {
    throw InputError("importance distribution supports exactly one wind plant");
  }
  ImportanceDistribution out;
  out.x_star = solve_deterministic(sys, step).dispatch;

  if (p.degenerate()) {
    const double xi = p.location();
    out.mu_tilde =
        eval_loss_analytic(out.x_star, std::span<const double>(&xi, 1), sys, step).loss;
    out.q = p.grid();
    return out;
  }
  const GridDistribution& g = p.grid();
  std::vector<double> lp(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double xi = g.nodes[j];
    lp[j] = eval_loss_analytic(out.x_star, std::span<const double>(&xi, 1), sys, step).loss *
            g.density[j];
  }
  out.mu_tilde = trapezoid(lp, g.spacing());
  if (!(out.mu_tilde > 0.0)) {
    spdlog::warn("importance distribution: loss vanishes on the support, falling back to p");
    out.q = g;
    out.fallback = true;
    return out;
  }
  out.q = build_grid_from_values(std::move(lp), g.a, g.b);
  return out;
}

WeightedScenarioSet generate_is(const GridDistribution& q, const ErrorDistribution& p,
                                int n, Rng& rng, bool self_normalize) {
  if (n < 1) throw InputError("scenario count must be >= 1");
  const GridDistribution& pg = p.grid();
  if (p.degenerate()) return replicate(p, n, Provenance::kImportance);
  if (!q.same_layout(pg)) {
    throw InputError("importance grid must share the nodes of the nominal grid");
  }
  WeightedScenarioSet s;
  s.provenance = Provenance::kImportance;
  s.points.reserve(n);
  s.weights.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double xi = sample_grid(q, rng.uniform());
    const double qd = q.cell_density(xi);
    if (!(qd > 0.0)) {
      throw NumericalError("importance sample landed where q has no mass");
    }
    s.points.push_back({xi});
    s.weights.push_back(pg.cell_density(xi) / (n * qd));
  }
  if (self_normalize) {
    const double total = s.weight_sum();
    if (total > 0.0) {
      for (double& w : s.weights) w /= total;
    }
  }
  return s;
}

QuadratureScenarios build_bq_scenarios(const ErrorDistribution& p, int n,
                                       const KernelConfig& cfg,
                                       const SelectOptions& select) {
  QuadratureScenarios out;
  if (p.degenerate()) {
    if (n < 1) throw InputError("select_points needs n >= 1");
    validate_kernel(cfg);
    // The posterior variance is zero for any rule that puts all mass on the
    // point, so the set is the point repeated with equal weights.
    out.set = replicate(p, n, Provenance::kQuadrature);
    out.rule.nodes.assign(n, p.location());
    out.rule.weights = out.set.weights;
    out.rule.embedding.assign(n, cfg.tau * cfg.tau);
    out.rule.prior_integral = cfg.tau * cfg.tau;
    out.rule.variance = 0.0;
    return out;
  }
  const std::vector<double> nodes = select_points(n, p, cfg, select);
  out.rule = bq_weights(nodes, p, cfg);
  const ProjectedWeights proj = project_nonnegative(out.rule.weights);
  out.projected = proj.projected;
  if (proj.projected) {
    std::ostringstream os;
    for (double w : out.rule.weights) os << ' ' << w;
    spdlog::warn("BQ weights projected to the nonnegative orthant (N={}); raw gamma:{}", n,
                 os.str());
  }
  out.set.provenance = Provenance::kQuadrature;
  for (double x : nodes) out.set.points.push_back({x});
  out.set.weights = proj.weights;
  return out;
}

WeightedScenarioSet generate_bq(const ErrorDistribution& p, int n, const KernelConfig& cfg,
                                const SelectOptions& select) {
  return build_bq_scenarios(p, n, cfg, select).set;
}

KernelConfig default_kernel(const SystemModel& sys, double demand_scale,
                            const ErrorDistribution& p) {
  double c_plus = 0.0;
  for (const auto& q : sys.loads) c_plus = std::max(c_plus, q.c_plus);
  KernelConfig cfg;
  cfg.tau = std::max(c_plus * demand_scale / 10.0, 1e-12);
  cfg.length = p.spread() > 0.0 ? p.spread() : 1.0;
  return cfg;
}

}  // namespace stochdispatch
