#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "stochdispatch/coremodel.hpp"
#include "stochdispatch/dispatch.hpp"
#include "stochdispatch/forecastdist.hpp"
#include "stochdispatch/gpbq.hpp"

namespace stochdispatch {

// Explicit random stream; never shared between runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Uniform on (0, 1), identical across platforms for a given seed.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
  }

 private:
  std::mt19937_64 engine_;
};

struct StrategyConfig {
  Provenance kind = Provenance::kMonteCarlo;
  int n = 10;
  std::uint64_t seed = 1;
  KernelConfig kernel;           // bq only
  SelectOptions select;          // bq only
  bool self_normalize = false;   // is only: rescale weights to sum to one
};

WeightedScenarioSet generate_mc(const ErrorDistribution& p, int n, Rng& rng);

struct ImportanceDistribution {
  GridDistribution q;
  double mu_tilde = 0.0;     // trapezoid estimate of E_p[L(x*, xi)]
  std::vector<double> x_star;
  bool fallback = false;     // loss vanished on the grid, q = p
};

// q = L(x*, xi) p(xi) / mu_tilde on the nodes of p's grid, with x* from the
// deterministic proxy dispatch. Single wind plant only.
ImportanceDistribution build_importance_distribution(const SystemModel& sys,
                                                     const TimestepInput& step,
                                                     const ErrorDistribution& p);

// Draws from q by inverse CDF; weight_i = p(xi_i) / (n q(xi_i)) using the
// cell densities both grids assign to xi_i.
WeightedScenarioSet generate_is(const GridDistribution& q, const ErrorDistribution& p,
                                int n, Rng& rng, bool self_normalize = false);

struct QuadratureScenarios {
  WeightedScenarioSet set;
  BQRule rule;        // raw weights before projection
  bool projected = false;
};

QuadratureScenarios build_bq_scenarios(const ErrorDistribution& p, int n,
                                       const KernelConfig& cfg,
                                       const SelectOptions& select = {});
WeightedScenarioSet generate_bq(const ErrorDistribution& p, int n,
                                const KernelConfig& cfg,
                                const SelectOptions& select = {});

// tau = c_plus * demand_scale / 10 (largest c_plus over buses),
// length = one standard deviation of p.
KernelConfig default_kernel(const SystemModel& sys, double demand_scale,
                            const ErrorDistribution& p);

}  // namespace stochdispatch
