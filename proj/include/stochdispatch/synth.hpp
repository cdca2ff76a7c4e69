#pragma once

#include <cstdint>

#include "stochdispatch/harness.hpp"

namespace stochdispatch {

struct SynthOptions {
  int steps = 2016;                           // one week of 5-minute intervals
  std::int64_t start = 1721520000;            // 2024-07-21T00:00:00Z
  double load_mean = 1000.0;                  // MW
  double load_amplitude = 250.0;              // MW, diurnal swing
  double load_noise = 6.0;                    // MW, i.i.d. per step
  double wind_capacity = 300.0;               // MW
  double wind_mean = 150.0;                   // MW, AR(1) attractor
  double wind_reversion = 0.004;              // per step
  double wind_noise = 4.0;                    // MW, increment scale
  double wind_noise_dof = 3.0;                // heavy-tailed increments
  int ramp_day = 4;                           // down-ramp around this midnight
  double ramp_drop = 160.0;                   // MW lost over the ramp
  int ramp_steps = 18;                        // 90 minutes
  std::uint64_t seed = 20240721;
};

// Diurnal load plus noise and mean-reverting wind with one scripted
// down-ramp. Deterministic in the options.
Timeseries synthesize_week(const SynthOptions& options = {});

}  // namespace stochdispatch
