#include "stochdispatch/synth.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stochdispatch/errors.hpp"
#include "stochdispatch/scenarios.hpp"

namespace stochdispatch {

Timeseries synthesize_week(const SynthOptions& o) {
  if (o.steps < 2) throw InputError("synth needs at least two steps");
  if (o.wind_noise_dof <= 2.0) throw InputError("synth wind_noise_dof must exceed 2");
  const boost::math::normal_distribution<double> normal;
  const boost::math::students_t_distribution<double> t(o.wind_noise_dof);
  // Unit-variance increments.
  const double t_scale = std::sqrt((o.wind_noise_dof - 2.0) / o.wind_noise_dof);
  Rng rng(o.seed);

  const int steps_per_day = 24 * 3600 / static_cast<int>(kStepSeconds);
  const int ramp_begin = o.ramp_day * steps_per_day - o.ramp_steps / 2;

  Timeseries ts;
  ts.timestamps.resize(o.steps);
  ts.load.resize(o.steps);
  ts.wind.resize(o.steps);
  double wind = o.wind_mean;
  for (int i = 0; i < o.steps; ++i) {
    ts.timestamps[i] = o.start + i * kStepSeconds;
    // Trough at 04:00, peak at 16:00.
    const double hour = static_cast<double>(i % steps_per_day) / steps_per_day * 24.0;
    const double phase = 2.0 * std::numbers::pi * (hour - 10.0) / 24.0;
    ts.load[i] = o.load_mean + o.load_amplitude * std::sin(phase) +
                 o.load_noise * boost::math::quantile(normal, rng.uniform());

    ts.wind[i] = wind;
    double step = o.wind_reversion * (o.wind_mean - wind) +
                  o.wind_noise * t_scale * boost::math::quantile(t, rng.uniform());
    if (i >= ramp_begin && i < ramp_begin + o.ramp_steps) {
      step -= o.ramp_drop / o.ramp_steps;
    }
    wind = std::clamp(wind + step, 0.0, o.wind_capacity);
  }
  return ts;
}

}  // namespace stochdispatch
