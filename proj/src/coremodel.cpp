#include "stochdispatch/coremodel.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "stochdispatch/errors.hpp"

namespace stochdispatch {

double SystemModel::total_capacity() const {
  double total = 0.0;
  for (const auto& g : generators) total += g.x_max;
  return total;
}

double TimestepInput::total_demand() const {
  return std::accumulate(demand.begin(), demand.end(), 0.0);
}

namespace {

std::string indexed(const char* base, std::size_t i, const char* field) {
  std::ostringstream os;
  os << base << '[' << i << "]." << field;
  return os.str();
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

ValidationReport validate_system(const SystemModel& model) {
  ValidationReport report;
  auto add = [&](std::string field, std::string message) {
    report.push_back({std::move(field), std::move(message)});
  };

  if (model.generators.empty()) {
    add("generators", "at least one generator is required");
  }
  for (std::size_t i = 0; i < model.generators.size(); ++i) {
    const auto& g = model.generators[i];
    if (!finite_nonneg(g.x_min)) add(indexed("generators", i, "x_min"), "x_min must be >= 0");
    if (!std::isfinite(g.x_max) || g.x_min > g.x_max) {
      add(indexed("generators", i, "x_min"),
          "generator '" + g.id + "': x_min > x_max");
    }
    if (!finite_nonneg(g.ramp_up)) add(indexed("generators", i, "ramp_up"), "ramp_up must be >= 0");
    if (!finite_nonneg(g.ramp_down)) add(indexed("generators", i, "ramp_down"), "ramp_down must be >= 0");
    if (!finite_nonneg(g.cost)) add(indexed("generators", i, "cost"), "cost must be >= 0");
  }
  if (!model.generators.empty() && !(model.total_capacity() > 0.0)) {
    add("generators", "total x_max must be > 0");
  }
  for (std::size_t i = 0; i < model.wind.size(); ++i) {
    const auto& w = model.wind[i];
    if (!finite_nonneg(w.cost)) add(indexed("wind", i, "cost"), "c_w must be >= 0");
    if (!finite_nonneg(w.spill_cost)) add(indexed("wind", i, "spill_cost"), "c_spl must be >= 0");
  }
  if (model.loads.empty()) add("loads", "at least one load bus is required");
  for (std::size_t i = 0; i < model.loads.size(); ++i) {
    const auto& q = model.loads[i];
    if (!finite_nonneg(q.c_minus)) add(indexed("loads", i, "c_minus"), "c_minus must be >= 0");
    if (!std::isfinite(q.c_plus) || !(q.c_plus > q.c_minus)) {
      add(indexed("loads", i, "c_plus"), "load '" + q.id + "': c_plus <= c_minus");
    }
  }
  return report;
}

ValidationReport validate_step(const SystemModel& model,
                               const TimestepInput& step) {
  ValidationReport report;
  auto add = [&](std::string field, std::string message) {
    report.push_back({std::move(field), std::move(message)});
  };
  if (step.demand.size() != model.loads.size()) {
    add("demand", "expected one demand value per load bus");
  }
  for (std::size_t i = 0; i < step.demand.size(); ++i) {
    if (!finite_nonneg(step.demand[i])) add(indexed("demand", i, "value"), "demand must be >= 0");
  }
  if (step.wind_forecast.size() != model.wind.size()) {
    add("wind_forecast", "expected one forecast per wind plant");
  }
  for (std::size_t i = 0; i < step.wind_forecast.size(); ++i) {
    if (!finite_nonneg(step.wind_forecast[i])) {
      add(indexed("wind_forecast", i, "value"), "wind forecast must be >= 0");
    }
  }
  if (step.prev_dispatch) {
    const auto& prev = *step.prev_dispatch;
    if (prev.size() != model.generators.size()) {
      add("prev_dispatch", "expected one value per generator");
    } else {
      for (std::size_t i = 0; i < prev.size(); ++i) {
        const auto& g = model.generators[i];
        // Small slack: prev dispatch comes out of an LP with 1e-8 tolerances.
        const double tol = 1e-7 * (1.0 + g.x_max);
        if (!(prev[i] >= g.x_min - tol && prev[i] <= g.x_max + tol)) {
          add(indexed("prev_dispatch", i, "value"),
              "previous dispatch outside [x_min, x_max]");
        }
      }
    }
  }
  return report;
}

std::string format_report(const ValidationReport& report) {
  std::ostringstream os;
  for (const auto& v : report) os << v.field << ": " << v.message << '\n';
  return os.str();
}

void require_valid(const ValidationReport& report, const std::string& what) {
  if (!report.empty()) {
    throw InputError("invalid " + what + ":\n" + format_report(report));
  }
}

}  // namespace stochdispatch
