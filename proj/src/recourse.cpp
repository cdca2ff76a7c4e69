#include "stochdispatch/recourse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "stochdispatch/errors.hpp"

namespace stochdispatch {

double RecourseOutcome::loss_of_load() const {
  return std::accumulate(y_plus.begin(), y_plus.end(), 0.0);
}

double RecourseOutcome::excess() const {
  return std::accumulate(y_minus.begin(), y_minus.end(), 0.0);
}

namespace {

void check_inputs(std::span<const double> dispatch, std::span<const double> error,
                  const SystemModel& sys, const TimestepInput& step) {
  if (dispatch.size() != sys.generators.size()) {
    throw InputError("dispatch has " + std::to_string(dispatch.size()) +
                     " entries, system has " +
                     std::to_string(sys.generators.size()) + " generators");
  }
  if (error.size() != sys.wind.size() || step.wind_forecast.size() != sys.wind.size()) {
    throw InputError("forecast error / wind forecast must have one entry per wind plant");
  }
  if (step.demand.size() != sys.loads.size()) {
    throw InputError("demand must have one entry per load bus");
  }
  if (sys.loads.empty()) throw InputError("system has no load bus");
}

}  // namespace

std::vector<double> available_wind(const TimestepInput& step,
                                   std::span<const double> error) {
  std::vector<double> avail(step.wind_forecast.size());
  for (std::size_t w = 0; w < avail.size(); ++w) {
    avail[w] = std::max(step.wind_forecast[w] + error[w], 0.0);
  }
  return avail;
}

namespace detail {

void append_recourse_block(lp::SparseBuilder& a, lp::StandardFormLP& problem,
                           int col_offset, int row_offset, int dispatch_col,
                           double balance_rhs, std::span<const double> avail,
                           const SystemModel& sys, double weight) {
  const int nw = static_cast<int>(sys.wind.size());
  const int nq = static_cast<int>(sys.loads.size());
  const int wind0 = col_offset, spill0 = wind0 + nw, plus0 = spill0 + nw,
            minus0 = plus0 + nq;

  for (int w = 0; w < nw; ++w) {
    problem.objective[wind0 + w] = weight * sys.wind[w].cost;
    problem.objective[spill0 + w] = weight * sys.wind[w].spill_cost;
    problem.lower[wind0 + w] = 0.0;
    problem.upper[wind0 + w] = avail[w];
    problem.lower[spill0 + w] = 0.0;
    problem.upper[spill0 + w] = lp::kInf;
    a.add(row_offset, wind0 + w, 1.0);
    a.add(row_offset + 1 + w, wind0 + w, 1.0);
    a.add(row_offset + 1 + w, spill0 + w, 1.0);
    problem.b_eq[row_offset + 1 + w] = avail[w];
  }
  for (int q = 0; q < nq; ++q) {
    problem.objective[plus0 + q] = weight * sys.loads[q].c_plus;
    problem.objective[minus0 + q] = weight * sys.loads[q].c_minus;
    problem.lower[plus0 + q] = problem.lower[minus0 + q] = 0.0;
    problem.upper[plus0 + q] = problem.upper[minus0 + q] = lp::kInf;
    a.add(row_offset, plus0 + q, 1.0);
    a.add(row_offset, minus0 + q, -1.0);
  }
  if (dispatch_col >= 0) {
    for (std::size_t g = 0; g < sys.generators.size(); ++g) {
      a.add(row_offset, dispatch_col + static_cast<int>(g), 1.0);
    }
  }
  problem.b_eq[row_offset] = balance_rhs;
}

RecourseOutcome extract_outcome(std::span<const double> x, int col_offset,
                                const SystemModel& sys) {
  const std::size_t nw = sys.wind.size(), nq = sys.loads.size();
  RecourseOutcome out;
  auto take = [&](std::size_t start, std::size_t count) {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
      v[i] = std::max(x[col_offset + start + i], 0.0);
    }
    return v;
  };
  out.wind = take(0, nw);
  out.spill = take(nw, nw);
  out.y_plus = take(2 * nw, nq);
  out.y_minus = take(2 * nw + nq, nq);
  for (std::size_t w = 0; w < nw; ++w) {
    out.loss += sys.wind[w].cost * out.wind[w] + sys.wind[w].spill_cost * out.spill[w];
  }
  for (std::size_t q = 0; q < nq; ++q) {
    out.loss += sys.loads[q].c_plus * out.y_plus[q] + sys.loads[q].c_minus * out.y_minus[q];
  }
  return out;
}

}  // namespace detail

lp::StandardFormLP build_recourse_lp(std::span<const double> dispatch,
                                     std::span<const double> error,
                                     const SystemModel& sys,
                                     const TimestepInput& step) {
  check_inputs(dispatch, error, sys, step);
  const int nvars = detail::recourse_block_vars(sys);
  const int nrows = detail::recourse_block_rows(sys);
  lp::StandardFormLP problem;
  problem.objective.assign(nvars, 0.0);
  problem.lower.assign(nvars, 0.0);
  problem.upper.assign(nvars, lp::kInf);
  problem.b_eq.assign(nrows, 0.0);
  for (const auto& w : sys.wind) problem.labels.push_back("wind:" + w.id);
  for (const auto& w : sys.wind) problem.labels.push_back("spill:" + w.id);
  for (const auto& q : sys.loads) problem.labels.push_back("y_plus:" + q.id);
  for (const auto& q : sys.loads) problem.labels.push_back("y_minus:" + q.id);

  const double net = step.total_demand() -
                     std::accumulate(dispatch.begin(), dispatch.end(), 0.0);
  const std::vector<double> avail = available_wind(step, error);
  lp::SparseBuilder a(nrows, nvars);
  detail::append_recourse_block(a, problem, 0, 0, -1, net, avail, sys, 1.0);
  problem.a_eq = a.build();
  return problem;
}

RecourseOutcome eval_loss_lp(std::span<const double> dispatch,
                             std::span<const double> error,
                             const SystemModel& sys, const TimestepInput& step) {
  const lp::StandardFormLP problem = build_recourse_lp(dispatch, error, sys, step);
  const lp::LPSolution sol = lp::solve_lp(problem);
  if (sol.status != lp::Status::kOptimal) {
    throw NumericalError(std::string("recourse LP not optimal: ") + lp::to_string(sol.status));
  }
  RecourseOutcome out = detail::extract_outcome(sol.x, 0, sys);
  out.loss = sol.objective;
  return out;
}

RecourseOutcome eval_loss_analytic(std::span<const double> dispatch,
                                   std::span<const double> error,
                                   const SystemModel& sys,
                                   const TimestepInput& step) {
  check_inputs(dispatch, error, sys, step);
  const std::size_t nw = sys.wind.size(), nq = sys.loads.size();
  const std::vector<double> avail = available_wind(step, error);

  // Cheapest bus for each slack direction; ties go to the first bus.
  std::size_t plus_bus = 0, minus_bus = 0;
  for (std::size_t q = 1; q < nq; ++q) {
    if (sys.loads[q].c_plus < sys.loads[plus_bus].c_plus) plus_bus = q;
    if (sys.loads[q].c_minus < sys.loads[minus_bus].c_minus) minus_bus = q;
  }
  const double c_plus = sys.loads[plus_bus].c_plus;
  const double c_minus = sys.loads[minus_bus].c_minus;

  std::vector<std::size_t> order(nw);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sys.wind[a].cost - sys.wind[a].spill_cost <
           sys.wind[b].cost - sys.wind[b].spill_cost;
  });

  RecourseOutcome out;
  out.wind.assign(nw, 0.0);
  out.spill = avail;
  out.y_plus.assign(nq, 0.0);
  out.y_minus.assign(nq, 0.0);

  // Remaining shortfall; negative means surplus.
  double shortfall = step.total_demand() -
                     std::accumulate(dispatch.begin(), dispatch.end(), 0.0);
  for (std::size_t w : order) {
    const double marginal = sys.wind[w].cost - sys.wind[w].spill_cost;
    double use = 0.0;
    // Wind displacing loss-of-load.
    if (shortfall > 0.0 && marginal < c_plus) {
      use = std::min(avail[w], shortfall);
    }
    // Wind creating surplus is only worth it when spilling costs more.
    if (marginal + c_minus < 0.0) use = avail[w];
    out.wind[w] = use;
    out.spill[w] = avail[w] - use;
    shortfall -= use;
  }
  if (shortfall > 0.0) {
    out.y_plus[plus_bus] = shortfall;
  } else {
    out.y_minus[minus_bus] = -shortfall;
  }

  for (std::size_t w = 0; w < nw; ++w) {
    out.loss += sys.wind[w].cost * out.wind[w] + sys.wind[w].spill_cost * out.spill[w];
  }
  out.loss += c_plus * out.y_plus[plus_bus] + c_minus * out.y_minus[minus_bus];
  return out;
}

}  // namespace stochdispatch
