#pragma once

#include <span>
#include <vector>

#include "stochdispatch/coremodel.hpp"
#include "stochdispatch/linprog.hpp"

namespace stochdispatch {

// Second-stage decision for one realized forecast error.
struct RecourseOutcome {
  double loss = 0.0;
  std::vector<double> wind;     // MW dispatched per plant
  std::vector<double> spill;    // MW spilled per plant
  std::vector<double> y_plus;   // loss-of-load per bus
  std::vector<double> y_minus;  // excess capacity per bus

  double loss_of_load() const;
  double excess() const;
};

// Physical wind availability, max(forecast + error, 0) per plant.
std::vector<double> available_wind(const TimestepInput& step,
                                   std::span<const double> error);

// Recourse LP at fixed first-stage dispatch. Variables are ordered
// [wind..., spill..., y_plus..., y_minus...]; row 0 is the aggregate power
// balance, rows 1..|W| define the spill of each plant.
lp::StandardFormLP build_recourse_lp(std::span<const double> dispatch,
                                     std::span<const double> error,
                                     const SystemModel& sys,
                                     const TimestepInput& step);

RecourseOutcome eval_loss_lp(std::span<const double> dispatch,
                             std::span<const double> error,
                             const SystemModel& sys, const TimestepInput& step);

// Closed-form merit-order solution of the same problem: wind plants are
// filled by increasing (c_w - c_spl) while that beats the slack it displaces,
// loss-of-load and excess go to the cheapest bus.
RecourseOutcome eval_loss_analytic(std::span<const double> dispatch,
                                   std::span<const double> error,
                                   const SystemModel& sys,
                                   const TimestepInput& step);

namespace detail {

inline int recourse_block_vars(const SystemModel& sys) {
  return 2 * static_cast<int>(sys.wind.size() + sys.loads.size());
}
inline int recourse_block_rows(const SystemModel& sys) {
  return 1 + static_cast<int>(sys.wind.size());
}

// Writes one recourse block into an LP under assembly. When
// `dispatch_col` >= 0 the generator columns [dispatch_col, dispatch_col+|G|)
// join the balance row; otherwise the balance right-hand side already has
// the dispatch subtracted via `balance_rhs`.
void append_recourse_block(lp::SparseBuilder& a, lp::StandardFormLP& problem,
                           int col_offset, int row_offset, int dispatch_col,
                           double balance_rhs, std::span<const double> avail,
                           const SystemModel& sys, double weight);

RecourseOutcome extract_outcome(std::span<const double> x, int col_offset,
                                const SystemModel& sys);

}  // namespace detail

}  // namespace stochdispatch
