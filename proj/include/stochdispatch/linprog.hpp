#pragma once

#include <limits>
#include <string>
#include <vector>

namespace stochdispatch::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Column-compressed sparse matrix.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> col_start;  // size cols + 1
  std::vector<int> row_index;
  std::vector<double> value;

  double coefficient(int row, int col) const;
  // y = A x
  std::vector<double> multiply(const std::vector<double>& x) const;
};

// Accumulates (row, col, value) entries and compresses them. Duplicate
// entries are summed.
class SparseBuilder {
 public:
  SparseBuilder(int rows, int cols) : rows_(rows), cols_(cols) {}
  void add(int row, int col, double value);
  SparseMatrix build() const;

 private:
  struct Entry {
    int row, col;
    double value;
  };
  int rows_, cols_;
  std::vector<Entry> entries_;
};

// min c.x  s.t.  A x = b,  l <= x <= u. Bounds may be infinite.
struct StandardFormLP {
  std::vector<double> objective;
  SparseMatrix a_eq;
  std::vector<double> b_eq;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::string> labels;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(b_eq.size()); }
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

const char* to_string(Status s);

struct LPSolution {
  Status status = Status::kInfeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::vector<double> duals;  // one per equality row
  int iterations = 0;
};

struct SolverOptions {
  int max_iterations = 0;  // 0: derived from problem size
  // Consecutive degenerate pivots before switching to Bland's rule.
  int degenerate_pivots_before_bland = 30;
  int refactor_interval = 64;
  double feasibility_tol = 1e-8;  // scaled by (1 + |b|_inf)
  double pivot_tol = 1e-10;
  double optimality_tol = 1e-9;
};

// Throws InputError on dimension mismatch and NumericalError when the
// iteration limit is hit.
LPSolution solve_lp(const StandardFormLP& problem,
                    const SolverOptions& options = {});

struct ResidualReport {
  double primal_residual = 0.0;    // max |A x - b|
  double bound_violation = 0.0;    // max distance outside [l, u]
  double complementarity_gap = 0.0;  // sum |d_j| * distance to the bound d_j points at
  double objective_mismatch = 0.0;   // |c.x - reported objective|
};

ResidualReport verify_solution(const StandardFormLP& problem,
                               const LPSolution& solution);

// Throws InputError on inconsistent sizes.
void check_dimensions(const StandardFormLP& problem);

}  // namespace stochdispatch::lp
