#include "stochdispatch/linprog.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "stochdispatch/errors.hpp"

namespace stochdispatch::lp {

double SparseMatrix::coefficient(int row, int col) const {
  for (int k = col_start[col]; k < col_start[col + 1]; ++k) {
    if (row_index[k] == row) return value[k];
  }
  return 0.0;
}

std::vector<double> SparseMatrix::multiply(const std::vector<double>& x) const {
  std::vector<double> y(rows, 0.0);
  for (int j = 0; j < cols; ++j) {
    for (int k = col_start[j]; k < col_start[j + 1]; ++k) {
      y[row_index[k]] += value[k] * x[j];
    }
  }
  return y;
}

void SparseBuilder::add(int row, int col, double value) {
  if (row < 0 || row >= rows_ || col < 0 || col >= cols_) {
    throw InputError("sparse entry out of range");
  }
  entries_.push_back({row, col, value});
}

SparseMatrix SparseBuilder::build() const {
  std::vector<Entry> sorted = entries_;
  std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  SparseMatrix m;
  m.rows = rows_;
  m.cols = cols_;
  m.col_start.assign(cols_ + 1, 0);
  for (std::size_t k = 0; k < sorted.size();) {
    const Entry& e = sorted[k];
    double v = 0.0;
    std::size_t next = k;
    while (next < sorted.size() && sorted[next].col == e.col &&
           sorted[next].row == e.row) {
      v += sorted[next].value;
      ++next;
    }
    if (v != 0.0) {
      m.row_index.push_back(e.row);
      m.value.push_back(v);
      ++m.col_start[e.col + 1];
    }
    k = next;
  }
  for (int j = 0; j < cols_; ++j) m.col_start[j + 1] += m.col_start[j];
  return m;
}

const char* to_string(Status s) {
  switch (s) {
    case Status::kOptimal:
      return "optimal";
    case Status::kInfeasible:
      return "infeasible";
    case Status::kUnbounded:
      return "unbounded";
  }
  return "unknown";
}

void check_dimensions(const StandardFormLP& p) {
  const std::size_t n = p.objective.size();
  std::ostringstream err;
  if (p.a_eq.cols != static_cast<int>(n)) err << "A_eq has " << p.a_eq.cols << " columns, expected " << n << "; ";
  if (p.a_eq.rows != static_cast<int>(p.b_eq.size())) err << "A_eq has " << p.a_eq.rows << " rows but b_eq has " << p.b_eq.size() << "; ";
  if (p.lower.size() != n) err << "lower bounds size " << p.lower.size() << " != " << n << "; ";
  if (p.upper.size() != n) err << "upper bounds size " << p.upper.size() << " != " << n << "; ";
  if (!p.labels.empty() && p.labels.size() != n) err << "labels size " << p.labels.size() << " != " << n << "; ";
  if (p.a_eq.col_start.size() != static_cast<std::size_t>(p.a_eq.cols + 1)) err << "malformed column pointers; ";
  const std::string msg = err.str();
  if (!msg.empty()) throw InputError("LP dimension mismatch: " + msg);
}

namespace {

enum class VarState { kBasic, kAtLower, kAtUpper, kFree, kFixed };

// Bounded primal revised simplex over an explicit dense basis inverse with
// product-form updates and periodic refactorization. Rows without a usable
// singleton column get an artificial variable and a phase-1 pass.
class RevisedSimplex {
 public:
  RevisedSimplex(const StandardFormLP& p, const SolverOptions& opt)
      : p_(p), opt_(opt), m_(p.num_rows()), n_(p.num_vars()) {
    double bnorm = 0.0;
    for (double b : p.b_eq) bnorm = std::max(bnorm, std::abs(b));
    feas_tol_ = opt.feasibility_tol * (1.0 + bnorm);
    double cnorm = 0.0;
    for (double c : p.objective) cnorm = std::max(cnorm, std::abs(c));
    opt_tol_ = opt.optimality_tol * (1.0 + cnorm);
    max_iter_ = opt.max_iterations > 0 ? opt.max_iterations : 1000 + 100 * (m_ + n_);
  }

  LPSolution solve() {
    LPSolution sol;
    for (int j = 0; j < n_; ++j) {
      if (p_.lower[j] > p_.upper[j]) {
        sol.status = Status::kInfeasible;
        sol.x.assign(n_, 0.0);
        return sol;
      }
    }
    initialize();

    if (num_art_ > 0) {
      std::vector<double> phase1(cols_, 0.0);
      for (int k = n_; k < cols_; ++k) phase1[k] = 1.0;
      run(phase1);  // bounded below by zero, cannot be unbounded
      double infeas = 0.0;
      for (int k = n_; k < cols_; ++k) infeas += std::abs(x_[k]);
      if (infeas > feas_tol_) {
        sol.status = Status::kInfeasible;
        sol.x.assign(x_.begin(), x_.begin() + n_);
        sol.iterations = iterations_;
        return sol;
      }
      for (int k = n_; k < cols_; ++k) {
        upper_[k] = 0.0;
        if (state_[k] != VarState::kBasic) {
          state_[k] = VarState::kFixed;
          x_[k] = 0.0;
        }
      }
    }

    std::vector<double> phase2(cols_, 0.0);
    std::copy(p_.objective.begin(), p_.objective.end(), phase2.begin());
    const bool bounded = run(phase2);

    sol.x.assign(x_.begin(), x_.begin() + n_);
    sol.iterations = iterations_;
    if (!bounded) {
      sol.status = Status::kUnbounded;
      return sol;
    }
    sol.status = Status::kOptimal;
    sol.objective = 0.0;
    for (int j = 0; j < n_; ++j) sol.objective += p_.objective[j] * sol.x[j];
    sol.duals = duals(phase2);
    return sol;
  }

 private:
  // -- column access over structural + artificial columns --
  template <typename F>
  void for_column(int j, F&& f) const {
    if (j < n_) {
      const auto& a = p_.a_eq;
      for (int k = a.col_start[j]; k < a.col_start[j + 1]; ++k) f(a.row_index[k], a.value[k]);
    } else {
      const int r = art_row_[j - n_];
      f(r, art_sign_[j - n_]);
    }
  }

  int column_nnz(int j) const {
    return j < n_ ? p_.a_eq.col_start[j + 1] - p_.a_eq.col_start[j] : 1;
  }

  void initialize() {
    // Nonbasic placement at a finite bound (lower preferred), free at 0.
    x_.assign(n_, 0.0);
    state_.assign(n_, VarState::kAtLower);
    lower_ = p_.lower;
    upper_ = p_.upper;
    for (int j = 0; j < n_; ++j) {
      const double l = lower_[j], u = upper_[j];
      if (l == u) {
        state_[j] = VarState::kFixed;
        x_[j] = l;
      } else if (std::isfinite(l)) {
        state_[j] = VarState::kAtLower;
        x_[j] = l;
      } else if (std::isfinite(u)) {
        state_[j] = VarState::kAtUpper;
        x_[j] = u;
      } else {
        state_[j] = VarState::kFree;
        x_[j] = 0.0;
      }
    }

    std::vector<double> residual = p_.b_eq;
    for (int j = 0; j < n_; ++j) {
      if (x_[j] == 0.0) continue;
      for_column(j, [&](int r, double v) { residual[r] -= v * x_[j]; });
    }

    // Crash: a column singleton in row r that can absorb the residual
    // within its bounds becomes basic for that row.
    basis_.assign(m_, -1);
    for (int j = 0; j < n_; ++j) {
      if (column_nnz(j) != 1 || state_[j] == VarState::kFixed) continue;
      const int r = p_.a_eq.row_index[p_.a_eq.col_start[j]];
      const double a = p_.a_eq.value[p_.a_eq.col_start[j]];
      if (basis_[r] >= 0 || std::abs(a) < opt_.pivot_tol) continue;
      const double v = x_[j] + residual[r] / a;
      if (v >= lower_[j] - feas_tol_ && v <= upper_[j] + feas_tol_) {
        basis_[r] = j;
        state_[j] = VarState::kBasic;
        x_[j] = std::clamp(v, lower_[j], upper_[j]);
      }
    }

    num_art_ = 0;
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] >= 0) continue;
      const int k = n_ + num_art_++;
      art_row_.push_back(r);
      art_sign_.push_back(residual[r] >= 0.0 ? 1.0 : -1.0);
      x_.push_back(std::abs(residual[r]));
      lower_.push_back(0.0);
      upper_.push_back(kInf);
      state_.push_back(VarState::kBasic);
      basis_[r] = k;
    }
    cols_ = n_ + num_art_;
    refactor();
  }

  void refactor() {
    if (m_ == 0) return;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
      for_column(basis_[i], [&](int r, double v) { b(r, i) = v; });
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    binv_ = lu.inverse();
    if (!binv_.allFinite()) {
      throw NumericalError("singular basis during refactorization", primal());
    }
    // x_B = B^{-1} (b - N x_N)
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(p_.b_eq.data(), m_);
    for (int j = 0; j < cols_; ++j) {
      if (state_[j] == VarState::kBasic || x_[j] == 0.0) continue;
      for_column(j, [&](int r, double v) { rhs[r] -= v * x_[j]; });
    }
    Eigen::VectorXd xb = binv_ * rhs;
    for (int i = 0; i < m_; ++i) x_[basis_[i]] = xb[i];
    since_refactor_ = 0;
  }

  std::vector<double> primal() const {
    return std::vector<double>(x_.begin(), x_.begin() + std::min<int>(n_, x_.size()));
  }

  std::vector<double> duals(const std::vector<double>& cost) const {
    std::vector<double> y(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (int r = 0; r < m_; ++r) y[r] += cb * binv_(i, r);
    }
    return y;
  }

  // Returns false when the objective is unbounded below.
  bool run(const std::vector<double>& cost) {
    int degenerate_run = 0;
    bool bland = false;
    bool fresh = false;
    std::vector<double> alpha(m_);
    for (;;) {
      if (iterations_ >= max_iter_) {
        throw NumericalError("simplex iteration limit exceeded", primal());
      }
      if (since_refactor_ >= opt_.refactor_interval) {
        refactor();
        fresh = true;
      }

      const std::vector<double> y = duals(cost);
      int entering = -1;
      double best = 0.0;
      double dir = 0.0;
      for (int j = 0; j < cols_; ++j) {
        const VarState s = state_[j];
        if (s == VarState::kBasic || s == VarState::kFixed) continue;
        double d = cost[j];
        for_column(j, [&](int r, double v) { d -= y[r] * v; });
        double want = 0.0;
        if (d < -opt_tol_ && (s == VarState::kAtLower || s == VarState::kFree)) want = 1.0;
        if (d > opt_tol_ && (s == VarState::kAtUpper || s == VarState::kFree)) want = -1.0;
        if (want == 0.0) continue;
        if (bland) {
          entering = j;
          dir = want;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          entering = j;
          dir = want;
        }
      }

      if (entering < 0) {
        // Confirm optimality on a fresh factorization before stopping.
        if (fresh || m_ == 0) return true;
        refactor();
        fresh = true;
        continue;
      }
      fresh = false;

      std::fill(alpha.begin(), alpha.end(), 0.0);
      for_column(entering, [&](int r, double v) {
        for (int i = 0; i < m_; ++i) alpha[i] += binv_(i, r) * v;
      });

      // Harris two-pass ratio test. delta_i is the rate of change of x_B[i].
      double theta_relaxed = kInf;
      for (int i = 0; i < m_; ++i) {
        const double delta = -dir * alpha[i];
        const int bvar = basis_[i];
        if (delta < -opt_.pivot_tol && std::isfinite(lower_[bvar])) {
          theta_relaxed = std::min(theta_relaxed, (x_[bvar] - lower_[bvar] + feas_tol_) / -delta);
        } else if (delta > opt_.pivot_tol && std::isfinite(upper_[bvar])) {
          theta_relaxed = std::min(theta_relaxed, (upper_[bvar] - x_[bvar] + feas_tol_) / delta);
        }
      }
      theta_relaxed = std::max(theta_relaxed, 0.0);
      int leave = -1;
      double theta = kInf;
      double leave_bound = 0.0;
      double best_pivot = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double delta = -dir * alpha[i];
        const int bvar = basis_[i];
        double t = kInf, bound = 0.0;
        if (delta < -opt_.pivot_tol && std::isfinite(lower_[bvar])) {
          t = (x_[bvar] - lower_[bvar]) / -delta;
          bound = lower_[bvar];
        } else if (delta > opt_.pivot_tol && std::isfinite(upper_[bvar])) {
          t = (upper_[bvar] - x_[bvar]) / delta;
          bound = upper_[bvar];
        } else {
          continue;
        }
        t = std::max(t, 0.0);
        if (t > theta_relaxed) continue;
        const bool better =
            bland ? (leave < 0 || t < theta - 1e-12 ||
                     (t <= theta + 1e-12 && bvar < basis_[leave]))
                  : std::abs(alpha[i]) > best_pivot;
        if (better) {
          leave = i;
          theta = t;
          leave_bound = bound;
          best_pivot = std::abs(alpha[i]);
        }
      }
      theta = std::max(theta, 0.0);

      const double span = upper_[entering] - lower_[entering];
      if (std::isfinite(span) && span <= theta) {
        // Bound flip; the basis is unchanged.
        for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * span * alpha[i];
        if (dir > 0) {
          x_[entering] = upper_[entering];
          state_[entering] = VarState::kAtUpper;
        } else {
          x_[entering] = lower_[entering];
          state_[entering] = VarState::kAtLower;
        }
        ++iterations_;
        degenerate_run = 0;
        bland = false;
        continue;
      }
      if (leave < 0) return false;

      for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * theta * alpha[i];
      x_[entering] += dir * theta;
      const int out = basis_[leave];
      x_[out] = leave_bound;
      state_[out] = (lower_[out] == upper_[out])
                        ? VarState::kFixed
                        : (leave_bound == lower_[out] ? VarState::kAtLower : VarState::kAtUpper);
      state_[entering] = VarState::kBasic;
      basis_[leave] = entering;

      // Eta update of the explicit inverse.
      const double pivot = alpha[leave];
      Eigen::RowVectorXd pivot_row = binv_.row(leave) / pivot;
      Eigen::Map<const Eigen::VectorXd> a(alpha.data(), m_);
      binv_.noalias() -= a * pivot_row;
      binv_.row(leave) = pivot_row;
      ++since_refactor_;
      ++iterations_;

      if (theta <= 1e-12) {
        if (++degenerate_run > opt_.degenerate_pivots_before_bland) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
  }

  const StandardFormLP& p_;
  const SolverOptions& opt_;
  int m_, n_;
  int cols_ = 0;
  int num_art_ = 0;
  double feas_tol_ = 0.0;
  double opt_tol_ = 0.0;
  int max_iter_ = 0;
  int iterations_ = 0;
  int since_refactor_ = 0;

  std::vector<double> x_, lower_, upper_;
  std::vector<VarState> state_;
  std::vector<int> basis_;
  std::vector<int> art_row_;
  std::vector<double> art_sign_;
  Eigen::MatrixXd binv_;
};

}  // namespace

LPSolution solve_lp(const StandardFormLP& problem, const SolverOptions& options) {
  check_dimensions(problem);
  RevisedSimplex simplex(problem, options);
  return simplex.solve();
}

ResidualReport verify_solution(const StandardFormLP& p, const LPSolution& sol) {
  check_dimensions(p);
  if (sol.x.size() != p.objective.size()) {
    throw InputError("solution vector has the wrong length");
  }
  ResidualReport rep;
  const std::vector<double> ax = p.a_eq.multiply(sol.x);
  for (int r = 0; r < p.num_rows(); ++r) {
    rep.primal_residual = std::max(rep.primal_residual, std::abs(ax[r] - p.b_eq[r]));
  }
  double cx = 0.0;
  for (int j = 0; j < p.num_vars(); ++j) {
    const double x = sol.x[j];
    rep.bound_violation = std::max({rep.bound_violation, p.lower[j] - x, x - p.upper[j]});
    cx += p.objective[j] * x;
  }
  rep.objective_mismatch = std::abs(cx - sol.objective);

  if (sol.duals.size() == static_cast<std::size_t>(p.num_rows())) {
    double cnorm = 0.0;
    for (double c : p.objective) cnorm = std::max(cnorm, std::abs(c));
    const double dtol = 1e-9 * (1.0 + cnorm);
    for (int j = 0; j < p.num_vars(); ++j) {
      double d = p.objective[j];
      for (int k = p.a_eq.col_start[j]; k < p.a_eq.col_start[j + 1]; ++k) {
        d -= sol.duals[p.a_eq.row_index[k]] * p.a_eq.value[k];
      }
      // d > 0 points at the lower bound, d < 0 at the upper bound.
      const double bound = d > 0 ? p.lower[j] : p.upper[j];
      if (std::abs(d) <= dtol) continue;
      const double dist = std::isfinite(bound) ? std::abs(sol.x[j] - bound) : kInf;
      rep.complementarity_gap += std::abs(d) * dist;
    }
  }
  return rep;
}

}  // namespace stochdispatch::lp
