#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "stochdispatch/coremodel.hpp"
#include "stochdispatch/linprog.hpp"

namespace testsupport {

namespace sd = stochdispatch;

// Single bus, one wind plant (c_w = 5, c_spl = 0), c+ = 1000, c- = 50 and
// two 0..100 MW units. Demand 100 MW, wind forecast 30 MW.
inline sd::SystemModel desk_system(double c_w = 5.0, double c_spl = 0.0) {
  sd::SystemModel s;
  s.generators = {{"g1", 10.0, 0.0, 100.0, 1000.0, 1000.0},
                  {"g2", 20.0, 0.0, 100.0, 1000.0, 1000.0}};
  s.wind = {{"w1", c_w, c_spl}};
  s.loads = {{"d1", 1000.0, 50.0}};
  return s;
}

inline sd::TimestepInput desk_step(double demand = 100.0, double forecast = 30.0) {
  sd::TimestepInput t;
  t.demand = {demand};
  t.wind_forecast = {forecast};
  return t;
}

// min c.x subject to rows of `ineq` (a.x <= b), optional equality rows and
// per-variable boxes, for three variables. Exhaustively intersects every
// triple of active constraints.
struct SmallLP {
  std::vector<std::array<double, 4>> ineq;  // a0 a1 a2 b
  std::vector<std::array<double, 4>> eq;
  std::array<double, 3> c{};
  std::array<double, 3> lo{}, hi{};
};

inline std::optional<double> vertex_enumeration(const SmallLP& lp) {
  struct Row {
    Eigen::Vector3d a;
    double b;
  };
  std::vector<Row> all;  // inequality-like rows a.x <= b
  for (const auto& r : lp.ineq) all.push_back({{r[0], r[1], r[2]}, r[3]});
  for (int j = 0; j < 3; ++j) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e[j] = 1.0;
    all.push_back({e, lp.hi[j]});
    all.push_back({-e, -lp.lo[j]});
  }
  std::vector<Row> eqs;
  for (const auto& r : lp.eq) eqs.push_back({{r[0], r[1], r[2]}, r[3]});
  const double tol = 1e-9;
  auto feasible = [&](const Eigen::Vector3d& x) {
    for (const Row& r : all) {
      if (r.a.dot(x) > r.b + tol * (1.0 + std::abs(r.b))) return false;
    }
    for (const Row& r : eqs) {
      if (std::abs(r.a.dot(x) - r.b) > tol * (1.0 + std::abs(r.b))) return false;
    }
    return true;
  };
  std::optional<double> best;
  const Eigen::Vector3d c(lp.c[0], lp.c[1], lp.c[2]);
  const int free = 3 - static_cast<int>(eqs.size());
  const int n = static_cast<int>(all.size());
  std::vector<int> pick(free);
  // All combinations of `free` active inequality rows.
  auto visit = [&](auto&& self, int start, int depth) -> void {
    if (depth == free) {
      Eigen::Matrix3d m;
      Eigen::Vector3d rhs;
      int k = 0;
      for (const Row& r : eqs) {
        m.row(k) = r.a.transpose();
        rhs[k++] = r.b;
      }
      for (int i : pick) {
        m.row(k) = all[i].a.transpose();
        rhs[k++] = all[i].b;
      }
      Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
      if (lu.rank() < 3) return;
      const Eigen::Vector3d x = lu.solve(rhs);
      if (!feasible(x)) return;
      const double v = c.dot(x);
      if (!best || v < *best) best = v;
      return;
    }
    for (int i = start; i < n; ++i) {
      pick[depth] = i;
      self(self, i + 1, depth + 1);
    }
  };
  visit(visit, 0, 0);
  return best;
}

// Same problem in the solver's form: one slack column per inequality row.
inline sd::lp::StandardFormLP to_standard_form(const SmallLP& lp) {
  const int m_in = static_cast<int>(lp.ineq.size());
  const int m_eq = static_cast<int>(lp.eq.size());
  const int n = 3 + m_in;
  sd::lp::SparseBuilder a(m_in + m_eq, n);
  sd::lp::StandardFormLP p;
  p.objective.assign(n, 0.0);
  p.lower.assign(n, 0.0);
  p.upper.assign(n, sd::lp::kInf);
  for (int j = 0; j < 3; ++j) {
    p.objective[j] = lp.c[j];
    p.lower[j] = lp.lo[j];
    p.upper[j] = lp.hi[j];
  }
  for (int i = 0; i < m_in; ++i) {
    for (int j = 0; j < 3; ++j) a.add(i, j, lp.ineq[i][j]);
    a.add(i, 3 + i, 1.0);
    p.b_eq.push_back(lp.ineq[i][3]);
  }
  for (int i = 0; i < m_eq; ++i) {
    for (int j = 0; j < 3; ++j) a.add(m_in + i, j, lp.eq[i][j]);
    p.b_eq.push_back(lp.eq[i][3]);
  }
  p.a_eq = a.build();
  return p;
}

// Random bounded 3-variable LP with up to six constraints. Inequalities
// pass through a random interior point so most instances are feasible.
inline SmallLP random_small_lp(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> count(1, 5);
  SmallLP lp;
  for (int j = 0; j < 3; ++j) {
    lp.c[j] = 5.0 * u(rng);
    lp.lo[j] = -2.0 + u(rng);
    lp.hi[j] = 2.0 + u(rng);
  }
  Eigen::Vector3d x0(0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng));
  const int m = count(rng);
  for (int i = 0; i < m; ++i) {
    Eigen::Vector3d a(u(rng), u(rng), u(rng));
    lp.ineq.push_back({a[0], a[1], a[2], a.dot(x0) + 0.5 * (u(rng) + 1.0)});
  }
  if (u(rng) > 0.4) {
    Eigen::Vector3d a(u(rng), u(rng), u(rng));
    lp.eq.push_back({a[0], a[1], a[2], a.dot(x0)});
  }
  return lp;
}

}  // namespace testsupport
