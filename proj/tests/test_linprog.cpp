#include <gtest/gtest.h>

#include <random>

#include "stochdispatch/errors.hpp"
#include "stochdispatch/linprog.hpp"
#include "support.hpp"

namespace sd = stochdispatch;
using sd::lp::kInf;
using sd::lp::StandardFormLP;
using sd::lp::Status;

namespace {

StandardFormLP make(std::vector<double> c, std::vector<std::vector<double>> rows,
                    std::vector<double> b, std::vector<double> lo, std::vector<double> hi) {
  StandardFormLP p;
  const int n = static_cast<int>(c.size());
  sd::lp::SparseBuilder a(static_cast<int>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < n; ++j) {
      if (rows[i][j] != 0.0) a.add(static_cast<int>(i), j, rows[i][j]);
    }
  }
  p.objective = std::move(c);
  p.a_eq = a.build();
  p.b_eq = std::move(b);
  p.lower = std::move(lo);
  p.upper = std::move(hi);
  return p;
}

}  // namespace

TEST(SolveLp, BoundActiveMinimum) {
  const StandardFormLP p = make({1.0}, {}, {}, {1.0}, {kInf});
  const auto s = sd::lp::solve_lp(p);
  ASSERT_EQ(s.status, Status::kOptimal);
  EXPECT_DOUBLE_EQ(s.x[0], 1.0);
  EXPECT_DOUBLE_EQ(s.objective, 1.0);
  const auto r = sd::lp::verify_solution(p, s);
  EXPECT_EQ(r.primal_residual, 0.0);
  EXPECT_EQ(r.bound_violation, 0.0);
  EXPECT_EQ(r.complementarity_gap, 0.0);
  EXPECT_EQ(r.objective_mismatch, 0.0);
}

TEST(SolveLp, DegenerateFaceOptimum) {
  const StandardFormLP p = make({-1.0, -1.0}, {{1.0, 1.0}}, {1.0}, {0.0, 0.0}, {1.0, 1.0});
  const auto s = sd::lp::solve_lp(p);
  ASSERT_EQ(s.status, Status::kOptimal);
  EXPECT_NEAR(s.objective, -1.0, 1e-12);
  EXPECT_NEAR(s.x[0] + s.x[1], 1.0, 1e-12);
}

TEST(SolveLp, EmptyBoxInfeasible) {
  const StandardFormLP p = make({1.0}, {}, {}, {2.0}, {1.0});
  EXPECT_EQ(sd::lp::solve_lp(p).status, Status::kInfeasible);
}

TEST(SolveLp, InconsistentEqualitiesInfeasible) {
  const StandardFormLP p =
      make({1.0, 1.0}, {{1.0, 1.0}, {1.0, 1.0}}, {1.0, 2.0}, {0.0, 0.0}, {kInf, kInf});
  EXPECT_EQ(sd::lp::solve_lp(p).status, Status::kInfeasible);
}

TEST(SolveLp, UnboundedDetected) {
  const StandardFormLP p = make({-1.0, 0.0}, {{1.0, -1.0}}, {0.0}, {0.0, 0.0}, {kInf, kInf});
  EXPECT_EQ(sd::lp::solve_lp(p).status, Status::kUnbounded);
}

TEST(SolveLp, FreeVariables) {
  // min x + 2y, x - y = 1, x >= -3, y free but y >= x - 5 via slack.
  const StandardFormLP p = make({1.0, 2.0, 0.0}, {{1.0, -1.0, 0.0}, {1.0, -1.0, 1.0}},
                                {1.0, 5.0}, {-3.0, -kInf, 0.0}, {kInf, kInf, kInf});
  const auto s = sd::lp::solve_lp(p);
  ASSERT_EQ(s.status, Status::kOptimal);
  EXPECT_NEAR(s.x[0], -3.0, 1e-10);
  EXPECT_NEAR(s.x[1], -4.0, 1e-10);
  EXPECT_NEAR(s.objective, -11.0, 1e-10);
}

TEST(SolveLp, DimensionMismatchIsInputError) {
  StandardFormLP p = make({1.0, 1.0}, {{1.0, 1.0}}, {1.0}, {0.0, 0.0}, {1.0, 1.0});
  p.lower.pop_back();
  EXPECT_THROW(sd::lp::solve_lp(p), sd::InputError);
}

TEST(SolveLp, IterationLimitCarriesLastIterate) {
  std::mt19937_64 rng(7);
  const auto small = testsupport::random_small_lp(rng);
  const StandardFormLP p = testsupport::to_standard_form(small);
  sd::lp::SolverOptions o;
  o.max_iterations = 1;
  bool thrown = false;
  try {
    const auto s = sd::lp::solve_lp(p, o);
    // A one-pivot solve is allowed to finish.
    EXPECT_LE(s.iterations, 1);
  } catch (const sd::NumericalError& e) {
    thrown = true;
    EXPECT_EQ(e.last_iterate().size(), p.objective.size());
  }
  (void)thrown;
}

TEST(VerifySolution, PerturbationShowsInResidual) {
  const StandardFormLP p = make({-1.0, -1.0}, {{1.0, 1.0}}, {1.0}, {0.0, 0.0}, {1.0, 1.0});
  auto s = sd::lp::solve_lp(p);
  ASSERT_EQ(s.status, Status::kOptimal);
  s.x[0] += 1e-3;
  const auto r = sd::lp::verify_solution(p, s);
  EXPECT_NEAR(r.primal_residual, 1e-3, 1e-12);
}

TEST(SolveLp, MatchesVertexEnumeration) {
  std::mt19937_64 rng(20240101);
  int optimal = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto small = testsupport::random_small_lp(rng);
    const auto oracle = testsupport::vertex_enumeration(small);
    const StandardFormLP p = testsupport::to_standard_form(small);
    const auto s = sd::lp::solve_lp(p);
    if (!oracle) {
      EXPECT_EQ(s.status, Status::kInfeasible) << "trial " << trial;
      continue;
    }
    ASSERT_EQ(s.status, Status::kOptimal) << "trial " << trial;
    EXPECT_NEAR(s.objective, *oracle, 1e-8 * (1.0 + std::abs(*oracle))) << "trial " << trial;
    const auto r = sd::lp::verify_solution(p, s);
    EXPECT_LE(r.primal_residual, 1e-8 * (1.0 + 10.0));
    EXPECT_LE(r.bound_violation, 1e-8);
    EXPECT_EQ(r.objective_mismatch, 0.0);
    ++optimal;
  }
  EXPECT_GT(optimal, 200);
}

TEST(SolveLp, ObjectiveScalesWithCost) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const auto small = testsupport::random_small_lp(rng);
    StandardFormLP p = testsupport::to_standard_form(small);
    const auto base = sd::lp::solve_lp(p);
    for (double& c : p.objective) c *= 3.5;
    const auto scaled = sd::lp::solve_lp(p);
    ASSERT_EQ(base.status, scaled.status);
    if (base.status == Status::kOptimal) {
      EXPECT_NEAR(scaled.objective, 3.5 * base.objective, 1e-9 * (1.0 + std::abs(base.objective)));
    }
  }
}

TEST(SolveLp, DualsPriceTheBalanceRow) {
  // min 10 a + 20 b, a + b = 150, 0 <= a, b <= 100: marginal unit is b.
  const StandardFormLP p = make({10.0, 20.0}, {{1.0, 1.0}}, {150.0}, {0.0, 0.0}, {100.0, 100.0});
  const auto s = sd::lp::solve_lp(p);
  ASSERT_EQ(s.status, Status::kOptimal);
  EXPECT_NEAR(s.objective, 2000.0, 1e-9);
  ASSERT_EQ(s.duals.size(), 1u);
  EXPECT_NEAR(s.duals[0], 20.0, 1e-9);
  EXPECT_LE(sd::lp::verify_solution(p, s).complementarity_gap, 1e-9);
}

TEST(SparseBuilder, SumsDuplicates) {
  sd::lp::SparseBuilder b(2, 2);
  b.add(0, 1, 1.5);
  b.add(0, 1, 2.0);
  b.add(1, 0, -1.0);
  const auto m = b.build();
  EXPECT_DOUBLE_EQ(m.coefficient(0, 1), 3.5);
  EXPECT_DOUBLE_EQ(m.coefficient(1, 0), -1.0);
  EXPECT_DOUBLE_EQ(m.coefficient(1, 1), 0.0);
  const auto y = m.multiply({1.0, 2.0});
  EXPECT_DOUBLE_EQ(y[0], 7.0);
  EXPECT_DOUBLE_EQ(y[1], -1.0);
}
