#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "persuasion/persuasion.hpp"

using namespace persuasion;

namespace {

// Exact optimum of the obedience LP by enumerating basic solutions: every
// vertex makes (variables - equalities) of the inequalities tight.
double vertex_enumeration_opt(const PersuasionInstance& inst) {
  const std::size_t m = inst.state_count(), n = inst.action_count(), vars = m * n;
  std::vector<Vector> ineq;  // rows g with g.x >= 0
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      Vector g(vars, 0.0);
      for (std::size_t w = 0; w < m; ++w) g[w * n + a] = inst.prior()[w] * (inst.v(a, w) - inst.v(b, w));
      ineq.push_back(g);
    }
  for (std::size_t j = 0; j < vars; ++j) {
    Vector g(vars, 0.0);
    g[j] = 1.0;
    ineq.push_back(g);
  }
  const std::size_t pick = vars - m;
  std::vector<bool> chosen(ineq.size(), false);
  std::fill(chosen.end() - static_cast<long>(pick), chosen.end(), true);
  double best = -1.0;
  do {
    std::vector<Vector> rows;
    Vector rhs;
    for (std::size_t w = 0; w < m; ++w) {
      Vector r(vars, 0.0);
      for (std::size_t a = 0; a < n; ++a) r[w * n + a] = 1.0;
      rows.push_back(r);
      rhs.push_back(1.0);
    }
    for (std::size_t i = 0; i < ineq.size(); ++i)
      if (chosen[i]) {
        rows.push_back(ineq[i]);
        rhs.push_back(0.0);
      }
    // Gaussian elimination with partial pivoting.
    bool singular = false;
    for (std::size_t c = 0; c < vars && !singular; ++c) {
      std::size_t p = c;
      for (std::size_t r = c + 1; r < vars; ++r)
        if (std::abs(rows[r][c]) > std::abs(rows[p][c])) p = r;
      if (std::abs(rows[p][c]) < 1e-12) {
        singular = true;
        break;
      }
      std::swap(rows[p], rows[c]);
      std::swap(rhs[p], rhs[c]);
      for (std::size_t r = 0; r < vars; ++r) {
        if (r == c) continue;
        const double f = rows[r][c] / rows[c][c];
        for (std::size_t k = c; k < vars; ++k) rows[r][k] -= f * rows[c][k];
        rhs[r] -= f * rhs[c];
      }
    }
    if (singular) continue;
    Vector x(vars);
    for (std::size_t j = 0; j < vars; ++j) x[j] = rhs[j] / rows[j][j];
    bool feasible = true;
    for (const auto& g : ineq)
      if (std::inner_product(g.begin(), g.end(), x.begin(), 0.0) < -1e-10) feasible = false;
    if (!feasible) continue;
    double obj = 0.0;
    for (std::size_t w = 0; w < m; ++w)
      for (std::size_t a = 0; a < n; ++a) obj += inst.prior()[w] * x[w * n + a] * inst.u(a, w);
    best = std::max(best, obj);
  } while (std::next_permutation(chosen.begin(), chosen.end()));
  return best;
}

// Best obedient direct scheme over a grid of step 1/k on each state's row
// (two actions only).
double grid_opt_two_actions(const PersuasionInstance& inst, int k) {
  const std::size_t m = inst.state_count();
  std::vector<int> idx(m, 0);
  double best = -1.0;
  while (true) {
    double obj = 0.0, ob0 = 0.0, ob1 = 0.0;
    for (std::size_t w = 0; w < m; ++w) {
      const double x0 = static_cast<double>(idx[w]) / k, x1 = 1.0 - x0;
      obj += inst.prior()[w] * (x0 * inst.u(0, w) + x1 * inst.u(1, w));
      ob0 += inst.prior()[w] * x0 * (inst.v(0, w) - inst.v(1, w));
      ob1 += inst.prior()[w] * x1 * (inst.v(1, w) - inst.v(0, w));
    }
    if (ob0 >= -1e-12 && ob1 >= -1e-12) best = std::max(best, obj);
    std::size_t w = 0;
    while (w < m && ++idx[w] > k) idx[w++] = 0;
    if (w == m) break;
  }
  return best;
}

}  // namespace

TEST(ObedienceLp, Shape) {
  Rng rng(1);
  const auto inst = sampling::random_instance(4, 3, rng);
  const auto lp = build_obedience_lp(inst);
  EXPECT_EQ(lp.program.variable_count(), 12u);
  EXPECT_EQ(lp.obedience_row_count(), 6u);
  EXPECT_EQ(lp.simplex_row_count(), 4u);
  EXPECT_EQ(lp.program.constraints.size(), 10u);
  EXPECT_TRUE(lp.is_feasible(prior_best_recommendation(inst, lp), 1e-9));
}

TEST(ObedienceLp, WarmStartIsFeasibleOnRandomInstances) {
  Rng rng(2);
  for (int k = 0; k < 200; ++k) {
    const auto inst = sampling::random_instance(1 + rng.index(6), 1 + rng.index(5), rng);
    const auto lp = build_obedience_lp(inst);
    EXPECT_TRUE(lp.is_feasible(prior_best_recommendation(inst, lp), 1e-9));
  }
}

TEST(LpSolve, SingleVariable) {
  lp::LinearProgram prog{{0.7}, {}};
  prog.add({1.0}, lp::Sense::kEqual, 1.0);
  const auto sol = lp::lp_solve(prog);
  EXPECT_NEAR(sol.x[0], 1.0, 1e-12);
  EXPECT_NEAR(sol.objective, 0.7, 1e-12);
}

TEST(LpSolve, TextbookProgramWithDuals) {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18: optimum (2, 6) = 36, duals (0, 1.5, 1).
  lp::LinearProgram prog{{3.0, 5.0}, {}};
  prog.add({1.0, 0.0}, lp::Sense::kLessEqual, 4.0);
  prog.add({0.0, 2.0}, lp::Sense::kLessEqual, 12.0);
  prog.add({3.0, 2.0}, lp::Sense::kLessEqual, 18.0);
  const auto sol = lp::lp_solve(prog);
  EXPECT_NEAR(sol.objective, 36.0, 1e-9);
  EXPECT_NEAR(sol.x[0], 2.0, 1e-9);
  EXPECT_NEAR(sol.x[1], 6.0, 1e-9);
  EXPECT_NEAR(sol.duals[0], 0.0, 1e-9);
  EXPECT_NEAR(sol.duals[1], 1.5, 1e-9);
  EXPECT_NEAR(sol.duals[2], 1.0, 1e-9);
  EXPECT_LE(sol.duality_gap, 1e-7);
}

TEST(LpSolve, MixedSensesAndNegativeRhs) {
  // max -x - y, x + y >= 2, x - y = -1: optimum x = 0.5, y = 1.5.
  lp::LinearProgram prog{{-1.0, -1.0}, {}};
  prog.add({1.0, 1.0}, lp::Sense::kGreaterEqual, 2.0);
  prog.add({1.0, -1.0}, lp::Sense::kEqual, -1.0);
  const auto sol = lp::lp_solve(prog);
  EXPECT_NEAR(sol.objective, -2.0, 1e-9);
  EXPECT_NEAR(sol.x[0] - sol.x[1], -1.0, 1e-9);
}

TEST(LpSolve, InfeasibleProgram) {
  lp::LinearProgram prog{{1.0}, {}};
  prog.add({1.0}, lp::Sense::kLessEqual, 1.0);
  prog.add({1.0}, lp::Sense::kGreaterEqual, 2.0);
  try {
    lp::lp_solve(prog);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
  }
}

TEST(LpSolve, IterationLimit) {
  lp::LinearProgram prog{{3.0, 5.0}, {}};
  prog.add({1.0, 0.0}, lp::Sense::kLessEqual, 4.0);
  prog.add({3.0, 2.0}, lp::Sense::kLessEqual, 18.0);
  lp::SimplexOptions opt;
  opt.max_iterations = 0;
  try {
    lp::lp_solve(prog, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIterationLimit);
  }
}

TEST(LpSolve, DegenerateCyclingExample) {
  // Beale's cycling example; Bland's rule must terminate at 0.05.
  lp::LinearProgram prog{{0.75, -150.0, 0.02, -6.0}, {}};
  prog.add({0.25, -60.0, -0.04, 9.0}, lp::Sense::kLessEqual, 0.0);
  prog.add({0.5, -90.0, -0.02, 3.0}, lp::Sense::kLessEqual, 0.0);
  prog.add({0.0, 0.0, 1.0, 0.0}, lp::Sense::kLessEqual, 1.0);
  const auto sol = lp::lp_solve(prog);
  EXPECT_NEAR(sol.objective, 0.05, 1e-9);
}

TEST(SolveClassic, JudgeInstance) {
  const auto sol = solve_classic(judge_instance());
  EXPECT_NEAR(sol.opt, 0.6, 1e-8);
  EXPECT_NEAR(sol.scheme(0, 0), 1.0, 1e-9);
  EXPECT_NEAR(sol.scheme(1, 0), 3.0 / 7.0, 1e-9);
  EXPECT_NEAR(posterior(judge_instance(), sol.scheme, 0)[0], 0.5, 1e-9);
  EXPECT_LE(sol.lp.duality_gap, 1e-7);
}

TEST(SolveClassic, MismatchInstance) { EXPECT_NEAR(solve_classic(mismatch_instance()).opt, 0.5, 1e-8); }

TEST(SolveClassic, WeaklyDominatedInstance) {
  EXPECT_NEAR(solve_classic(weakly_dominated_instance()).opt, 0.5, 1e-8);
}

TEST(SolveClassic, SingleStateSingleAction) {
  const PersuasionInstance inst({"w"}, {"a"}, {1.0}, Matrix(1, 1, 0.4), Matrix(1, 1, 0.9));
  const auto sol = solve_classic(inst);
  EXPECT_NEAR(sol.opt, 0.4, 1e-12);
  EXPECT_NEAR(sol.scheme(0, 0), 1.0, 1e-12);
}

TEST(SolveClassic, AlignedInterestsRevealFully) {
  Rng rng(9);
  for (int k = 0; k < 100; ++k) {
    const std::size_t m = 1 + rng.index(5), n = 1 + rng.index(4);
    const Matrix u = sampling::random_utility(n, m, rng);
    const PersuasionInstance inst(sampling::labels("w", m), sampling::labels("a", n),
                                  sampling::random_distribution(m, rng), u, u);
    double expect = 0.0;
    for (std::size_t w = 0; w < m; ++w) {
      double top = 0.0;
      for (std::size_t a = 0; a < n; ++a) top = std::max(top, u(a, w));
      expect += inst.prior()[w] * top;
    }
    EXPECT_NEAR(solve_classic(inst).opt, expect, 1e-9);
  }
}

TEST(SolveClassic, MatchesVertexEnumerationOnRandomThreeByThree) {
  Rng rng(31);
  for (int k = 0; k < 40; ++k) {
    const auto inst = sampling::random_instance(3, 3, rng);
    EXPECT_NEAR(solve_classic(inst).opt, vertex_enumeration_opt(inst), 1e-8);
  }
}

TEST(SolveClassic, MatchesFineGridOnRandomThreeByTwo) {
  Rng rng(32);
  for (int k = 0; k < 10; ++k) {
    const auto inst = sampling::random_instance(3, 2, rng);
    const double grid = grid_opt_two_actions(inst, 200);
    const double opt = solve_classic(inst).opt;
    EXPECT_GE(opt, grid - 1e-9);
    EXPECT_NEAR(opt, grid, 0.01);
  }
}

TEST(SolveClassic, DominatesSimpleSchemesAndIsObedient) {
  Rng rng(33);
  for (int k = 0; k < 300; ++k) {
    const auto inst = sampling::random_instance(1 + rng.index(6), 1 + rng.index(5), rng);
    const auto sol = solve_classic(inst);
    const double uninformative =
        eval_objective_fixed_scheme(inst, uninformative_scheme(inst), 0.0, 0.0, ObjectiveMode::kBest).value;
    const double revealing =
        eval_objective_fixed_scheme(inst, full_revelation_scheme(inst), 0.0, 0.0, ObjectiveMode::kBest).value;
    EXPECT_GE(sol.opt, uninformative - 1e-9);
    EXPECT_GE(sol.opt, revealing - 1e-9);
    const auto obedient = ReceiverStrategy::obedient(inst.action_count());
    EXPECT_NEAR(expected_utility(inst, sol.scheme, obedient), sol.opt, 1e-9);
    EXPECT_TRUE(oracle::best_responding(inst, sol.scheme, obedient, 0.0, 0.0));
    EXPECT_GE(scheme_advantage(inst, sol.scheme), -1e-9);
  }
}

TEST(SolveClassic, PermutationInvariant) {
  Rng rng(34);
  for (int k = 0; k < 100; ++k) {
    const std::size_t m = 1 + rng.index(5), n = 1 + rng.index(4);
    const auto inst = sampling::random_instance(m, n, rng);
    std::vector<std::size_t> ps(m), pa(n);
    std::iota(ps.begin(), ps.end(), 0);
    std::iota(pa.begin(), pa.end(), 0);
    for (std::size_t i = m; i-- > 1;) std::swap(ps[i], ps[rng.index(i + 1)]);
    for (std::size_t i = n; i-- > 1;) std::swap(pa[i], pa[rng.index(i + 1)]);
    std::vector<std::string> states(m), actions(n);
    Vector prior(m);
    Matrix u(n, m), v(n, m);
    for (std::size_t w = 0; w < m; ++w) {
      states[w] = inst.states()[ps[w]];
      prior[w] = inst.prior()[ps[w]];
    }
    for (std::size_t a = 0; a < n; ++a) {
      actions[a] = inst.actions()[pa[a]];
      for (std::size_t w = 0; w < m; ++w) {
        u(a, w) = inst.u(pa[a], ps[w]);
        v(a, w) = inst.v(pa[a], ps[w]);
      }
    }
    const PersuasionInstance permuted(states, actions, prior, u, v);
    EXPECT_NEAR(solve_classic(inst).opt, solve_classic(permuted).opt, 1e-9);
  }
}
