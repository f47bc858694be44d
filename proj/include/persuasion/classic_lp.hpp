#pragma once

#include <cstddef>

#include "persuasion/model.hpp"
#include "persuasion/simplex.hpp"

namespace persuasion {

/// The obedience LP over direct-revelation schemes. Variable x(a|w) lives at
/// column w * |A| + a.
struct ObedienceLP {
  lp::LinearProgram program;
  std::size_t states = 0;
  std::size_t actions = 0;

  std::size_t variable(StateIndex w, ActionIndex a) const { return w * actions + a; }
  std::size_t obedience_row_count() const { return actions * (actions - 1); }
  std::size_t simplex_row_count() const { return states; }

  bool is_feasible(const Vector& x, double eps) const {
    for (double xi : x)
      if (xi < -eps) return false;
    for (const auto& c : program.constraints) {
      const double lhs = dot(c.coefficients, x);
      if (c.sense == lp::Sense::kEqual && std::abs(lhs - c.rhs) > eps) return false;
      if (c.sense == lp::Sense::kGreaterEqual && lhs < c.rhs - eps) return false;
      if (c.sense == lp::Sense::kLessEqual && lhs > c.rhs + eps) return false;
    }
    return true;
  }
};

inline ObedienceLP build_obedience_lp(const PersuasionInstance& inst) {
  ObedienceLP out;
  out.states = inst.state_count();
  out.actions = inst.action_count();
  const std::size_t vars = out.states * out.actions;
  out.program.objective.assign(vars, 0.0);
  for (StateIndex w = 0; w < out.states; ++w)
    for (ActionIndex a = 0; a < out.actions; ++a)
      out.program.objective[out.variable(w, a)] = inst.prior()[w] * inst.u(a, w);

  // Recommending a must be weakly better than deviating to any other action.
  for (ActionIndex a = 0; a < out.actions; ++a) {
    for (ActionIndex other = 0; other < out.actions; ++other) {
      if (other == a) continue;
      Vector row(vars, 0.0);
      for (StateIndex w = 0; w < out.states; ++w)
        row[out.variable(w, a)] = inst.prior()[w] * (inst.v(a, w) - inst.v(other, w));
      out.program.add(std::move(row), lp::Sense::kGreaterEqual, 0.0);
    }
  }
  for (StateIndex w = 0; w < out.states; ++w) {
    Vector row(vars, 0.0);
    for (ActionIndex a = 0; a < out.actions; ++a) row[out.variable(w, a)] = 1.0;
    out.program.add(std::move(row), lp::Sense::kEqual, 1.0);
  }
  return out;
}

/// Always-feasible point: recommend the receiver's best action under the prior.
inline Vector prior_best_recommendation(const PersuasionInstance& inst, const ObedienceLP& lp) {
  const ActionIndex best = argmax(action_values(inst.receiver_utility(), inst.prior()));
  Vector x(lp.states * lp.actions, 0.0);
  for (StateIndex w = 0; w < lp.states; ++w) x[lp.variable(w, best)] = 1.0;
  return x;
}

struct ClassicSolution {
  SignalingScheme scheme;  // direct revelation
  double opt = 0.0;
  lp::LpSolution lp;
};

/// OPT^BP and an optimal direct-revelation scheme. Only `opt` is canonical;
/// the scheme is whichever optimal vertex the simplex lands on.
inline ClassicSolution solve_classic(const PersuasionInstance& inst, const lp::SimplexOptions& options = {}) {
  const ObedienceLP lp = build_obedience_lp(inst);
  lp::LpSolution sol;
  try {
    sol = lp::lp_solve(lp.program, options);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIterationLimit) throw;
    fail(ErrorCode::kLpNumericallyUnstable, e.detail());
  }

  Matrix cond(lp.states, lp.actions);
  for (StateIndex w = 0; w < lp.states; ++w) {
    double total = 0.0;
    for (ActionIndex a = 0; a < lp.actions; ++a) {
      double x = sol.x[lp.variable(w, a)];
      if (x < 1e-13) x = 0.0;
      cond(w, a) = x;
      total += x;
    }
    for (ActionIndex a = 0; a < lp.actions; ++a) cond(w, a) /= total;
  }
  return {SignalingScheme(inst.actions(), std::move(cond)), sol.objective, std::move(sol)};
}

}  // namespace persuasion
