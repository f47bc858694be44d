#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "persuasion/model.hpp"
#include "persuasion/random.hpp"

namespace persuasion {

/// gamma-best-responding actions A^gamma(s) for every signal with positive
/// marginal; zero-probability signals get an empty set.
struct ApproxResponseSet {
  double gamma = 0.0;
  Vector marginal;
  std::vector<std::vector<ActionIndex>> members;
  Vector best_value;  // v(a*(s), mu_s)
  double threshold_margin = kInfinity;  // min |v(a, mu_s) - (best - gamma)| over actions
  bool knife_edge = false;

  bool contains(SignalIndex s, ActionIndex a) const {
    return std::find(members[s].begin(), members[s].end(), a) != members[s].end();
  }
};

inline ApproxResponseSet approx_set(const PersuasionInstance& inst, const SignalingScheme& scheme, double gamma,
                                    const Tolerances& tol = {}) {
  require(gamma >= 0.0, ErrorCode::kInvalidArgument, "gamma must be non-negative");
  ApproxResponseSet out;
  out.gamma = gamma;
  out.marginal = signal_marginals(inst, scheme);
  out.members.resize(scheme.signal_count());
  out.best_value.assign(scheme.signal_count(), 0.0);
  for (SignalIndex s = 0; s < scheme.signal_count(); ++s) {
    if (out.marginal[s] <= 0.0) continue;
    const Vector values = action_values(inst.receiver_utility(), posterior(inst, scheme, s));
    out.best_value[s] = *std::max_element(values.begin(), values.end());
    out.members[s] = near_best_actions(values, gamma, tol.eps_num);
    for (double v : values) {
      const double margin = std::abs(v - (out.best_value[s] - gamma));
      // The best action itself sits exactly gamma above the threshold.
      if (gamma == 0.0 && v == out.best_value[s]) continue;
      out.threshold_margin = std::min(out.threshold_margin, margin);
    }
  }
  out.knife_edge = out.threshold_margin < 10.0 * tol.eps_num;
  return out;
}

/// Per-signal mass the strategy puts on A^gamma(s).
inline Vector membership_mass(const PersuasionInstance& inst, const SignalingScheme& scheme,
                              const ReceiverStrategy& strategy, double gamma, const Tolerances& tol = {}) {
  check_compatible(inst, scheme, strategy);
  const ApproxResponseSet set = approx_set(inst, scheme, gamma, tol);
  Vector mass(scheme.signal_count(), 1.0);
  for (SignalIndex s = 0; s < scheme.signal_count(); ++s) {
    if (set.marginal[s] <= 0.0) continue;
    mass[s] = 0.0;
    for (ActionIndex a : set.members[s]) mass[s] += strategy(s, a);
  }
  return mass;
}

/// (gamma, delta)-best-responding: mass >= 1 - delta on A^gamma(s) at every
/// positive-probability signal.
inline bool is_best_responding(const PersuasionInstance& inst, const SignalingScheme& scheme,
                               const ReceiverStrategy& strategy, double gamma, double delta = 0.0,
                               const Tolerances& tol = {}) {
  for (double m : membership_mass(inst, scheme, strategy, gamma, tol))
    if (m < 1.0 - delta - tol.eps_num) return false;
  return true;
}

enum class ObjectiveMode { kWorst, kBest };

inline std::string to_string(ObjectiveMode mode) { return mode == ObjectiveMode::kWorst ? "worst" : "best"; }

struct ObjectiveEstimate {
  double value = 0.0;
  ObjectiveMode mode = ObjectiveMode::kWorst;
  double gamma = 0.0;
  double delta = 0.0;
  ReceiverStrategy witness;
  bool knife_edge = false;
};

/// Exact inf (worst) or sup (best) of the sender's utility over all
/// (gamma, delta)-best-responding strategies for a fixed scheme. Constraints
/// bind per signal and utility is linear in rho(.|s), so each signal puts
/// 1 - delta on the extreme gamma-best action and delta on the extreme action
/// overall.
inline ObjectiveEstimate eval_objective_fixed_scheme(const PersuasionInstance& inst, const SignalingScheme& scheme,
                                                     double gamma, double delta, ObjectiveMode mode,
                                                     const Tolerances& tol = {}) {
  require(gamma >= 0.0, ErrorCode::kInvalidArgument, "gamma must be non-negative");
  require(delta >= 0.0 && delta < 1.0, ErrorCode::kInvalidArgument, "delta must lie in [0,1)");
  const ApproxResponseSet set = approx_set(inst, scheme, gamma, tol);
  const std::size_t n = inst.action_count();
  const bool worst = mode == ObjectiveMode::kWorst;
  auto better = [worst](double x, double y) { return worst ? x < y : x > y; };

  Matrix rho(scheme.signal_count(), n);
  double value = 0.0;
  for (SignalIndex s = 0; s < scheme.signal_count(); ++s) {
    if (set.marginal[s] <= 0.0) {
      rho(s, 0) = 1.0;
      continue;
    }
    const Vector sender = action_values(inst.sender_utility(), posterior(inst, scheme, s));
    ActionIndex inside = set.members[s].front();
    for (ActionIndex a : set.members[s])
      if (better(sender[a], sender[inside])) inside = a;
    ActionIndex anywhere = 0;
    for (ActionIndex a = 1; a < n; ++a)
      if (better(sender[a], sender[anywhere])) anywhere = a;
    rho(s, inside) += 1.0 - delta;
    rho(s, anywhere) += delta;
    value += set.marginal[s] * ((1.0 - delta) * sender[inside] + delta * sender[anywhere]);
  }
  return {value, mode, gamma, delta, ReceiverStrategy(std::move(rho)), set.knife_edge};
}

/// Softmax response rho(a|s) proportional to exp(lambda v(a, mu_s)).
inline ReceiverStrategy quantal_strategy(const PersuasionInstance& inst, const SignalingScheme& scheme, double lambda) {
  require(lambda >= 0.0, ErrorCode::kInvalidArgument, "lambda must be non-negative");
  const Vector marginal = signal_marginals(inst, scheme);
  const std::size_t n = inst.action_count();
  Matrix rho(scheme.signal_count(), n, 1.0 / static_cast<double>(n));
  for (SignalIndex s = 0; s < scheme.signal_count(); ++s) {
    if (marginal[s] <= 0.0) continue;
    const Vector values = action_values(inst.receiver_utility(), posterior(inst, scheme, s));
    const double top = *std::max_element(values.begin(), values.end());
    double z = 0.0;
    for (ActionIndex a = 0; a < n; ++a) z += rho(s, a) = std::exp(lambda * (values[a] - top));
    for (ActionIndex a = 0; a < n; ++a) rho(s, a) /= z;
  }
  return ReceiverStrategy(std::move(rho));
}

/// (gamma, delta) = (log(|A| lambda) / lambda, 1 / lambda) for lambda > 0.
inline std::pair<double, double> quantal_certificate(std::size_t actions, double lambda) {
  require(lambda > 0.0, ErrorCode::kInvalidArgument, "certificate needs lambda > 0");
  const double gamma = std::log(static_cast<double>(actions) * lambda) / lambda;
  return {std::max(0.0, gamma), 1.0 / lambda};
}

/// Zero-sum direction with unit total-variation norm, uniformly oriented.
inline Vector random_tv_direction(std::size_t dim, Rng& rng) {
  Vector d(dim, 0.0);
  if (dim < 2) return d;
  double l1 = 0.0;
  while (l1 <= 0.0) {
    double mean = 0.0;
    for (double& x : d) mean += x = rng.uniform(-1.0, 1.0);
    mean /= static_cast<double>(dim);
    l1 = 0.0;
    for (double& x : d) l1 += std::abs(x -= mean);
  }
  for (double& x : d) x *= 2.0 / l1;
  return d;
}

/// A belief within total variation epsilon of `belief`, moving along a random
/// direction and stopping at the simplex boundary.
inline Vector perturb_belief(std::span<const double> belief, double epsilon, Rng& rng) {
  const Vector d = random_tv_direction(belief.size(), rng);
  double step = epsilon;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] < 0.0) step = std::min(step, belief[i] / -d[i]);
  Vector out(belief.begin(), belief.end());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = std::max(0.0, out[i] + step * d[i]);
  return out;
}

/// Best-responds (first argmax) to a perturbed posterior at every signal;
/// certified (2 epsilon, 0)-best-responding.
inline ReceiverStrategy perturbed_posterior_strategy(const PersuasionInstance& inst, const SignalingScheme& scheme,
                                                     double epsilon, Rng& rng) {
  require(epsilon >= 0.0 && epsilon <= 1.0, ErrorCode::kInvalidArgument, "epsilon must lie in [0,1]");
  const Vector marginal = signal_marginals(inst, scheme);
  std::vector<ActionIndex> choice(scheme.signal_count(), 0);
  for (SignalIndex s = 0; s < scheme.signal_count(); ++s) {
    if (marginal[s] <= 0.0) continue;
    const Vector belief = perturb_belief(posterior(inst, scheme, s), epsilon, rng);
    choice[s] = argmax(action_values(inst.receiver_utility(), belief));
  }
  return ReceiverStrategy::deterministic(choice, inst.action_count());
}

/// pi_direct(a|w) = sum over signals mapped to a of pi(s|w).
inline SignalingScheme to_direct_revelation(const PersuasionInstance& inst, const SignalingScheme& scheme,
                                            const ReceiverStrategy& strategy) {
  check_compatible(inst, scheme, strategy);
  const auto choice = strategy.deterministic_choice();
  require(choice.has_value(), ErrorCode::kStrategyNotDeterministic, "every strategy row must be a point mass");
  Matrix cond(inst.state_count(), inst.action_count());
  for (StateIndex w = 0; w < inst.state_count(); ++w)
    for (SignalIndex s = 0; s < scheme.signal_count(); ++s) cond(w, (*choice)[s]) += scheme(w, s);
  return SignalingScheme(inst.actions(), std::move(cond));
}

}  // namespace persuasion
