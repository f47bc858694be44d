#pragma once

#include <algorithm>
#include <cmath>

#include "persuasion/model.hpp"

namespace persuasion {

/// Default strictness margin added on top of gamma / (mu_min * Delta).
inline constexpr double kDefaultAlphaMargin = 1e-6;

/// pi'(s|w) = (1 - alpha) pi(s|w) + alpha 1[s = a_w]: with probability alpha
/// recommend the receiver's unique optimal action for the realised state.
inline SignalingScheme robustify(const PersuasionInstance& inst, const SignalingScheme& scheme, double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, ErrorCode::kInvalidArgument, "alpha must lie in [0,1]");
  check_compatible(inst, scheme);
  check_direct(inst, scheme);
  const InstanceProfile profile = profile_instance(inst);

  Matrix cond(inst.state_count(), scheme.signal_count());
  for (StateIndex w = 0; w < inst.state_count(); ++w) {
    const ActionIndex target = profile.optimal_action(w);
    for (SignalIndex s = 0; s < scheme.signal_count(); ++s)
      cond(w, s) = (1.0 - alpha) * scheme(w, s) + (s == target ? alpha : 0.0);
  }
  return SignalingScheme(scheme.signals(), std::move(cond));
}

struct RobustificationReport {
  double alpha = 0.0;
  double marginal_identity_residual = 0.0;
  double advantage_bound_slack = kInfinity;
  double tv_distance = 0.0;
  double utility_gap = 0.0;
  SignalingScheme robustified;

  bool marginal_identity_holds() const { return marginal_identity_residual <= 1e-12; }
  bool advantage_bound_holds() const { return advantage_bound_slack >= -1e-10; }
  bool closeness_holds() const { return tv_distance <= alpha + 1e-12 && utility_gap <= alpha + 1e-12; }
  bool holds() const { return marginal_identity_holds() && advantage_bound_holds() && closeness_holds(); }
};

/// Audits the three guarantees of robustification by recomputing marginals,
/// posteriors, advantages and joint distributions of both schemes.
inline RobustificationReport verify_robustification(const PersuasionInstance& inst, const SignalingScheme& scheme,
                                                    double alpha) {
  RobustificationReport r{alpha, 0.0, kInfinity, 0.0, 0.0, robustify(inst, scheme, alpha)};
  const SignalingScheme& robust = r.robustified;
  const InstanceProfile profile = profile_instance(inst);

  const Vector before = signal_marginals(inst, scheme);
  const Vector after = signal_marginals(inst, robust);
  Vector region_mass(inst.action_count(), 0.0);
  for (StateIndex w = 0; w < inst.state_count(); ++w) region_mass[profile.optimal_action(w)] += inst.prior()[w];

  for (SignalIndex s = 0; s < robust.signal_count(); ++s) {
    const double predicted = (1.0 - alpha) * before[s] + alpha * region_mass[s];
    r.marginal_identity_residual = std::max(r.marginal_identity_residual, std::abs(after[s] - predicted));

    if (after[s] <= 0.0) continue;
    const double adv_after = advantage(inst, robust, s);
    if (std::isinf(adv_after)) continue;
    const double carried = before[s] > 0.0 ? (1.0 - alpha) * (before[s] / after[s]) * advantage(inst, scheme, s) : 0.0;
    const double bound = carried + alpha * (region_mass[s] / after[s]) * profile.gap;
    r.advantage_bound_slack = std::min(r.advantage_bound_slack, adv_after - bound);
  }

  const Matrix j_before = joint_distribution(inst, scheme);
  const Matrix j_after = joint_distribution(inst, robust);
  double l1 = 0.0;
  for (StateIndex w = 0; w < inst.state_count(); ++w)
    for (SignalIndex s = 0; s < robust.signal_count(); ++s) l1 += std::abs(j_after(w, s) - j_before(w, s));
  r.tv_distance = 0.5 * l1;

  const auto obedient = ReceiverStrategy::obedient(inst.action_count());
  r.utility_gap = std::abs(expected_utility(inst, robust, obedient) - expected_utility(inst, scheme, obedient));
  return r;
}

namespace detail {

inline double robustness_ratio(const PersuasionInstance& inst, double gamma) {
  require(gamma >= 0.0, ErrorCode::kInvalidArgument, "gamma must be non-negative");
  const InstanceProfile p = profile_instance(inst);
  require(p.assumption_satisfied, ErrorCode::kAssumptionViolated, "instance lacks unique per-state optima");
  const double ratio = std::isinf(p.gap) ? 0.0 : gamma / (p.mu_min * p.gap);
  require(ratio < 1.0, ErrorCode::kHypothesisViolated,
          "gamma / (mu_min * Delta) = " + std::to_string(ratio) + " is not below 1");
  return ratio;
}

}  // namespace detail

/// Smallest alpha (plus a strictness margin) making the obedient strategy the
/// only gamma-best response after robustifying an obedient scheme.
inline double choose_alpha_lower(const PersuasionInstance& inst, double gamma, double margin = kDefaultAlphaMargin) {
  return std::min(1.0, detail::robustness_ratio(inst, gamma) + margin);
}

/// alpha = gamma / (mu_min * Delta): enough to make obedience exactly
/// best-responding after robustifying a scheme with advantage >= -gamma.
inline double choose_alpha_upper(const PersuasionInstance& inst, double gamma) {
  return detail::robustness_ratio(inst, gamma);
}

}  // namespace persuasion
