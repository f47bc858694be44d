#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "persuasion/error.hpp"
#include "persuasion/matrix.hpp"

namespace persuasion {

using StateIndex = std::size_t;
using ActionIndex = std::size_t;
using SignalIndex = std::size_t;

inline constexpr double kDistributionSumTolerance = 1e-12;

namespace detail {

inline void require_unique(const std::vector<std::string>& ids, const char* what) {
  require(!ids.empty(), ErrorCode::kDimensionMismatch, std::string(what) + " must be non-empty");
  std::set<std::string> seen;
  for (const auto& id : ids)
    require(seen.insert(id).second, ErrorCode::kDuplicateIdentifier, std::string(what) + " identifier '" + id + "' repeated");
}

inline void require_row_stochastic(const Matrix& m, const char* what) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    require(is_distribution(m.row(r), kDistributionSumTolerance), ErrorCode::kInvalidProbability,
            std::string(what) + " row " + std::to_string(r) + " is not a probability vector");
}

}  // namespace detail

/// A finite Bayesian persuasion problem. Utility matrices are action-major:
/// `sender_utility()(a, w)` is u(a, w).
class PersuasionInstance {
 public:
  PersuasionInstance(std::vector<std::string> states, std::vector<std::string> actions, Vector prior,
                     Matrix sender_utility, Matrix receiver_utility)
      : states_(std::move(states)),
        actions_(std::move(actions)),
        prior_(std::move(prior)),
        sender_(std::move(sender_utility)),
        receiver_(std::move(receiver_utility)) {
    detail::require_unique(states_, "state");
    detail::require_unique(actions_, "action");
    require(prior_.size() == states_.size(), ErrorCode::kDimensionMismatch, "prior length differs from state count");
    require(is_distribution(prior_, kDistributionSumTolerance), ErrorCode::kInvalidProbability,
            "prior must be non-negative and sum to 1");
    check_utility(sender_, "sender_utility");
    check_utility(receiver_, "receiver_utility");
  }

  std::size_t state_count() const noexcept { return states_.size(); }
  std::size_t action_count() const noexcept { return actions_.size(); }

  const std::vector<std::string>& states() const noexcept { return states_; }
  const std::vector<std::string>& actions() const noexcept { return actions_; }
  const Vector& prior() const noexcept { return prior_; }
  const Matrix& sender_utility() const noexcept { return sender_; }
  const Matrix& receiver_utility() const noexcept { return receiver_; }

  double u(ActionIndex a, StateIndex w) const { return sender_(a, w); }
  double v(ActionIndex a, StateIndex w) const { return receiver_(a, w); }

 private:
  void check_utility(const Matrix& m, const char* what) const {
    require(m.rows() == actions_.size() && m.cols() == states_.size(), ErrorCode::kDimensionMismatch,
            std::string(what) + " must be |actions| x |states|");
    for (std::size_t a = 0; a < m.rows(); ++a)
      for (std::size_t w = 0; w < m.cols(); ++w)
        require(m(a, w) >= 0.0 && m(a, w) <= 1.0, ErrorCode::kUtilityOutOfRange,
                std::string(what) + " entry outside [0,1]");
  }

  std::vector<std::string> states_;
  std::vector<std::string> actions_;
  Vector prior_;
  Matrix sender_;
  Matrix receiver_;
};

enum class ProfileIssueKind { kTieAtState, kActionNeverOptimal, kZeroPriorState };

struct ProfileIssue {
  ProfileIssueKind kind;
  std::size_t index;  // state or action, depending on kind

  friend bool operator==(const ProfileIssue&, const ProfileIssue&) = default;
};

inline std::string to_string(ProfileIssueKind kind) {
  switch (kind) {
    case ProfileIssueKind::kTieAtState: return "TIE_AT_STATE";
    case ProfileIssueKind::kActionNeverOptimal: return "ACTION_NEVER_OPTIMAL";
    case ProfileIssueKind::kZeroPriorState: return "ZERO_PRIOR_STATE";
  }
  return "UNKNOWN";
}

/// Receiver-side structure of an instance: per-state unique optima, the
/// optimality gap and the regions on which each action is optimal.
struct InstanceProfile {
  std::vector<std::optional<ActionIndex>> per_state_optimal;
  double gap = 0.0;  // +inf with a single action
  std::vector<std::vector<StateIndex>> optimal_regions;
  Vector region_mass;  // mu(Omega_a)
  double mu_min = 0.0;
  bool assumption_satisfied = false;
  std::vector<ProfileIssue> issues;

  ActionIndex optimal_action(StateIndex w) const {
    require(per_state_optimal[w].has_value(), ErrorCode::kAssumptionViolated,
            "state " + std::to_string(w) + " has no unique optimal action");
    return *per_state_optimal[w];
  }
};

inline InstanceProfile profile_instance(const PersuasionInstance& inst) {
  const std::size_t m = inst.state_count();
  const std::size_t n = inst.action_count();
  InstanceProfile p;
  p.per_state_optimal.assign(m, std::nullopt);
  p.optimal_regions.assign(n, {});
  p.region_mass.assign(n, 0.0);
  p.gap = kInfinity;

  for (StateIndex w = 0; w < m; ++w) {
    ActionIndex best = 0;
    for (ActionIndex a = 1; a < n; ++a)
      if (inst.v(a, w) > inst.v(best, w)) best = a;
    double second = -kInfinity;
    for (ActionIndex a = 0; a < n; ++a)
      if (a != best) second = std::max(second, inst.v(a, w));
    const double margin = inst.v(best, w) - second;  // +inf when n == 1
    p.gap = std::min(p.gap, margin);
    if (margin > 0.0) {
      p.per_state_optimal[w] = best;
      p.optimal_regions[best].push_back(w);
      p.region_mass[best] += inst.prior()[w];
    } else {
      p.issues.push_back({ProfileIssueKind::kTieAtState, w});
    }
  }
  for (ActionIndex a = 0; a < n; ++a)
    if (p.optimal_regions[a].empty()) p.issues.push_back({ProfileIssueKind::kActionNeverOptimal, a});

  p.mu_min = *std::min_element(inst.prior().begin(), inst.prior().end());
  for (StateIndex w = 0; w < m; ++w)
    if (inst.prior()[w] <= 0.0) p.issues.push_back({ProfileIssueKind::kZeroPriorState, w});

  p.assumption_satisfied = p.issues.empty();
  return p;
}

/// Conditional signal table pi(s|w), one row per state.
class SignalingScheme {
 public:
  SignalingScheme(std::vector<std::string> signals, Matrix conditional)
      : signals_(std::move(signals)), conditional_(std::move(conditional)) {
    detail::require_unique(signals_, "signal");
    require(conditional_.cols() == signals_.size(), ErrorCode::kDimensionMismatch,
            "conditional has " + std::to_string(conditional_.cols()) + " columns for " +
                std::to_string(signals_.size()) + " signals");
    detail::require_row_stochastic(conditional_, "conditional");
  }

  std::size_t signal_count() const noexcept { return signals_.size(); }
  std::size_t state_count() const noexcept { return conditional_.rows(); }
  const std::vector<std::string>& signals() const noexcept { return signals_; }
  const Matrix& conditional() const noexcept { return conditional_; }

  double operator()(StateIndex w, SignalIndex s) const { return conditional_(w, s); }

  /// Signals coincide with the instance's actions, in the same order.
  bool is_direct_revelation(const PersuasionInstance& inst) const { return signals_ == inst.actions(); }

  friend bool operator==(const SignalingScheme&, const SignalingScheme&) = default;

 private:
  std::vector<std::string> signals_;
  Matrix conditional_;
};

/// Per-signal action distribution rho(a|s), one row per signal.
class ReceiverStrategy {
 public:
  explicit ReceiverStrategy(Matrix action_distribution) : rho_(std::move(action_distribution)) {
    detail::require_row_stochastic(rho_, "strategy");
  }

  /// rho(a|s) = 1[a = s] on a direct-revelation scheme.
  static ReceiverStrategy obedient(std::size_t actions) {
    Matrix rho(actions, actions);
    for (std::size_t a = 0; a < actions; ++a) rho(a, a) = 1.0;
    return ReceiverStrategy(std::move(rho));
  }

  static ReceiverStrategy deterministic(const std::vector<ActionIndex>& choice, std::size_t actions) {
    Matrix rho(choice.size(), actions);
    for (std::size_t s = 0; s < choice.size(); ++s) {
      require(choice[s] < actions, ErrorCode::kDimensionMismatch, "action index out of range");
      rho(s, choice[s]) = 1.0;
    }
    return ReceiverStrategy(std::move(rho));
  }

  std::size_t signal_count() const noexcept { return rho_.rows(); }
  std::size_t action_count() const noexcept { return rho_.cols(); }
  const Matrix& action_distribution() const noexcept { return rho_; }
  double operator()(SignalIndex s, ActionIndex a) const { return rho_(s, a); }

  /// The chosen action per signal when every row is a point mass.
  std::optional<std::vector<ActionIndex>> deterministic_choice() const {
    std::vector<ActionIndex> out(rho_.rows());
    for (std::size_t s = 0; s < rho_.rows(); ++s) {
      const auto row = rho_.row(s);
      const ActionIndex a = argmax(row);
      if (std::abs(row[a] - 1.0) > kDistributionSumTolerance) return std::nullopt;
      out[s] = a;
    }
    return out;
  }

 private:
  Matrix rho_;
};

inline void check_compatible(const PersuasionInstance& inst, const SignalingScheme& scheme) {
  require(scheme.state_count() == inst.state_count(), ErrorCode::kDimensionMismatch,
          "scheme has " + std::to_string(scheme.state_count()) + " state rows, instance has " +
              std::to_string(inst.state_count()));
}

inline void check_compatible(const PersuasionInstance& inst, const SignalingScheme& scheme,
                             const ReceiverStrategy& strategy) {
  check_compatible(inst, scheme);
  require(strategy.signal_count() == scheme.signal_count() && strategy.action_count() == inst.action_count(),
          ErrorCode::kDimensionMismatch, "strategy shape does not match |signals| x |actions|");
}

inline void check_direct(const PersuasionInstance& inst, const SignalingScheme& scheme) {
  require(scheme.is_direct_revelation(inst), ErrorCode::kNotDirectRevelation,
          "signals must equal the action list in order");
}

/// pi(s) = sum_w mu(w) pi(s|w).
inline Vector signal_marginals(const PersuasionInstance& inst, const SignalingScheme& scheme) {
  check_compatible(inst, scheme);
  Vector out(scheme.signal_count(), 0.0);
  for (StateIndex w = 0; w < inst.state_count(); ++w)
    for (SignalIndex s = 0; s < scheme.signal_count(); ++s) out[s] += inst.prior()[w] * scheme(w, s);
  return out;
}

/// Joint distribution pi(w, s) = mu(w) pi(s|w).
inline Matrix joint_distribution(const PersuasionInstance& inst, const SignalingScheme& scheme) {
  check_compatible(inst, scheme);
  Matrix out(inst.state_count(), scheme.signal_count());
  for (StateIndex w = 0; w < inst.state_count(); ++w)
    for (SignalIndex s = 0; s < scheme.signal_count(); ++s) out(w, s) = inst.prior()[w] * scheme(w, s);
  return out;
}

inline Vector posterior(const PersuasionInstance& inst, const SignalingScheme& scheme, SignalIndex s) {
  check_compatible(inst, scheme);
  require(s < scheme.signal_count(), ErrorCode::kDimensionMismatch, "signal index out of range");
  Vector post(inst.state_count());
  double mass = 0.0;
  for (StateIndex w = 0; w < inst.state_count(); ++w) {
    post[w] = inst.prior()[w] * scheme(w, s);
    mass += post[w];
  }
  require(mass > 0.0, ErrorCode::kZeroProbabilitySignal, "signal '" + scheme.signals()[s] + "' has zero probability");
  for (double& x : post) x /= mass;
  return post;
}

/// Per-action expected utility under a belief, for either party's matrix.
inline Vector action_values(const Matrix& utility, std::span<const double> belief) {
  Vector out(utility.rows());
  for (std::size_t a = 0; a < utility.rows(); ++a) out[a] = dot(utility.row(a), belief);
  return out;
}

enum class Party { kSender, kReceiver };

/// U(pi, rho) = sum_{w,s} mu(w) pi(s|w) sum_a rho(a|s) u(a,w).
inline double expected_utility(const PersuasionInstance& inst, const SignalingScheme& scheme,
                               const ReceiverStrategy& strategy, Party party = Party::kSender) {
  check_compatible(inst, scheme, strategy);
  const Matrix& util = party == Party::kSender ? inst.sender_utility() : inst.receiver_utility();
  double total = 0.0;
  for (StateIndex w = 0; w < inst.state_count(); ++w) {
    for (SignalIndex s = 0; s < scheme.signal_count(); ++s) {
      const double joint = inst.prior()[w] * scheme(w, s);
      if (joint == 0.0) continue;
      double inner = 0.0;
      for (ActionIndex a = 0; a < inst.action_count(); ++a) inner += strategy(s, a) * util(a, w);
      total += joint * inner;
    }
  }
  return total;
}

/// v(s, mu_s) - max_{a != s} v(a, mu_s); +inf with a single action.
inline double advantage(const PersuasionInstance& inst, const SignalingScheme& scheme, SignalIndex s) {
  check_direct(inst, scheme);
  const Vector values = action_values(inst.receiver_utility(), posterior(inst, scheme, s));
  double rival = -kInfinity;
  for (ActionIndex a = 0; a < values.size(); ++a)
    if (a != s) rival = std::max(rival, values[a]);
  return values[s] - rival;
}

/// Minimum advantage over signals with positive marginal.
inline double scheme_advantage(const PersuasionInstance& inst, const SignalingScheme& scheme) {
  check_direct(inst, scheme);
  const Vector marginal = signal_marginals(inst, scheme);
  double out = kInfinity;
  for (SignalIndex s = 0; s < scheme.signal_count(); ++s)
    if (marginal[s] > 0.0) out = std::min(out, advantage(inst, scheme, s));
  return out;
}

/// Indices a with values[a] >= max(values) - gamma - eps.
inline std::vector<ActionIndex> near_best_actions(std::span<const double> values, double gamma, double eps) {
  const double best = *std::max_element(values.begin(), values.end());
  std::vector<ActionIndex> out;
  for (ActionIndex a = 0; a < values.size(); ++a)
    if (values[a] >= best - gamma - eps) out.push_back(a);
  return out;
}

/// Restricts a (gamma, delta)-best-responding strategy to the gamma-best
/// actions of each signal and renormalises, leaving zero-probability signals
/// untouched. |U(pi, rho) - U(pi, result)| <= delta.
inline ReceiverStrategy project_strategy(const PersuasionInstance& inst, const SignalingScheme& scheme,
                                         const ReceiverStrategy& strategy, double gamma, const Tolerances& tol = {}) {
  check_compatible(inst, scheme, strategy);
  const Vector marginal = signal_marginals(inst, scheme);
  Matrix rho = strategy.action_distribution();
  for (SignalIndex s = 0; s < scheme.signal_count(); ++s) {
    if (marginal[s] <= 0.0) continue;
    const Vector values = action_values(inst.receiver_utility(), posterior(inst, scheme, s));
    std::vector<bool> member(inst.action_count(), false);
    for (ActionIndex a : near_best_actions(values, gamma, tol.eps_num)) member[a] = true;
    double mass = 0.0;
    for (ActionIndex a = 0; a < inst.action_count(); ++a)
      if (member[a]) mass += rho(s, a);
    require(mass > 0.0, ErrorCode::kNoMassOnApproxSet,
            "strategy puts no mass on gamma-best actions at signal '" + scheme.signals()[s] + "'");
    for (ActionIndex a = 0; a < inst.action_count(); ++a) rho(s, a) = member[a] ? rho(s, a) / mass : 0.0;
  }
  return ReceiverStrategy(std::move(rho));
}

inline SignalingScheme full_revelation_scheme(const PersuasionInstance& inst) {
  Matrix cond(inst.state_count(), inst.state_count());
  for (StateIndex w = 0; w < inst.state_count(); ++w) cond(w, w) = 1.0;
  return SignalingScheme(inst.states(), std::move(cond));
}

inline SignalingScheme uninformative_scheme(const PersuasionInstance& inst) {
  return SignalingScheme({"none"}, Matrix(inst.state_count(), 1, 1.0));
}

/// Direct scheme recommending the same action in every state.
inline SignalingScheme constant_recommendation(const PersuasionInstance& inst, ActionIndex a) {
  Matrix cond(inst.state_count(), inst.action_count());
  for (StateIndex w = 0; w < inst.state_count(); ++w) cond(w, a) = 1.0;
  return SignalingScheme(inst.actions(), std::move(cond));
}

// Bundled instances.

/// Prosecutor/judge: the prosecutor always wants a conviction, the judge
/// wants to convict exactly the guilty. Pr[guilty] = 0.3.
inline PersuasionInstance judge_instance() {
  return PersuasionInstance({"guilty", "innocent"}, {"convict", "acquit"}, {0.3, 0.7},
                            Matrix::from_rows({{1.0, 1.0}, {0.0, 0.0}}),
                            Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}}));
}

/// Two states where a2 is weakly dominant for the receiver; no robust
/// scheme exists.
inline PersuasionInstance weakly_dominated_instance() {
  return PersuasionInstance({"w1", "w2"}, {"a1", "a2"}, {0.5, 0.5},
                            Matrix::from_rows({{1.0, 0.0}, {0.0, 0.0}}),
                            Matrix::from_rows({{0.0, 0.0}, {0.0, 1.0}}));
}

/// Good/Bad states: the receiver wants to match the state, the sender wants a
/// mismatch.
inline PersuasionInstance mismatch_instance() {
  return PersuasionInstance({"G", "B"}, {"a", "b"}, {0.5, 0.5},
                            Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}}),
                            Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}}));
}

}  // namespace persuasion
