#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "persuasion/error.hpp"
#include "persuasion/model.hpp"
#include "persuasion/random.hpp"

namespace persuasion {

using Round = std::int64_t;

enum class FeedbackMode { kFull, kPartial };

inline std::string to_string(FeedbackMode mode) { return mode == FeedbackMode::kFull ? "full" : "partial"; }

/// What the receiver learns at the end of a round. The realised state is only
/// present under full-information feedback.
struct RoundFeedback {
  SignalIndex signal = 0;
  ActionIndex action = 0;
  double receiver_utility = 0.0;
  std::optional<StateIndex> state;
};

/// Per-signal history a receiver accumulates from its own feedback.
class LearnerState {
 public:
  LearnerState(std::size_t signals, std::size_t states, std::size_t actions, FeedbackMode mode)
      : mode_(mode),
        counts_(signals, 0),
        state_counts_(signals, std::vector<std::int64_t>(states, 0)),
        pulls_(signals, std::vector<std::int64_t>(actions, 0)),
        realized_(signals, actions) {}

  FeedbackMode feedback_mode() const noexcept { return mode_; }
  std::size_t signal_count() const noexcept { return counts_.size(); }
  std::size_t action_count() const noexcept { return realized_.cols(); }

  /// T_s: rounds so far in which signal s was received.
  std::int64_t count(SignalIndex s) const { return counts_[s]; }
  std::int64_t state_count(SignalIndex s, StateIndex w) const { return state_counts_[s][w]; }
  std::int64_t pulls(SignalIndex s, ActionIndex a) const { return pulls_[s][a]; }
  double realized_total(SignalIndex s, ActionIndex a) const { return realized_(s, a); }

  /// sum over past rounds with signal s of v(a, w): integer state counts times
  /// utilities, so equal sums compare exactly equal.
  double cumulative(SignalIndex s, ActionIndex a, const Matrix& receiver_utility) const {
    require(mode_ == FeedbackMode::kFull, ErrorCode::kInvalidArgument, "counterfactual sums need full feedback");
    double acc = 0.0;
    for (StateIndex w = 0; w < state_counts_[s].size(); ++w)
      acc += static_cast<double>(state_counts_[s][w]) * receiver_utility(a, w);
    return acc;
  }

  /// v(a, empirical posterior of s); requires count(s) > 0.
  double empirical_value(SignalIndex s, ActionIndex a, const Matrix& receiver_utility) const {
    return cumulative(s, a, receiver_utility) / static_cast<double>(counts_[s]);
  }

  void record(const RoundFeedback& fb) {
    ++counts_[fb.signal];
    ++pulls_[fb.signal][fb.action];
    realized_(fb.signal, fb.action) += fb.receiver_utility;
    if (mode_ == FeedbackMode::kFull) {
      require(fb.state.has_value(), ErrorCode::kInvalidArgument, "full feedback must carry the state");
      ++state_counts_[fb.signal][*fb.state];
    }
  }

 private:
  FeedbackMode mode_;
  std::vector<std::int64_t> counts_;
  std::vector<std::vector<std::int64_t>> state_counts_;
  std::vector<std::vector<std::int64_t>> pulls_;
  Matrix realized_;
};

/// Uniform over argmax_a v(a, empirical posterior), exact ties kept; uniform
/// over all actions for a signal never seen before.
inline Vector empirical_br_distribution(const LearnerState& state, const Matrix& receiver_utility, SignalIndex s) {
  const std::size_t n = receiver_utility.rows();
  Vector p(n, 0.0);
  if (state.count(s) == 0) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(n));
    return p;
  }
  Vector sums(n);
  for (ActionIndex a = 0; a < n; ++a) sums[a] = state.cumulative(s, a, receiver_utility);
  const double best = *std::max_element(sums.begin(), sums.end());
  double ties = 0.0;
  for (ActionIndex a = 0; a < n; ++a)
    if (sums[a] == best) ties += p[a] = 1.0;
  for (double& x : p) x /= ties;
  return p;
}

inline ActionIndex receiver_empirical_br(const LearnerState& state, const Matrix& receiver_utility, SignalIndex s,
                                         Rng& rng) {
  const std::size_t n = receiver_utility.rows();
  if (state.count(s) == 0) return rng.index(n);
  Vector sums(n);
  for (ActionIndex a = 0; a < n; ++a) sums[a] = state.cumulative(s, a, receiver_utility);
  const double best = *std::max_element(sums.begin(), sums.end());
  std::vector<ActionIndex> ties;
  for (ActionIndex a = 0; a < n; ++a)
    if (sums[a] == best) ties.push_back(a);
  return ties.size() == 1 ? ties.front() : ties[rng.index(ties.size())];
}

/// eta_t = sqrt(log|A| / t).
inline double exp_weights_rate(std::size_t actions, Round t) {
  return std::sqrt(std::log(static_cast<double>(actions)) / static_cast<double>(t));
}

/// p(a) proportional to exp(eta * cumulative[a]).
inline Vector exp_weights_distribution(const Vector& cumulative, double eta) {
  Vector p(cumulative.size());
  for (std::size_t a = 0; a < p.size(); ++a) p[a] = eta * cumulative[a];
  const double top = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (double& x : p) z += x = std::exp(x - top);
  for (double& x : p) x /= z;
  return p;
}

/// Softmax of eta_t times the per-action cumulative utility under signal s.
inline Vector exp_weights_distribution(const LearnerState& state, const Matrix& receiver_utility, SignalIndex s,
                                       Round t) {
  const std::size_t n = receiver_utility.rows();
  Vector sums(n);
  for (ActionIndex a = 0; a < n; ++a) sums[a] = state.cumulative(s, a, receiver_utility);
  return exp_weights_distribution(sums, exp_weights_rate(n, t));
}

inline ActionIndex receiver_exp_weights(const LearnerState& state, const Matrix& receiver_utility, SignalIndex s,
                                        Round t, Rng& rng) {
  return rng.categorical(exp_weights_distribution(state, receiver_utility, s, t));
}

/// Exploration rate and learning rate for the per-signal EXP3 learner.
struct Exp3Config {
  double exploration = 0.0;
  double learning_rate = 0.0;

  /// exploration = min(1, sqrt(K ln K / ((e - 1) T))), learning_rate = exploration / K.
  static Exp3Config for_horizon(Round horizon, std::size_t actions) {
    const double k = static_cast<double>(actions);
    const double g = std::min(1.0, std::sqrt(k * std::log(k) / ((std::exp(1.0) - 1.0) * static_cast<double>(horizon))));
    return {g, g / k};
  }
};

/// Per-signal EXP3 weights; only realised utilities are used.
class Exp3Weights {
 public:
  Exp3Weights(std::size_t signals, std::size_t actions, Exp3Config config)
      : config_(config), log_weights_(signals, actions, 0.0) {}

  const Exp3Config& config() const noexcept { return config_; }

  Vector distribution(SignalIndex s) const {
    const std::size_t n = log_weights_.cols();
    const auto row = log_weights_.row(s);
    const double top = *std::max_element(row.begin(), row.end());
    Vector p(n);
    double z = 0.0;
    for (ActionIndex a = 0; a < n; ++a) z += p[a] = std::exp(row[a] - top);
    const double mix = config_.exploration / static_cast<double>(n);
    for (double& x : p) x = (1.0 - config_.exploration) * x / z + mix;
    return p;
  }

  /// Importance-weighted update for the action actually taken.
  void update(SignalIndex s, ActionIndex a, double reward) {
    const double p = distribution(s)[a];
    log_weights_(s, a) += config_.learning_rate * reward / p;
  }

 private:
  Exp3Config config_;
  Matrix log_weights_;
};

inline ActionIndex receiver_exp3(const Exp3Weights& weights, SignalIndex s, Rng& rng) {
  return rng.categorical(weights.distribution(s));
}

/// A receiver in the repeated game. It sees the current signal and its own
/// feedback history, never the sender's scheme or the current state.
class ReceiverAlgorithm {
 public:
  virtual ~ReceiverAlgorithm() = default;
  virtual std::string name() const = 0;
  virtual bool supports(FeedbackMode mode) const = 0;
  virtual ActionIndex act(SignalIndex s, Round t, Rng& rng) = 0;
  virtual void observe(const RoundFeedback& fb) = 0;
  /// The mixed action act() would sample from at (s, t).
  virtual Vector action_distribution(SignalIndex s, Round t) const = 0;
};

class EmpiricalBestResponse final : public ReceiverAlgorithm {
 public:
  EmpiricalBestResponse(Matrix receiver_utility, std::size_t signals)
      : v_(std::move(receiver_utility)), state_(signals, v_.cols(), v_.rows(), FeedbackMode::kFull) {}

  std::string name() const override { return "empirical-br"; }
  bool supports(FeedbackMode mode) const override { return mode == FeedbackMode::kFull; }
  ActionIndex act(SignalIndex s, Round, Rng& rng) override { return receiver_empirical_br(state_, v_, s, rng); }
  void observe(const RoundFeedback& fb) override { state_.record(fb); }
  Vector action_distribution(SignalIndex s, Round) const override { return empirical_br_distribution(state_, v_, s); }
  const LearnerState& state() const noexcept { return state_; }

 private:
  Matrix v_;
  LearnerState state_;
};

class ExponentialWeights final : public ReceiverAlgorithm {
 public:
  ExponentialWeights(Matrix receiver_utility, std::size_t signals)
      : v_(std::move(receiver_utility)), state_(signals, v_.cols(), v_.rows(), FeedbackMode::kFull) {}

  std::string name() const override { return "exp-weights"; }
  bool supports(FeedbackMode mode) const override { return mode == FeedbackMode::kFull; }
  ActionIndex act(SignalIndex s, Round t, Rng& rng) override { return receiver_exp_weights(state_, v_, s, t, rng); }
  void observe(const RoundFeedback& fb) override { state_.record(fb); }
  Vector action_distribution(SignalIndex s, Round t) const override {
    return exp_weights_distribution(state_, v_, s, t);
  }
  const LearnerState& state() const noexcept { return state_; }

 private:
  Matrix v_;
  LearnerState state_;
};

class Exp3 final : public ReceiverAlgorithm {
 public:
  Exp3(std::size_t actions, std::size_t signals, Exp3Config config) : weights_(signals, actions, config) {}

  std::string name() const override { return "exp3"; }
  bool supports(FeedbackMode) const override { return true; }
  ActionIndex act(SignalIndex s, Round, Rng& rng) override { return receiver_exp3(weights_, s, rng); }
  void observe(const RoundFeedback& fb) override { weights_.update(fb.signal, fb.action, fb.receiver_utility); }
  Vector action_distribution(SignalIndex s, Round) const override { return weights_.distribution(s); }
  const Exp3Weights& weights() const noexcept { return weights_; }

 private:
  Exp3Weights weights_;
};

/// One executed round, as the sender sees it afterwards.
struct RoundRecord {
  Round t = 0;
  StateIndex state = 0;
  SignalIndex signal = 0;
  ActionIndex action = 0;
  double sender_utility = 0.0;
  double receiver_utility = 0.0;
  double running_average = 0.0;
};

/// The sender commits to a scheme each round knowing the full history, which
/// it receives through observe().
class SenderPolicy {
 public:
  virtual ~SenderPolicy() = default;
  virtual std::string name() const = 0;
  virtual const SignalingScheme& scheme_for_round(Round t) = 0;
  virtual void observe(const RoundRecord&) {}
};

class FixedSender final : public SenderPolicy {
 public:
  explicit FixedSender(SignalingScheme scheme) : scheme_(std::move(scheme)) {}
  std::string name() const override { return "fixed"; }
  const SignalingScheme& scheme_for_round(Round) override { return scheme_; }

 private:
  SignalingScheme scheme_;
};

/// Sends s2 until the target state occurs, sends s1 in that round, then flips
/// the target between the two states (first target: state 0).
class AlternatingSender final : public SenderPolicy {
 public:
  explicit AlternatingSender(const PersuasionInstance& inst)
      : schemes_{make(inst, 0), make(inst, 1)} {}

  std::string name() const override { return "alternating"; }
  const SignalingScheme& scheme_for_round(Round) override { return schemes_[target_]; }
  void observe(const RoundRecord& r) override {
    if (r.signal == kFlipSignal) target_ = 1 - target_;
  }
  StateIndex target() const noexcept { return target_; }

  static constexpr SignalIndex kFlipSignal = 0;  // "s1"

 private:
  static SignalingScheme make(const PersuasionInstance& inst, StateIndex target) {
    require(inst.state_count() == 2, ErrorCode::kWrongInstance, "alternating policy needs exactly two states");
    Matrix cond(2, 2);
    cond(target, 0) = 1.0;
    cond(1 - target, 1) = 1.0;
    return SignalingScheme({"s1", "s2"}, std::move(cond));
  }

  SignalingScheme schemes_[2];
  StateIndex target_ = 0;
};

/// Concentration radius c for the empirical receiver values of signal s after
/// t rounds of a fixed scheme:
///   2 sqrt(3 log(2|S|t) / (pi(s) t)) + (2 / pi(s)) sqrt(log(2|S||A|t) / (2t)).
inline double confidence_radius(double signal_probability, std::size_t signals, std::size_t actions, double t) {
  require(signal_probability > 0.0, ErrorCode::kZeroProbabilitySignal, "radius needs pi(s) > 0");
  require(t >= 1.0, ErrorCode::kRadiusPrecondition, "radius needs t >= 1");
  const double s = static_cast<double>(signals);
  const double a = static_cast<double>(actions);
  const double rel = std::sqrt(3.0 * std::log(2.0 * s * t) / (signal_probability * t));
  require(rel < 0.5, ErrorCode::kRadiusPrecondition,
          "sqrt(3 log(2|S|t)/(pi(s) t)) = " + std::to_string(rel) + " is not below 1/2");
  return 2.0 * rel + (2.0 / signal_probability) * std::sqrt(std::log(2.0 * s * a * t) / (2.0 * t));
}

inline double confidence_radius(const PersuasionInstance& inst, const SignalingScheme& scheme, double t,
                                SignalIndex s) {
  return confidence_radius(signal_marginals(inst, scheme)[s], scheme.signal_count(), inst.action_count(), t);
}

struct CheckpointDiagnostics {
  Round t = 0;
  double running_average = 0.0;
  std::vector<std::int64_t> signal_counts;
  Vector radius;               // per signal; NaN where the radius precondition fails
  double window_obedience = std::numeric_limits<double>::quiet_NaN();  // since previous checkpoint
  double cumulative_obedience = std::numeric_limits<double>::quiet_NaN();
};

struct SimulationSummary {
  Round rounds = 0;
  double total_sender_utility = 0.0;
  double final_average = 0.0;
  std::vector<std::int64_t> signal_rounds;
  Vector signal_sender_utility;
  // Consecutive rounds of the same signal that repeat the previous state.
  std::vector<std::int64_t> signal_state_repeats;
  std::vector<std::optional<StateIndex>> signal_first_state;
  std::int64_t obedient_rounds = 0;  // direct-revelation rounds where action == signal
  std::int64_t direct_rounds = 0;
  Round tail_start = 0;
  std::int64_t tail_rounds = 0;
  std::int64_t tail_obedient = 0;
  double tail_sender_utility = 0.0;

  double signal_fraction(SignalIndex s) const { return static_cast<double>(signal_rounds[s]) / static_cast<double>(rounds); }
  double signal_mean_utility(SignalIndex s) const {
    return signal_rounds[s] ? signal_sender_utility[s] / static_cast<double>(signal_rounds[s]) : 0.0;
  }
  double tail_obedience() const {
    return tail_rounds ? static_cast<double>(tail_obedient) / static_cast<double>(tail_rounds) : 0.0;
  }
};

struct SimulationOptions {
  Round rounds = 1;
  std::uint64_t seed = 0;
  FeedbackMode feedback = FeedbackMode::kFull;
  Round checkpoint_every = 0;  // 0 disables diagnostics
  Round tail_start = 0;        // rounds t >= tail_start feed the tail statistics (0: none)
  bool keep_rounds = false;
};

struct SimulationTrace {
  std::vector<RoundRecord> rounds;  // only with keep_rounds
  Vector running_average;           // only with keep_rounds
  std::vector<CheckpointDiagnostics> diagnostics;
  SimulationSummary summary;
};

using RoundObserver = std::function<void(const RoundRecord&)>;

/// Plays the repeated game: the sender commits to a scheme, a state is drawn
/// from the prior, a signal from the scheme, the receiver acts on the signal
/// alone, and feedback is delivered per the feedback mode. States, signals and
/// receiver randomness use separate streams of `seed`.
inline SimulationTrace simulate(const PersuasionInstance& inst, SenderPolicy& sender, ReceiverAlgorithm& receiver,
                                const SimulationOptions& opt, const RoundObserver& on_round = {}) {
  require(opt.rounds >= 1, ErrorCode::kInvalidArgument, "rounds must be at least 1");
  require(receiver.supports(opt.feedback), ErrorCode::kInvalidArgument,
          receiver.name() + " does not support " + to_string(opt.feedback) + " feedback");
  Rng state_rng = make_stream(opt.seed, Stream::kStates);
  Rng signal_rng = make_stream(opt.seed, Stream::kSignals);
  Rng receiver_rng = make_stream(opt.seed, Stream::kReceiver);

  SimulationTrace trace;
  SimulationSummary& sum = trace.summary;
  std::size_t signals = sender.scheme_for_round(1).signal_count();
  sum.signal_rounds.assign(signals, 0);
  sum.signal_sender_utility.assign(signals, 0.0);
  sum.signal_state_repeats.assign(signals, 0);
  sum.signal_first_state.assign(signals, std::nullopt);
  sum.tail_start = opt.tail_start;
  std::vector<std::optional<StateIndex>> last_state(signals);
  if (opt.keep_rounds) {
    trace.rounds.reserve(static_cast<std::size_t>(opt.rounds));
    trace.running_average.reserve(static_cast<std::size_t>(opt.rounds));
  }

  const SignalingScheme* cached = nullptr;
  bool direct = false;
  std::int64_t window_obedient = 0, window_direct = 0;
  double total = 0.0;

  for (Round t = 1; t <= opt.rounds; ++t) {
    const SignalingScheme& scheme = sender.scheme_for_round(t);
    if (&scheme != cached) {
      check_compatible(inst, scheme);
      require(scheme.signal_count() == signals, ErrorCode::kDimensionMismatch, "signal set changed mid-run");
      cached = &scheme;
      direct = scheme.is_direct_revelation(inst);
    }
    const StateIndex w = state_rng.categorical(inst.prior());
    const SignalIndex s = signal_rng.categorical(scheme.conditional().row(w));
    const ActionIndex a = receiver.act(s, t, receiver_rng);

    RoundRecord rec;
    rec.t = t;
    rec.state = w;
    rec.signal = s;
    rec.action = a;
    rec.sender_utility = inst.u(a, w);
    rec.receiver_utility = inst.v(a, w);
    total += rec.sender_utility;
    rec.running_average = total / static_cast<double>(t);

    RoundFeedback fb{s, a, rec.receiver_utility, std::nullopt};
    if (opt.feedback == FeedbackMode::kFull) fb.state = w;
    receiver.observe(fb);
    sender.observe(rec);

    ++sum.signal_rounds[s];
    sum.signal_sender_utility[s] += rec.sender_utility;
    if (last_state[s] && *last_state[s] == w) ++sum.signal_state_repeats[s];
    if (!sum.signal_first_state[s]) sum.signal_first_state[s] = w;
    last_state[s] = w;
    if (direct) {
      ++sum.direct_rounds;
      ++window_direct;
      if (a == s) {
        ++sum.obedient_rounds;
        ++window_obedient;
      }
    }
    if (opt.tail_start > 0 && t >= opt.tail_start) {
      ++sum.tail_rounds;
      sum.tail_sender_utility += rec.sender_utility;
      if (direct && a == s) ++sum.tail_obedient;
    }

    if (opt.keep_rounds) {
      trace.rounds.push_back(rec);
      trace.running_average.push_back(rec.running_average);
    }
    if (on_round) on_round(rec);

    if (opt.checkpoint_every > 0 && (t % opt.checkpoint_every == 0 || t == opt.rounds)) {
      CheckpointDiagnostics d;
      d.t = t;
      d.running_average = rec.running_average;
      d.signal_counts = sum.signal_rounds;
      const Vector marginal = signal_marginals(inst, scheme);
      d.radius.assign(signals, std::numeric_limits<double>::quiet_NaN());
      for (SignalIndex k = 0; k < signals; ++k) {
        try {
          d.radius[k] = confidence_radius(marginal[k], signals, inst.action_count(), static_cast<double>(t));
        } catch (const Error&) {
        }
      }
      if (window_direct > 0) d.window_obedience = static_cast<double>(window_obedient) / static_cast<double>(window_direct);
      if (sum.direct_rounds > 0)
        d.cumulative_obedience = static_cast<double>(sum.obedient_rounds) / static_cast<double>(sum.direct_rounds);
      window_obedient = window_direct = 0;
      trace.diagnostics.push_back(std::move(d));
    }
  }
  sum.rounds = opt.rounds;
  sum.total_sender_utility = total;
  sum.final_average = total / static_cast<double>(opt.rounds);
  return trace;
}

}  // namespace persuasion
